#pragma once

#include <string>
#include <vector>

namespace repvis::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kVerificationFailure = 1;
inline constexpr int kInputError = 2;
inline constexpr int kNumericalFailure = 3;

struct CommonOptions {
  std::vector<std::string> overrides;  // --set section.key=value
  unsigned threads = 0;                // 0 = available parallelism
  std::string out_dir;                 // REPVIS_OUT_DIR fallback applied by caller
};

int cmd_calc(const std::string& config_path, double pi, const CommonOptions& common,
             std::ostream& out, std::ostream& err);

int cmd_sweep(const std::string& config_path, const std::string& grid_spec,
              const std::string& out_path, const CommonOptions& common,
              std::ostream& out, std::ostream& err);

int cmd_verify(const std::string& selector, std::uint64_t seed, const CommonOptions& common,
               std::ostream& out, std::ostream& err);

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const CommonOptions& common, std::ostream& out, std::ostream& err);

int cmd_estimate(const std::string& panel_path, const std::string& config_path,
                 const std::string& out_dir, const CommonOptions& common,
                 std::ostream& out, std::ostream& err);

int cmd_report(const std::string& config_path, const std::string& out_dir,
               std::uint64_t seed, const CommonOptions& common, std::ostream& out,
               std::ostream& err);

/// Resolves a path against --out-dir / REPVIS_OUT_DIR when relative.
std::string resolve_output_path(const std::string& path, const CommonOptions& common);

}  // namespace repvis::cli
