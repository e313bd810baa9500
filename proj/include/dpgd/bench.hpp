#pragma once

// Benchmark harness behind the dpgd-bench CLI.

#include "dpgd/baselines.hpp"
#include "dpgd/certify.hpp"
#include "dpgd/io.hpp"
#include "dpgd/problems.hpp"
#include "dpgd/solver.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dpgd::bench {

/// Malformed configuration or flags.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { dual_precon, gd, bregman };

std::string to_string(Method m);
Method parse_method(std::string_view name);
StepRuleKind parse_rule(std::string_view name);
std::string to_string(StepRuleKind kind);

/// Bregman baseline reference h(x) = ||x - center||^p / p, or the Euclidean map.
struct MirrorSpec {
  std::string kind;              // "power" | "euclidean"; empty picks by problem kind
  std::optional<double> p;       // defaults to the instance's p
};

struct RunConfig {
  Method method = Method::dual_precon;
  SolverConfig<double> solver;
  MirrorSpec mirror;
};

/**
 * Keys: method, rule, L0, max_iters, tol_kgap, tol_grad, r_min, r_max,
 * mirror {kind, p}. Unknown keys and ill-typed values raise ConfigError.
 */
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);

/// The instance's suggested x0, else the origin.
Vec starting_point(const ProblemInstance& inst);

/// Mirror map used by the bregman method on this instance.
MirrorMap<double> mirror_for(const ProblemInstance& inst, const MirrorSpec& spec);

IterateTrace<double> run_method(const ProblemInstance& inst, const RunConfig& cfg, const Vec& x0);

/// 0 tolerance reached, 2 max_iters, 3 step-search failure.
int exit_code(Termination t);

inline constexpr int kExitError = 1;
inline constexpr int kExitAssumption = 4;
inline constexpr int kExitBoundViolated = 5;

/// $DPGD_OUT_DIR, or the current directory.
std::filesystem::path default_output_dir();

struct CertifyOptions {
  long n_pairs = 500;
  long n_dirs = 32;
  std::uint64_t seed = 11;
  bool check_bounds = false;
  RunConfig run;  // used by check_bounds
};

/// Certificate for any instance kind; with check_bounds, verifies a run against the rate bounds.
CertificateReport certify_instance(const ProblemInstance& inst, const CertifyOptions& opts);

struct CompareRow {
  Method method;
  std::optional<long> evals_to_tol;  // empty means DNF
  double final_k_gap = 0;
  Termination termination = Termination::max_iters;
  std::filesystem::path csv;
};

struct CompareOptions {
  std::vector<Method> methods{Method::dual_precon, Method::gd, Method::bregman};
  long budget = 1000;  // gradient evaluations per method
  double tol_kgap = 1e-10;
  StepRule rule = StepRule::adaptive(1.0);
  MirrorSpec mirror;
  std::filesystem::path out_dir;
};

inline constexpr const char* kSummaryCsvHeader = "method,evals_to_tol,final_k_gap,termination";

/// One trace CSV per method plus summary.csv in out_dir.
std::vector<CompareRow> compare_methods(const ProblemInstance& inst, const CompareOptions& opts);

// Subcommand bodies; each returns the process exit code and reports errors on stderr.

int cmd_generate(const GenerateSpec& spec, const std::filesystem::path& out);

struct RunOverrides {
  std::optional<std::string> method;
  std::optional<std::string> rule;
  std::optional<double> L0;
  std::optional<long> max_iters;
  std::optional<double> tol_kgap;
  std::optional<double> tol_grad;
};

int cmd_run(const std::filesystem::path& instance, const std::optional<std::filesystem::path>& config,
            const RunOverrides& overrides, const std::filesystem::path& out);

int cmd_certify(const std::filesystem::path& instance, const CertifyOptions& opts,
                const std::optional<std::filesystem::path>& config, const std::filesystem::path& out);

int cmd_compare(const std::filesystem::path& instance, const CompareOptions& opts);

}  // namespace dpgd::bench
