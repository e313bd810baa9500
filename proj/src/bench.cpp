#include "dpgd/bench.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>

namespace dpgd::bench {

using nlohmann::json;

std::string to_string(Method m) {
  switch (m) {
    case Method::dual_precon: return "dual_precon";
    case Method::gd: return "gd";
    case Method::bregman: return "bregman";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "dual_precon" || name == "dual-precon") return Method::dual_precon;
  if (name == "gd") return Method::gd;
  if (name == "bregman") return Method::bregman;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

StepRuleKind parse_rule(std::string_view name) {
  if (name == "fixed") return StepRuleKind::fixed;
  if (name == "doubling") return StepRuleKind::doubling;
  if (name == "adaptive") return StepRuleKind::adaptive;
  throw ConfigError("unknown step rule '" + std::string(name) + "'");
}

std::string to_string(StepRuleKind kind) {
  switch (kind) {
    case StepRuleKind::fixed: return "fixed";
    case StepRuleKind::doubling: return "doubling";
    case StepRuleKind::adaptive: return "adaptive";
  }
  return "?";
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{"method", "rule",  "L0",    "max_iters", "tol_kgap",
                                           "tol_grad", "r_min", "r_max", "mirror"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  RunConfig cfg;
  try {
    if (j.contains("method")) cfg.method = parse_method(j["method"].get<std::string>());
    if (j.contains("rule")) cfg.solver.rule.kind = parse_rule(j["rule"].get<std::string>());
    if (j.contains("L0")) cfg.solver.rule.L = j["L0"].get<double>();
    if (j.contains("max_iters")) cfg.solver.max_iters = j["max_iters"].get<long>();
    if (j.contains("tol_kgap")) cfg.solver.tol_kgap = j["tol_kgap"].get<double>();
    if (j.contains("tol_grad")) cfg.solver.tol_grad = j["tol_grad"].get<double>();
    if (j.contains("r_min")) cfg.solver.r_min = j["r_min"].get<int>();
    if (j.contains("r_max")) cfg.solver.r_max = j["r_max"].get<int>();
    if (j.contains("mirror")) {
      const json& m = j["mirror"];
      if (!m.is_object()) throw ConfigError("mirror must be an object");
      if (m.contains("kind")) cfg.mirror.kind = m["kind"].get<std::string>();
      if (m.contains("p")) cfg.mirror.p = m["p"].get<double>();
      if (!cfg.mirror.kind.empty() && cfg.mirror.kind != "power" && cfg.mirror.kind != "euclidean")
        throw ConfigError("unknown mirror kind '" + cfg.mirror.kind + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("ill-typed config value: ") + e.what());
  }
  try {
    cfg.solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
  json j;
  j["method"] = to_string(cfg.method);
  j["rule"] = to_string(cfg.solver.rule.kind);
  j["L0"] = cfg.solver.rule.L;
  j["max_iters"] = cfg.solver.max_iters;
  j["tol_kgap"] = cfg.solver.tol_kgap;
  j["tol_grad"] = cfg.solver.tol_grad;
  j["r_min"] = cfg.solver.r_min;
  j["r_max"] = cfg.solver.r_max;
  if (!cfg.mirror.kind.empty() || cfg.mirror.p) {
    json m = json::object();
    if (!cfg.mirror.kind.empty()) m["kind"] = cfg.mirror.kind;
    if (cfg.mirror.p) m["p"] = *cfg.mirror.p;
    j["mirror"] = m;
  }
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

Vec starting_point(const ProblemInstance& inst) {
  if (inst.x0.size() > 0) return inst.x0;
  return Vec::Zero(inst.kind == ProblemKind::power1d ? 1 : inst.d());
}

MirrorMap<double> mirror_for(const ProblemInstance& inst, const MirrorSpec& spec) {
  std::string kind = spec.kind;
  const bool has_power = inst.kind == ProblemKind::pnorm || inst.kind == ProblemKind::power1d;
  if (kind.empty()) kind = has_power ? "power" : "euclidean";
  if (kind == "euclidean") return euclidean_mirror_map<double>(starting_point(inst).size());
  if (kind != "power") throw ConfigError("unknown mirror kind '" + kind + "'");
  const double p = spec.p.value_or(inst.p);
  // Centered at the least-squares solution of Ax = b (b itself for power1d).
  Vec center = inst.kind == ProblemKind::power1d ? Vec(inst.b) : Vec(inst.A.colPivHouseholderQr().solve(inst.b));
  return power_mirror_map<double>(center, p);
}

IterateTrace<double> run_method(const ProblemInstance& inst, const RunConfig& cfg, const Vec& x0) {
  const ProblemPair pair = make_problem(inst);
  switch (cfg.method) {
    case Method::dual_precon: return solve(pair.f, pair.k, x0, cfg.solver);
    case Method::gd: return run_gradient_descent(pair.f, pair.k, x0, cfg.solver);
    case Method::bregman: {
      const MirrorMap<double> h = mirror_for(inst, cfg.mirror);
      return run_bregman(pair.f, h, pair.k, x0, cfg.solver);
    }
  }
  throw ConfigError("unknown method");
}

int exit_code(Termination t) {
  switch (t) {
    case Termination::kgap_tol:
    case Termination::grad_tol: return 0;
    case Termination::max_iters: return 2;
    case Termination::step_search_exhausted: return 3;
  }
  return kExitError;
}

std::filesystem::path default_output_dir() {
  if (const char* dir = std::getenv("DPGD_OUT_DIR"); dir && *dir) return dir;
  return std::filesystem::current_path();
}

namespace {

void fill_ratio_stats(CertificateReport& rep, const RatioSample& s, long n_pairs) {
  rep.n_samples += n_pairs;
  rep.n_skipped += s.skipped;
  if (s.ratios.empty()) return;
  rep.L_star_estimate = s.sup_ratio;
  rep.mu_star_estimate = s.inf_ratio;
  // Largest amount by which a sampled ratio leaves [mu*, L*]; negative when all are inside.
  std::optional<double> worst;
  if (rep.closed_form_L_star) worst = s.sup_ratio - *rep.closed_form_L_star;
  if (rep.closed_form_mu_star) {
    const double low = *rep.closed_form_mu_star - s.inf_ratio;
    worst = worst ? std::max(*worst, low) : low;
  }
  rep.worst_violation = worst;
}

}  // namespace

CertificateReport certify_instance(const ProblemInstance& inst, const CertifyOptions& opts) {
  CertificateReport rep;
  const ProblemPair pair = make_problem(inst);
  Vec center = Vec::Zero(pair.f.dim);
  switch (inst.kind) {
    case ProblemKind::pnorm:
      rep = pnorm_constants(inst, opts.n_dirs, opts.seed);
      break;
    case ProblemKind::exp_penalty:
      rep = exp_penalty_constants(inst);
      break;
    case ProblemKind::quadratic:
      rep = quadratic_constants(inst.A, inst.P.size() > 0 ? inst.P : inst.A);
      break;
    case ProblemKind::power1d:
      rep.closed_form_L_star = 1.0;
      rep.closed_form_mu_star = 1.0;
      center = inst.b;
      break;
  }
  const RatioSample s =
      sample_bregman_ratio(pair.f, pair.k, log_radius_sampler(center, 1e-2, 1e2, opts.seed + 1), opts.n_pairs);
  fill_ratio_stats(rep, s, opts.n_pairs);

  if (opts.check_bounds) {
    const Vec x0 = starting_point(inst);
    const ReferenceMin<double> ref = pair.f.reference_min ? *pair.f.reference_min
                                                          : reference_minimum(pair.f, pair.k, x0);
    const IterateTrace<double> trace = run_method(inst, opts.run, x0);
    std::optional<double> mu;
    if (opts.run.solver.rule.kind == StepRuleKind::fixed && rep.closed_form_mu_star &&
        opts.run.method == Method::dual_precon)
      mu = rep.closed_form_mu_star;
    const auto bounds = verify_rate_bounds(trace, std::optional<double>(ref.f_min), pair.f.value(x0), mu);
    json b;
    b["f_min"] = ref.f_min;
    b["iterations"] = static_cast<long>(trace.records.size()) - 1;
    b["termination"] = to_string(trace.termination);
    b["sublinear_ok"] = bounds.sublinear_ok;
    b["worst_sublinear_margin"] = bounds.worst_sublinear_margin;
    b["worst_sublinear_iter"] = bounds.worst_sublinear_iter;
    if (bounds.linear_ok) {
      b["linear_ok"] = *bounds.linear_ok;
      b["worst_linear_margin"] = bounds.worst_linear_margin;
      b["worst_linear_iter"] = bounds.worst_linear_iter;
    }
    b["passed"] = bounds.passed();
    rep.extra["rate_bounds"] = b;
  }
  return rep;
}

std::vector<CompareRow> compare_methods(const ProblemInstance& inst, const CompareOptions& opts) {
  if (opts.budget < 1) throw ConfigError("compare: budget must be positive");
  std::filesystem::create_directories(opts.out_dir);
  const Vec x0 = starting_point(inst);
  std::vector<CompareRow> rows;
  for (Method m : opts.methods) {
    RunConfig cfg;
    cfg.method = m;
    cfg.mirror = opts.mirror;
    cfg.solver.rule = opts.rule;
    cfg.solver.tol_kgap = opts.tol_kgap;
    // Every iteration costs at least one gradient, so this never cuts a run short of the budget.
    cfg.solver.max_iters = opts.budget;
    IterateTrace<double> trace;
    try {
      trace = run_method(inst, cfg, x0);
    } catch (const DomainError&) {
      trace.termination = Termination::step_search_exhausted;
    } catch (const NumericalError&) {
      trace.termination = Termination::step_search_exhausted;
    }
    while (!trace.records.empty() && trace.records.back().grad_evals > opts.budget) {
      trace.records.pop_back();
      trace.termination = Termination::max_iters;
    }
    CompareRow row;
    row.method = m;
    row.termination = trace.termination;
    for (const auto& r : trace.records) {
      if (r.k_gap <= opts.tol_kgap) {
        row.evals_to_tol = r.grad_evals;
        break;
      }
    }
    row.final_k_gap = trace.records.empty() ? std::numeric_limits<double>::quiet_NaN() : trace.records.back().k_gap;
    row.csv = opts.out_dir / (to_string(m) + ".csv");
    write_trace_csv(row.csv, trace);
    rows.push_back(row);
  }
  std::ofstream summary(opts.out_dir / "summary.csv");
  summary << kSummaryCsvHeader << '\n';
  for (const auto& r : rows) {
    summary << to_string(r.method) << ',' << (r.evals_to_tol ? std::to_string(*r.evals_to_tol) : "DNF") << ','
            << format_double(r.final_k_gap) << ',' << dpgd::to_string(r.termination) << '\n';
  }
  if (!summary) throw std::runtime_error("failed writing summary.csv");
  return rows;
}

int cmd_generate(const GenerateSpec& spec, const std::filesystem::path& out) {
  try {
    const ProblemInstance inst = generate_random_instance(spec);
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    save_instance(inst, out);
    std::cout << "wrote " << out.string() << " (" << to_string(inst.kind) << ", n=" << inst.n() << ", d=" << inst.d()
              << ")\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "generate: " << e.what() << '\n';
    return kExitError;
  }
}

int cmd_run(const std::filesystem::path& instance, const std::optional<std::filesystem::path>& config,
            const RunOverrides& ov, const std::filesystem::path& out) {
  RunConfig cfg;
  ProblemInstance inst;
  try {
    if (config) cfg = load_run_config(*config);
    if (ov.method) cfg.method = parse_method(*ov.method);
    if (ov.rule) cfg.solver.rule.kind = parse_rule(*ov.rule);
    if (ov.L0) cfg.solver.rule.L = *ov.L0;
    if (ov.max_iters) cfg.solver.max_iters = *ov.max_iters;
    if (ov.tol_kgap) cfg.solver.tol_kgap = *ov.tol_kgap;
    if (ov.tol_grad) cfg.solver.tol_grad = *ov.tol_grad;
    cfg.solver.validate();
    inst = load_instance(instance);
  } catch (const std::exception& e) {
    std::cerr << "run: " << e.what() << '\n';
    return kExitError;
  }
  try {
    const IterateTrace<double> trace = run_method(inst, cfg, starting_point(inst));
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    write_trace_csv(out, trace);
    const auto& last = trace.records.back();
    std::cout << to_string(trace.termination) << ": iters=" << last.iter << " grad_evals=" << last.grad_evals
              << " k_gap=" << format_double(last.k_gap) << " f=" << format_double(last.f_val) << '\n';
    return exit_code(trace.termination);
  } catch (const std::exception& e) {
    std::cerr << "run: " << e.what() << '\n';
    return kExitError;
  }
}

int cmd_certify(const std::filesystem::path& instance, const CertifyOptions& opts_in,
                const std::optional<std::filesystem::path>& config, const std::filesystem::path& out) {
  CertifyOptions opts = opts_in;
  try {
    if (config) opts.run = load_run_config(*config);
    const ProblemInstance inst = load_instance(instance);
    const CertificateReport rep = certify_instance(inst, opts);
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    std::ofstream f(out);
    f << report_to_json(rep).dump(2) << '\n';
    if (!f) throw std::runtime_error("failed writing " + out.string());
    std::cout << "wrote " << out.string();
    if (rep.closed_form_L_star) std::cout << " L*=" << format_double(*rep.closed_form_L_star);
    if (rep.closed_form_mu_star) std::cout << " mu*=" << format_double(*rep.closed_form_mu_star);
    std::cout << '\n';
    if (rep.extra.contains("rate_bounds") && !rep.extra["rate_bounds"]["passed"].get<bool>()) {
      std::cerr << "certify: recorded trace violates the rate bounds\n";
      return kExitBoundViolated;
    }
    return 0;
  } catch (const AssumptionViolation& e) {
    std::cerr << "certify: assumption violated: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const std::exception& e) {
    std::cerr << "certify: " << e.what() << '\n';
    return kExitError;
  }
}

int cmd_compare(const std::filesystem::path& instance, const CompareOptions& opts) {
  try {
    const ProblemInstance inst = load_instance(instance);
    const auto rows = compare_methods(inst, opts);
    for (const auto& r : rows)
      std::cout << to_string(r.method) << ": " << (r.evals_to_tol ? std::to_string(*r.evals_to_tol) : "DNF")
                << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "compare: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace dpgd::bench
