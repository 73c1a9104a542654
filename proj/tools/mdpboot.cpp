#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdpboot/errors.h"
#include "mdpboot/experiments.h"
#include "mdpboot/functionals.h"
#include "mdpboot/io.h"
#include "mdpboot/rate.h"
#include "mdpboot/simulate.h"
#include "mdpboot/zones.h"

namespace {

using ojson = nlohmann::ordered_json;
using namespace mdpboot;

enum ExitCode : int { kOk = 0, kFail = 1, kInput = 2, kInfeasible = 3 };

ojson real(double x) {
  if (std::isfinite(x)) return x;
  return format_real(x);
}

ojson reals(const std::vector<double>& xs) {
  ojson a = ojson::array();
  for (double x : xs) a.push_back(real(x));
  return a;
}

ojson reals(std::span<const double> xs) { return reals(std::vector<double>(xs.begin(), xs.end())); }

void print(const ojson& j) { std::cout << j.dump(2) << "\n"; }

std::vector<double> read_reals(const std::string& path) { return parse_real_list(read_text_file(path)); }

std::vector<Point> read_pairs(const std::string& path) {
  const auto doc = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) throw InputError(path + ": expected a JSON array of [x, y] pairs");
  std::vector<Point> pts;
  for (const auto& e : doc) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      throw InputError(path + ": every entry must be a pair [x, y]");
    }
    pts.push_back(Point{e[0].get<double>(), e[1].get<double>()});
  }
  if (pts.empty()) throw InputError(path + ": sample is empty");
  return pts;
}

// ---- run

struct RunArgs {
  std::string config;
  std::string output;
  std::size_t workers = 0;
  bool quiet = false;
};

int cmd_run(const RunArgs& a) {
  ExperimentConfig cfg = load_experiment_config(a.config);
  if (!a.output.empty()) cfg.output = a.output;
  if (a.workers > 0) cfg.workers = a.workers;
  const ExperimentResult res = run_experiment(cfg);
  if (cfg.output.empty()) {
    std::cout << res.table.str();
  } else {
    const auto manifest = write_outputs(cfg, res);
    if (!a.quiet) std::cerr << "wrote " << cfg.output << " and " << manifest.string() << "\n";
  }
  std::cerr << res.summary << "\n";
  return res.pass ? kOk : kFail;
}

// ---- rate

struct RateArgs {
  std::string dist;
  std::string constraints;
  std::string shift;
};

int cmd_rate(const RateArgs& a) {
  const FiniteProbabilityMeasure p = read_distribution(a.dist);
  std::vector<LinearConstraint> cons = read_constraints(a.constraints);
  for (std::size_t j = 0; j < cons.size(); ++j) {
    if (cons[j].f().size() != p.size()) {
      throw InputError("constraint " + std::to_string(j) + ": f has " + std::to_string(cons[j].f().size()) +
                       " values but the distribution has " + std::to_string(p.size()) + " atoms");
    }
  }
  std::optional<ShiftVector> shift;
  if (!a.shift.empty()) {
    shift = ShiftVector{parse_real_list(a.shift)};
    if (shift->values.size() != cons.size()) throw InputError("--shift needs one value per constraint");
  }
  const RateSolution sol = min_rate_linear(ConstraintSet(p, std::move(cons)), shift);
  ojson out;
  out["rate"] = real(sol.rate);
  out["feasible"] = sol.feasible();
  out["argmin"] = sol.argmin ? reals(sol.argmin->density()) : ojson(nullptr);
  print(out);
  return sol.feasible() ? kOk : kInfeasible;
}

// ---- simulate

struct SimulateArgs {
  std::string dist;
  std::string f;
  std::string counts;
  std::uint64_t n = 0;
  double theta = 0.0;
  std::uint64_t k = 0;
  std::uint64_t trials = 10000;
  std::string method = "tilted";
  std::uint64_t seed = 0;
  std::size_t workers = 0;
};

int cmd_simulate(const SimulateArgs& a) {
  const FiniteProbabilityMeasure p = read_distribution(a.dist);
  const TestFunction f(parse_real_list(a.f));
  if (f.size() != p.size()) throw InputError("--f needs one value per atom of the distribution");
  if (a.k < 1) throw InputError("--k must be at least 1");
  const EstimatorMethod method = parse_method(a.method);
  std::optional<EmpiricalMeasure> emp;
  if (!a.counts.empty()) {
    std::vector<std::uint64_t> counts;
    for (double c : parse_real_list(a.counts)) {
      if (c < 0.0 || c != std::floor(c)) throw InputError("--counts must be nonnegative integers");
      counts.push_back(static_cast<std::uint64_t>(c));
    }
    emp.emplace(p, std::move(counts));
  } else if (a.n > 0) {
    emp = draw_sample(p, a.n, child(RngSpec{a.seed, 1}, a.n));
  } else {
    throw InputError("give the empirical measure with --counts or draw one with --n");
  }
  SimOptions opts;
  opts.workers = a.workers;
  const TailEstimate est =
      conditional_tail(method, *emp, f, a.theta, a.k, a.trials, child(RngSpec{a.seed, 2}, a.k), opts);
  ojson out;
  out["p_hat"] = real(est.p_hat);
  out["std_err"] = real(est.std_err);
  out["trials"] = est.trials;
  out["method"] = std::string(to_string(est.method));
  ojson counts = ojson::array();
  for (std::uint64_t c : emp->counts()) counts.push_back(c);
  out["counts"] = counts;
  print(out);
  return kOk;
}

// ---- zones

struct ZonesArgs {
  std::optional<double> gamma;
  std::optional<double> t;
  std::optional<double> bounded;
  double a_scale = 1.0, a_beta = 0.35, a_mu = 0.0;
  double b_scale = 1.0, b_beta = 0.3, b_mu = 0.0;
  double d_scale = 1.0, d_beta = 0.3, d_mu = 0.0;
  bool json = false;
};

std::string describe(const SequenceFamily& s) {
  std::ostringstream os;
  os << s.scale << " n^-" << s.beta << " (log n)^-" << s.mu;
  return os.str();
}

int cmd_zones(const ZonesArgs& a) {
  const int given = a.gamma.has_value() + a.t.has_value() + a.bounded.has_value();
  if (given != 1) throw InputError("give exactly one of --gamma, --t, --bounded");
  const TailModel tail = a.gamma     ? TailModel::stretched_exponential(*a.gamma)
                         : a.t       ? TailModel::power(*a.t)
                                     : TailModel::bounded(*a.bounded);
  const SequenceFamily as(a.a_scale, a.a_beta, a.a_mu);
  const SequenceFamily bs(a.b_scale, a.b_beta, a.b_mu);
  const SequenceFamily ds(a.d_scale, a.d_beta, a.d_mu);
  struct Line {
    std::string condition;
    std::string sequence;
    Verdict verdict;
  };
  const std::vector<Line> lines = {
      {"Phi", "b_n = " + describe(bs), check_phi_membership(tail, bs)},
      {"Psi", "d_n = " + describe(ds), check_psi_membership(tail, ds)},
      {"Theta (summable)", "a_n = " + describe(as), check_theta_conditions(tail, as, ThetaMode::summable)},
      {"Theta (vanishing)", "a_n = " + describe(as), check_theta_conditions(tail, as, ThetaMode::vanishing)},
  };
  std::optional<ZoneReport> report;
  if (tail.family() == TailFamily::stretched_exponential) report = zone_report(tail);

  if (a.json) {
    ojson out;
    ojson rows = ojson::array();
    for (const Line& l : lines) {
      rows.push_back(
          ojson{{"condition", l.condition}, {"sequence", l.sequence}, {"verdict", std::string(to_string(l.verdict))}});
    }
    out["verdicts"] = rows;
    if (report) {
      out["zone"] = ojson{{"gamma", real(report->gamma)},
                          {"b_exponent_stated", real(report->b_exponent_stated)},
                          {"b_exponent_from_phi", real(report->b_exponent_from_phi)},
                          {"d_exponent", report->d_exponent ? real(*report->d_exponent) : ojson(nullptr)},
                          {"d_unbounded", report->d_unbounded},
                          {"a_log_exponent_stated", real(report->a_log_exponent_stated)},
                          {"a_log_exponent_from_summability", real(report->a_log_exponent_from_summability)}};
    }
    print(out);
    return kOk;
  }
  std::cout << std::left << std::setw(20) << "condition" << std::setw(40) << "sequence"
            << "verdict\n";
  for (const Line& l : lines) {
    std::cout << std::left << std::setw(20) << l.condition << std::setw(40) << l.sequence << to_string(l.verdict)
              << "\n";
  }
  if (report) {
    std::cout << "\nzone exponents for gamma = " << report->gamma << "\n"
              << "  b_n = o(n^-x), stated:            x = " << report->b_exponent_stated << "\n"
              << "  b_n = o(n^-x), from Phi:          x = " << report->b_exponent_from_phi << "\n";
    if (report->d_unbounded) {
      std::cout << "  d_n: every polynomial rate qualifies\n";
    } else if (report->d_exponent) {
      std::cout << "  d_n = o(n^-x):                    x = " << *report->d_exponent << "\n";
    }
    std::cout << "  a_n = o((log n)^-x), stated:      x = " << report->a_log_exponent_stated << "\n"
              << "  a_n = o((log n)^-x), summability: x = " << report->a_log_exponent_from_summability << "\n";
  }
  return kOk;
}

// ---- quantile

struct QuantileArgs {
  std::string sample;
  std::string resample;
  double lo = 0.1;
  double hi = 0.9;
  std::size_t points = 9;
  std::optional<double> kappa;
  std::string phi;
  double law_lower = 0.0;
  double law_upper = 1.0;
  std::size_t resolution = 1000;
};

int cmd_quantile(const QuantileArgs& a) {
  if (a.sample.empty() && a.phi.empty()) throw InputError("give --sample, --phi, or both");
  ojson out;
  const std::vector<double> levels = linspace(a.lo, a.hi, a.points);
  if (!a.sample.empty()) {
    const StepCdf fhat = StepCdf::from_sample(read_reals(a.sample));
    std::vector<double> hat;
    for (double p : levels) hat.push_back(generalized_inverse(fhat, p));
    out["levels"] = reals(levels);
    out["quantiles"] = reals(hat);
    if (!a.resample.empty()) {
      const StepCdf fstar = StepCdf::from_sample(read_reals(a.resample));
      const GridFunction diff = quantile_process_diff(fstar, fhat, levels);
      out["difference"] = reals(diff.values);
      if (a.kappa) out["weighted_ks"] = real(weighted_ks(fhat, fstar, *a.kappa));
    } else if (a.kappa) {
      throw InputError("--kappa needs --resample");
    }
  }
  if (!a.phi.empty()) {
    std::vector<double> vals = parse_real_list(a.phi);
    if (vals.empty()) throw InputError("--phi is empty");
    const GridFunction phi = vals.size() == 1 ? GridFunction::constant(linspace(a.lo, a.hi, 2), vals[0])
                                              : GridFunction(linspace(a.lo, a.hi, vals.size()), vals);
    const ContinuousLaw law = ContinuousLaw::uniform(a.law_lower, a.law_upper);
    const double r = rate_Iq(law, a.lo, a.hi, phi, a.resolution);
    out["rate_Iq"] = real(r);
    out["resolution"] = a.resolution;
  }
  print(out);
  return kOk;
}

// ---- copula

struct CopulaArgs {
  std::string sample;
  double lo = 0.2;
  double hi = 0.8;
  std::size_t points = 4;
  std::string phi;
  std::size_t cells = 10;
};

int cmd_copula(const CopulaArgs& a) {
  if (a.sample.empty() && a.phi.empty()) throw InputError("give --sample, --phi, or both");
  ojson out;
  const std::vector<double> grid = linspace(a.lo, a.hi, a.points);
  if (!a.sample.empty()) {
    const std::vector<Point> pts = read_pairs(a.sample);
    const Grid2Function c = empirical_copula(pts, grid, grid);
    out["u"] = reals(c.u);
    out["v"] = reals(c.v);
    out["copula"] = reals(c.values);
  }
  if (!a.phi.empty()) {
    std::vector<double> vals = parse_real_list(a.phi);
    if (vals.size() == 1) vals.assign(grid.size() * grid.size(), vals[0]);
    if (vals.size() != grid.size() * grid.size()) {
      throw InputError("--phi needs 1 or " + std::to_string(grid.size() * grid.size()) + " values");
    }
    if (a.cells * a.cells > kCopulaGridBudget) {
      throw ComplexityError("grid of " + std::to_string(a.cells * a.cells) + " cells exceeds the budget of " +
                            std::to_string(kCopulaGridBudget));
    }
    const Grid2Function phi(grid, grid, vals);
    const double r = rate_Ic(unit_square_grid(a.cells), CopulaModel::independent_unit_square(), phi);
    out["rate_Ic"] = real(r);
    out["cells_per_side"] = a.cells;
  }
  print(out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moderate deviations for bootstrap empirical measures"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mdpboot::version()));

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment from a JSON config");
  run_cmd->add_option("--config", run.config, "Experiment config (JSON)")->required();
  run_cmd->add_option("--output", run.output, "Override the CSV output path");
  run_cmd->add_option("--workers", run.workers, "Worker threads (0 = automatic)");
  run_cmd->add_flag("--quiet", run.quiet, "Only print the verdict line");

  RateArgs rate;
  auto* rate_cmd = app.add_subcommand("rate", "Minimal quadratic rate over linear constraints");
  rate_cmd->add_option("--dist", rate.dist, "Distribution (JSON)")->required();
  rate_cmd->add_option("--constraints", rate.constraints, "Constraints (JSON list of {f, kind, c})")->required();
  rate_cmd->add_option("--shift", rate.shift, "Shift vector, one value per constraint");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Conditional bootstrap tail probability");
  sim_cmd->add_option("--dist", sim.dist, "Base distribution (JSON)")->required();
  sim_cmd->add_option("--f", sim.f, "Test function values, one per atom")->required();
  sim_cmd->add_option("--counts", sim.counts, "Empirical counts over the atoms");
  sim_cmd->add_option("--n", sim.n, "Draw an empirical measure of this size instead");
  sim_cmd->add_option("--theta", sim.theta, "Deviation threshold")->required();
  sim_cmd->add_option("--k", sim.k, "Bootstrap size")->required();
  sim_cmd->add_option("--trials", sim.trials, "Monte Carlo trials");
  sim_cmd->add_option("--method", sim.method, "naive, exact or tilted");
  sim_cmd->add_option("--seed", sim.seed, "Seed");
  sim_cmd->add_option("--workers", sim.workers, "Worker threads (0 = automatic)");

  ZonesArgs zones;
  auto* zones_cmd = app.add_subcommand("zones", "Tail conditions for normalising sequences");
  zones_cmd->add_option("--gamma", zones.gamma, "Stretched-exponential tail exponent");
  zones_cmd->add_option("--t", zones.t, "Power tail exponent");
  zones_cmd->add_option("--bounded", zones.bounded, "Bounded tail with this bound");
  zones_cmd->add_option("--a-scale", zones.a_scale, "a_n = scale n^-beta (log n)^-mu");
  zones_cmd->add_option("--a-beta", zones.a_beta, "Polynomial decay of a_n");
  zones_cmd->add_option("--a-mu", zones.a_mu, "Negative log power of a_n");
  zones_cmd->add_option("--b-scale", zones.b_scale, "b_n = scale n^-beta (log n)^-mu");
  zones_cmd->add_option("--b-beta", zones.b_beta, "Polynomial decay of b_n");
  zones_cmd->add_option("--b-mu", zones.b_mu, "Negative log power of b_n");
  zones_cmd->add_option("--d-scale", zones.d_scale, "d_n = scale n^-beta (log n)^-mu");
  zones_cmd->add_option("--d-beta", zones.d_beta, "Polynomial decay of d_n");
  zones_cmd->add_option("--d-mu", zones.d_mu, "Negative log power of d_n");
  zones_cmd->add_flag("--json", zones.json, "JSON instead of a text table");

  QuantileArgs quant;
  auto* quant_cmd = app.add_subcommand("quantile", "Empirical quantiles and the quantile rate");
  quant_cmd->add_option("--sample", quant.sample, "Sample (JSON array)");
  quant_cmd->add_option("--resample", quant.resample, "Bootstrap sample (JSON array)");
  quant_cmd->add_option("--lo", quant.lo, "Lowest level");
  quant_cmd->add_option("--hi", quant.hi, "Highest level");
  quant_cmd->add_option("--points", quant.points, "Number of levels");
  quant_cmd->add_option("--kappa", quant.kappa, "Weighted KS exponent (with --resample)");
  quant_cmd->add_option("--phi", quant.phi, "Target values on evenly spaced levels in [lo, hi]");
  quant_cmd->add_option("--law-lower", quant.law_lower, "Uniform law lower end");
  quant_cmd->add_option("--law-upper", quant.law_upper, "Uniform law upper end");
  quant_cmd->add_option("--resolution", quant.resolution, "Discretisation intervals");

  CopulaArgs cop;
  auto* cop_cmd = app.add_subcommand("copula", "Empirical copula and the copula rate");
  cop_cmd->add_option("--sample", cop.sample, "Bivariate sample (JSON array of [x, y])");
  cop_cmd->add_option("--lo", cop.lo, "Lowest level");
  cop_cmd->add_option("--hi", cop.hi, "Highest level");
  cop_cmd->add_option("--points", cop.points, "Levels per axis");
  cop_cmd->add_option("--phi", cop.phi, "Target, one value or one per grid node (row-major)");
  cop_cmd->add_option("--cells", cop.cells, "Cells per side of the unit-square grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*rate_cmd) return cmd_rate(rate);
    if (*sim_cmd) return cmd_simulate(sim);
    if (*zones_cmd) return cmd_zones(zones);
    if (*quant_cmd) return cmd_quantile(quant);
    if (*cop_cmd) return cmd_copula(cop);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const ComplexityError& e) {
    std::cerr << "complexity guard: " << e.what() << "\n";
    return kInfeasible;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kInput;
}
