// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "checks.h"
#include "mdpboot/experiments.h"
#include "mdpboot/functionals.h"
#include "mdpboot/rate.h"
#include "mdpboot/simulate.h"

namespace fs = std::filesystem;
using namespace mdpboot;

namespace {

const fs::path kConfigs = MDPBOOT_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

bool run_criterion(const char* id, const char* title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("error: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("[%s] %s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
  return o.pass;
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

Outcome oracle_equivalence() {
  const auto r = checks::oracle_equivalence(20, 100, 100'000, 1001);
  const double rate = static_cast<double>(r.failures) / static_cast<double>(r.instances);
  return {rate <= 0.01, checks::describe(r) + ", miss rate " + fmt(rate)};
}

Outcome rate_solver() {
  const auto closed = checks::rate_closed_form(1000, 1002);
  const auto brute = checks::rate_brute_force(200, 1003);
  return {closed.pass && brute.pass, checks::describe(closed) + "; " + checks::describe(brute)};
}

Outcome conditional_decay() {
  const ExperimentConfig cfg = load_experiment_config(kConfigs / "conditional.json");
  const double theory = min_rate_halfspace(*cfg.distribution, TestFunction(cfg.f), cfg.threshold).rate;
  const SlopeFit fit = fit_rate_slope(run_decay_experiment(cfg));
  const double gap = std::abs(fit.slope - theory);
  return {gap <= 0.2 * theory, "slope " + fmt(fit.slope) + " +/- " + fmt(fit.ci_halfwidth, 2) + " vs theory " +
                                   fmt(theory) + ", relative gap " + fmt(gap / theory, 3)};
}

Outcome joint_additivity() {
  Outcome o{true, ""};
  for (const char* name : {"joint_nu0.5.json", "joint_nu1.json", "joint_nu2.json"}) {
    const ExperimentConfig cfg = load_experiment_config(kConfigs / name);
    const JointReport rep = run_joint_experiment(cfg);
    o.pass = o.pass && rep.pass && rep.relative_gap <= 0.25;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += "nu=" + fmt(cfg.nu) + ": joint " + (rep.joint_fit ? fmt(rep.joint_fit->slope) : "n/a") +
                " vs predicted " + fmt(rep.predicted_joint) + " (gap " + fmt(rep.relative_gap, 3) + ")";
  }
  return o;
}

Outcome instability() {
  const ExperimentConfig cfg = load_experiment_config(kConfigs / "instability.json");
  const InstabilityReport rep = run_instability_experiment(cfg);
  const InstabilityRow& last = rep.rows.back();
  const bool pass = rep.zone.valid && last.normalized > -0.1 && last.gaussian < -0.4;
  return {pass, "n=" + std::to_string(last.n) + ": normalized " + fmt(last.normalized) + ", gaussian " +
                    fmt(last.gaussian) + ", p_hat " + fmt(last.estimate.p_hat)};
}

Outcome sandwich() {
  const GaussianSandwich be = gaussian_sandwich(6, 1.0, 20.0);
  const bool exact = be.l_low == -0.1 && be.l_high == 6.0 / 42.0;
  const ExperimentConfig cfg = load_experiment_config(kConfigs / "sandwich.json");
  const SandwichReport rep = run_sandwich_experiment(cfg);
  std::size_t inside = 0;
  for (const auto& r : rep.rows) inside += r.inside ? 1 : 0;
  return {exact && rep.pass && rep.rows.size() == 10,
          "bounds (" + fmt(be.l_low, 6) + ", " + fmt(be.l_high, 6) + ")" + (exact ? " exact" : " MISMATCH") + ", " +
              std::to_string(inside) + "/" + std::to_string(rep.rows.size()) + " estimates inside the envelope"};
}

Outcome quantile_rate() {
  const ContinuousLaw u = ContinuousLaw::uniform();
  const GridFunction phi = GridFunction::constant(linspace(0.25, 0.75, 51), -1.0);
  const double r2 = rate_Iq(u, 0.25, 0.75, phi, 100);
  const double r3 = rate_Iq(u, 0.25, 0.75, phi, 1000);
  const double r4 = rate_Iq(u, 0.25, 0.75, phi, 10000);
  const double d1 = std::abs(r2 - r3), d2 = std::abs(r3 - r4);
  const double ratio = d2 > 0.0 ? d1 / d2 : INFINITY;
  const bool pass = std::abs(r3 - 0.5) <= 0.005 && ratio >= 4.0;
  return {pass, "I_q at 1e2/1e3/1e4: " + fmt(r2, 7) + ", " + fmt(r3, 7) + ", " + fmt(r4, 7) +
                    "; difference ratio " + fmt(ratio, 3)};
}

Outcome invariant_suites() {
  using Suite = std::vector<checks::SuiteResult> (*)(std::size_t, std::uint64_t);
  const Suite suites[] = {checks::measures_properties, checks::rate_properties,        checks::zones_properties,
                          checks::simulate_properties, checks::functionals_properties, checks::experiments_properties};
  Outcome o{true, ""};
  std::size_t count = 0;
  std::uint64_t seed = 1100;
  for (Suite s : suites) {
    for (const auto& r : s(1000, ++seed)) {
      ++count;
      if (!r.pass || r.instances < 1000) {
        o.pass = false;
        o.detail += checks::describe(r) + "; ";
      }
    }
  }
  o.detail += std::to_string(count) + " suites at >= 1000 instances";
  return o;
}

}  // namespace

int main() {
  bool all = true;
  all &= run_criterion("C1", "oracle equivalence", oracle_equivalence);
  all &= run_criterion("C2", "rate solver", rate_solver);
  all &= run_criterion("C3", "conditional decay", conditional_decay);
  all &= run_criterion("C4", "joint additivity", joint_additivity);
  all &= run_criterion("C5", "instability", instability);
  all &= run_criterion("C6", "sandwich", sandwich);
  all &= run_criterion("C7", "quantile rate benchmark", quantile_rate);
  all &= run_criterion("C8", "invariant suites", invariant_suites);
  return all ? 0 : 1;
}
