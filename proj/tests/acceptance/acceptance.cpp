// Acceptance gate: one PASS/FAIL/SKIP line per criterion, with the measured
// numbers underneath. Exit status is non-zero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "incmom/incmom.hpp"
#include "oracles.hpp"

using namespace incmom;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Criterion {
  Criterion(int id_, std::string title_) : id(id_), title(std::move(title_)) {}

  int id;
  std::string title;
  Verdict verdict = Verdict::Pass;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    notes.push_back(std::string(ok ? "ok   " : "MISS ") + what);
    if (!ok) verdict = Verdict::Fail;
  }
  void info(const std::string& what) { notes.push_back("     " + what); }
};

std::vector<Criterion> results;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void report(Criterion c) {
  const char* tag = c.verdict == Verdict::Pass ? "PASS" : c.verdict == Verdict::Fail ? "FAIL" : "SKIP";
  std::printf("[%s] criterion %d: %s\n", tag, c.id, c.title.c_str());
  for (const auto& n : c.notes) std::printf("         %s\n", n.c_str());
  std::fflush(stdout);
  results.push_back(std::move(c));
}

bool within_rel(double got, double want, double tol) { return std::abs(got / want - 1.0) <= tol; }

// --------------------------------------------------------------------------

void criterion_1() {
  Criterion c{1, "hand oracle on [1,2,3,4], p = 0.5"};
  const Sample s({1.0, 2.0, 3.0, 4.0});
  const auto est = estimate_share(s, 0.5);
  const double vp = variance_proposed(s, est);
  const double vf = variance_fixed_q(s, est);
  c.check(std::abs(est.q_hat - 2.0) <= 1e-12, fmt("q_hat = %.17g (want 2)", est.q_hat));
  c.check(std::abs(est.m_hat - 0.3) <= 1e-12, fmt("m_hat = %.17g (want 0.3)", est.m_hat));
  c.check(std::abs(vp - 0.0030) <= 1e-12, fmt("proposed variance = %.17g (want 0.0030)", vp));
  c.check(std::abs(vf - 0.047) <= 1e-12, fmt("fixed-q variance = %.17g (want 0.047)", vf));
  report(std::move(c));
}

struct TableRow {
  DistributionModel model;
  std::size_t n;
  double v;
};

void criterion_2() {
  Criterion c{2, "population oracles against the simulated reference variances"};
  const double ln_share = population_share(DistributionModel::log_normal(0.4, 0.5), 0.75);
  c.check(std::abs(ln_share - 0.57) <= 0.005, fmt("m for LN(0.4, 0.5) = %.6f (reference 0.57)", ln_share));
  for (double lambda : {0.5, 1.0, 2.0}) {
    const double e = population_share(DistributionModel::exponential(lambda), 0.75);
    c.check(std::abs(e - 0.40) <= 0.005, fmt("m for Exp(%g) = %.6f (reference 0.40)", lambda, e));
  }

  const auto ln1 = DistributionModel::log_normal(0.4, 0.5);
  const auto ln2 = DistributionModel::log_normal(-0.3, 1.0);
  const auto ln3 = DistributionModel::log_normal(0.6, 0.5);
  const auto e05 = DistributionModel::exponential(0.5);
  const auto e1 = DistributionModel::exponential(1.0);
  const auto e2 = DistributionModel::exponential(2.0);
  const std::vector<TableRow> rows{
      {ln1, 2000, 1.50e-5}, {ln1, 5000, 6.10e-6}, {ln1, 10000, 3.02e-6},
      {ln2, 2000, 7.33e-5}, {ln2, 5000, 3.09e-5}, {ln2, 10000, 1.54e-5},
      {ln3, 2000, 1.52e-5}, {ln3, 5000, 6.09e-6}, {ln3, 10000, 2.96e-6},
      {e05, 2000, 4.06e-5}, {e05, 5000, 1.61e-5}, {e05, 10000, 8.01e-6},
      {e1, 2000, 4.05e-5},  {e1, 5000, 1.58e-5},  {e1, 10000, 8.08e-6},
      {e2, 2000, 4.18e-5},  {e2, 5000, 1.64e-5},  {e2, 10000, 8.11e-6},
  };
  for (const auto& r : rows) {
    const double v = population_variance_proposed(r.model, 0.75, r.n);
    const double dev = v / r.v - 1.0;
    c.check(std::abs(dev) <= 0.03, fmt("%-13s n=%-5zu V = %.4e  reference %.2e  (%+.2f%%)", r.model.label().c_str(),
                                       r.n, v, r.v, 100.0 * dev));
  }
  if (c.verdict == Verdict::Fail) {
    c.info("the reference variances are themselves Monte Carlo estimates; the three exponential rows at");
    c.info("each n estimate the same scale-free quantity and spread by up to 3.8% among themselves");
  }
  report(std::move(c));
}

struct CoverageRuns {
  SimulationReport exp;
  SimulationReport ln;
};

CoverageRuns coverage_runs() {
  SimulationConfig cfg;
  cfg.n = 2000;
  cfg.p = 0.75;
  cfg.replications = 2000;
  cfg.bootstrap_b = 200;
  cfg.seed = 7;
  cfg.threads = 0;
  cfg.methods = {VarianceMethod::Proposed, VarianceMethod::FixedQ, VarianceMethod::Bootstrap};
  CoverageRuns out;
  cfg.model = DistributionModel::exponential(1.0);
  out.exp = run_simulation(cfg);
  cfg.model = DistributionModel::log_normal(0.4, 0.5);
  out.ln = run_simulation(cfg);
  return out;
}

void describe(Criterion& c, const SimulationReport& r) {
  c.info(fmt("%s: true m %.4f, mean m_hat %.4f, MC variance %.4e, analytic %.4e", r.model_label.c_str(), r.true_m,
             r.mean_m_hat, r.true_variance, r.analytic_variance));
}

void criterion_3(const CoverageRuns& runs) {
  Criterion c{3, "coverage at n = 2000, p = 0.75, L = 2000, b = 200, seed 7"};
  for (const auto* r : {&runs.exp, &runs.ln}) {
    describe(c, *r);
    const double cp = r->methods.at(VarianceMethod::Proposed).coverage;
    const double cb = r->methods.at(VarianceMethod::Bootstrap).coverage;
    const double cf = r->methods.at(VarianceMethod::FixedQ).coverage;
    c.check(cp >= 0.94 && cp <= 0.96, fmt("%s proposed coverage %.4f in [0.94, 0.96]", r->model_label.c_str(), cp));
    c.check(cb >= 0.94 && cb <= 0.96, fmt("%s bootstrap coverage %.4f in [0.94, 0.96]", r->model_label.c_str(), cb));
    c.check(cf >= 0.999, fmt("%s fixed-q coverage %.4f >= 0.999", r->model_label.c_str(), cf));
  }
  report(std::move(c));
}

void criterion_4(const CoverageRuns& runs) {
  Criterion c{4, "relative bias on the same runs"};
  struct Band {
    const SimulationReport* r;
    double lo, hi;
  };
  for (const Band& b : {Band{&runs.exp, 3.50, 4.20}, Band{&runs.ln, 9.50, 11.50}}) {
    const auto& m = b.r->methods;
    const double bp = m.at(VarianceMethod::Proposed).relative_bias;
    const double bb = m.at(VarianceMethod::Bootstrap).relative_bias;
    const double bf = m.at(VarianceMethod::FixedQ).relative_bias;
    const char* name = b.r->model_label.c_str();
    c.check(std::abs(bp) <= 0.05, fmt("%s proposed relative bias %+.2f%% within 5%%", name, 100 * bp));
    c.check(std::abs(bb) <= 0.05, fmt("%s bootstrap relative bias %+.2f%% within 5%%", name, 100 * bb));
    c.check(bf >= b.lo && bf <= b.hi,
            fmt("%s fixed-q relative bias %.2f%% in [%.0f%%, %.0f%%]", name, 100 * bf, 100 * b.lo, 100 * b.hi));
  }
  // Diagnostics only. The denominator above is the Monte Carlo variance of L
  // point estimates, whose own relative SE is about sqrt(2 / (L - 1)).
  for (const auto* r : {&runs.exp, &runs.ln}) {
    const double L = static_cast<double>(r->replications);
    const double z = (r->true_variance / r->analytic_variance - 1.0) / std::sqrt(2.0 / (L - 1.0));
    c.info(fmt("%s: MC variance is %+.2f%% off the analytic value (%+.2f SE)", r->model_label.c_str(),
               100 * (r->true_variance / r->analytic_variance - 1.0), z));
    for (VarianceMethod m : {VarianceMethod::Proposed, VarianceMethod::Bootstrap}) {
      const double against = r->methods.at(m).mean_variance / r->analytic_variance - 1.0;
      c.info(fmt("%s: %s bias against the analytic variance %+.2f%%", r->model_label.c_str(),
                 std::string(to_string(m)).c_str(), 100 * against));
    }
  }
  report(std::move(c));
}

void criterion_5(const CoverageRuns& runs) {
  Criterion c{5, "analytic variance gap for Exp(1), p = 0.75"};
  const auto model = DistributionModel::exponential(1.0);
  const double vp = population_variance_proposed(model, 0.75, 1);
  const double vf = population_variance_fixed_q(model, 0.75, 1);
  const double ratio = (vf - vp) / vp;
  c.check(within_rel(ratio, 3.79, 0.02), fmt("(V_fixed - V_proposed) / V_proposed = %.4f (want 3.79 within 2%%)", ratio));
  const double gap = variance_gap(model, 0.75, 1);
  c.check(oracle::rel_err(gap, vf - vp) <= 1e-10, fmt("gap formula %.10f vs difference %.10f", gap, vf - vp));
  const double mc = runs.exp.methods.at(VarianceMethod::FixedQ).relative_bias;
  c.check(ratio >= 3.50 && ratio <= 4.20 && std::abs(ratio - mc) <= 0.35,
          fmt("Monte Carlo fixed-q relative bias %.4f; analytic %.4f inside the same band", mc, ratio));
  report(std::move(c));
}

void criterion_6() {
  Criterion c{6, "algebraic identities"};
  std::mt19937_64 eng(6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double p, m, mu, q;
    do p = unit(eng); while (p == 0.0);
    do m = unit(eng); while (m == 0.0);
    do mu = 10 * unit(eng); while (mu == 0.0);
    do q = 10 * unit(eng); while (q == 0.0);
    const double g = m * mu / p;
    const double t1 = mu * mu * m * m, t2 = (2 * m - 1) * p * g * g, t3 = p * (1 - p) * q * q,
                 t4 = 2 * q * m * (1 - m) * mu;
    const double r1 = p * (1 - p) * (g - q) * (g - q), r2 = 2 * p * m * (q - g) * (mu - g);
    const double scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3), std::abs(t4), std::abs(r1),
                                   std::abs(r2), 1.0});
    worst = std::max(worst, std::abs((t1 - t2 + t3 - t4) - (r1 - r2)) / scale);
  }
  c.check(worst <= 1e-10, fmt("conditional-mean identity, 10^4 draws: worst scaled error %.2e", worst));

  for (const auto& model : {DistributionModel::exponential(1.0), DistributionModel::uniform(1.0)}) {
    for (double p : {0.25, 0.5, 0.75}) {
      const double q = population_quantile(model, p);
      const auto quad = oracle::by_quadrature(model, p, q);
      const double bd = population_variance_beach_davidson(model, p, 1);
      const double target = quad.e_resid2 / (quad.mu * quad.mu);
      const double err = oracle::rel_err(bd, target);
      c.check(err <= 1e-8, fmt("%s p=%.2f: Beach-Davidson %.12f vs E(Y-qZ)^2/mu^2 %.12f (rel %.1e)",
                               model.label().c_str(), p, bd, target, err));
    }
  }
  const auto e1 = DistributionModel::exponential(1.0);
  for (double p : {0.25, 0.5, 0.75}) {
    const auto quad = oracle::by_quadrature(e1, p, population_quantile(e1, p));
    const double m = population_share(e1, p);
    const double err = oracle::rel_err(quad.e_yz, m * (1 - m) * e1.mean());
    c.check(err <= 1e-8, fmt("Exp(1) p=%.2f: E(YZ) by quadrature vs m(1-m)mu (rel %.1e)", p, err));
  }
  report(std::move(c));
}

void criterion_7() {
  Criterion c{7, "positivity of the variance gap"};
  c.check(h_function(0.0) == 0.0, "h(0) == 0 exactly");
  double min_h = INFINITY;
  int points = 0;
  for (int i = 0; i <= 10000; ++i) {
    const double t = std::pow(10.0, -6.0 + i * (std::log10(50.0) + 6.0) / 10000.0);
    min_h = std::min(min_h, h_function(t));
    ++points;
  }
  c.check(min_h >= 0.0, fmt("h(t) >= 0 on a %d-point log grid over [1e-6, 50] (min %.3e)", points, min_h));
  double worst = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double p = i / 10.0;
    const double want = 4 * std::pow(p, 4) * (1 - p) / 1000.0;
    worst = std::max(worst, oracle::rel_err(variance_gap(DistributionModel::uniform(1.0), p, 1000), want));
  }
  c.check(worst <= 1e-12, fmt("uniform gap vs 4p^4(1-p)/n, p = 0.1..0.9: worst rel error %.1e", worst));
  report(std::move(c));
}

void criterion_8() {
  Criterion c{8, "64-shard streaming merge equals batch on 10^5 points"};
  std::uint64_t seed = 800;
  for (const auto& model : {DistributionModel::exponential(1.0), DistributionModel::log_normal(0.4, 0.5),
                            DistributionModel::uniform(1.0)}) {
    auto eng = rng::make_engine(++seed, rng::Stream::Sample, 0);
    const auto xs = draw_values(model, 100000, eng);
    const Sample s(xs);
    const auto batch = estimate_share(s, 0.75);
    SufficientStats total(batch.q_hat, 0.75);
    const std::size_t shard = (xs.size() + 63) / 64;
    for (std::size_t start = 0; start < xs.size(); start += shard) {
      const std::size_t len = std::min(shard, xs.size() - start);
      total.merge(summarize(std::span(xs).subspan(start, len), batch.q_hat, 0.75));
    }
    const auto merged = total.finalize();
    const double em = oracle::rel_err(merged.m_hat, batch.m_hat);
    const double ep = oracle::rel_err(merged.variance(VarianceMethod::Proposed), variance_proposed(s, batch));
    const double ef = oracle::rel_err(merged.variance(VarianceMethod::FixedQ), variance_fixed_q(s, batch));
    c.check(std::max({em, ep, ef}) <= 1e-12, fmt("%s: rel errors m %.1e, proposed %.1e, fixed-q %.1e",
                                                model.label().c_str(), em, ep, ef));
  }
  report(std::move(c));
}

void criterion_9() {
  Criterion c{9, "closed-form variance at least 50x faster than a b = 200 bootstrap at n = 10^4"};
  for (const auto& model : {DistributionModel::log_normal(0.4, 0.5), DistributionModel::exponential(1.0)}) {
    SimulationConfig cfg;
    cfg.model = model;
    cfg.n = 10000;
    cfg.bootstrap_b = 200;
    cfg.seed = 9;
    cfg.methods = {VarianceMethod::Proposed, VarianceMethod::Bootstrap};
    const auto t = run_timing(cfg, 100);
    const double ratio = t.bootstrap_ratio();
    c.check(ratio >= 50.0, fmt("%s: proposed %.4f ms, bootstrap %.3f ms, ratio %.1f", model.label().c_str(),
                               t.mean_ms.at(VarianceMethod::Proposed), t.mean_ms.at(VarianceMethod::Bootstrap),
                               ratio));
  }
  report(std::move(c));
}

void criterion_10() {
  Criterion c{10, "wage data: urban vs suburb shares of the bottom 75%"};
  std::filesystem::path path = std::filesystem::path(INCMOM_DATA_DIR) / "CPS1988.csv";
  if (const char* env = std::getenv("INCMOM_CPS1988")) path = env;
  if (!std::filesystem::exists(path)) {
    c.verdict = Verdict::Skip;
    c.info("data set not found at " + path.string() + " (run tools/fetch_cps1988.sh)");
    report(std::move(c));
    return;
  }
  csv::DatasetSpec spec;
  spec.path = path;
  spec.value_column = "wage";
  spec.group_column = "smsa";
  const auto data = csv::parse_csv(spec);
  const auto r = compare_groups(data, 0.75, 0.95, std::pair<std::string, std::string>{"yes", "no"});
  const auto& yes = r.rows[0].estimate;
  const auto& no = r.rows[1].estimate;
  c.info(fmt("group sizes %zu and %zu", yes.n, no.n));
  c.check(std::abs(yes.m_hat - 0.541) <= 0.005, fmt("urban m_hat %.4f (reference 0.541)", yes.m_hat));
  c.check(std::abs(no.m_hat - 0.530) <= 0.005, fmt("suburb m_hat %.4f (reference 0.530)", no.m_hat));
  struct V {
    const char* label;
    double got, want;
  };
  for (const V& v : {V{"urban proposed", yes.variance(VarianceMethod::Proposed), 3.34e-6},
                     V{"urban fixed-q", yes.variance(VarianceMethod::FixedQ), 1.96e-5},
                     V{"suburb proposed", no.variance(VarianceMethod::Proposed), 1.42e-5},
                     V{"suburb fixed-q", no.variance(VarianceMethod::FixedQ), 6.01e-5}}) {
    c.check(within_rel(v.got, v.want, 0.10), fmt("%s variance %.4e (reference %.2e)", v.label, v.got, v.want));
  }
  c.check(std::abs(r.proposed.t_statistic - 2.59) <= 0.1,
          fmt("t with proposed variance %.4f (text 2.59), two-sided p %.4f", r.proposed.t_statistic,
              r.proposed.p_value_two_sided));
  c.check(std::abs(r.fixed_q.t_statistic - 1.22) <= 0.1,
          fmt("t with fixed-q variance %.4f (text 1.22), one-sided p %.4f", r.fixed_q.t_statistic,
              r.fixed_q.p_value_one_sided));
  report(std::move(c));
}

}  // namespace

int main() {
  try {
    criterion_1();
    criterion_2();
    const CoverageRuns runs = coverage_runs();
    criterion_3(runs);
    criterion_4(runs);
    criterion_5(runs);
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
  } catch (const std::exception& e) {
    std::printf("[FAIL] aborted: %s\n", e.what());
    return 1;
  }
  int pass = 0, fail = 0, skip = 0;
  for (const auto& c : results) {
    (c.verdict == Verdict::Pass ? pass : c.verdict == Verdict::Fail ? fail : skip)++;
  }
  std::printf("\n%d passed, %d failed, %d skipped\n", pass, fail, skip);
  return fail == 0 ? 0 : 1;
}
