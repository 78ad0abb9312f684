#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "incmom/analytic.hpp"
#include "incmom/bootstrap.hpp"
#include "incmom/errors.hpp"
#include "incmom/estimators.hpp"
#include "incmom/normal.hpp"
#include "incmom/rng.hpp"
#include "incmom/summation.hpp"

namespace incmom {

/// n i.i.d. draws by inverse CDF from the given engine.
[[nodiscard]] inline std::vector<double> draw_values(const DistributionModel& model, std::size_t n,
                                                     rng::Engine& eng) {
  std::vector<double> xs(n);
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        for (double& x : xs) {
          const double u = rng::open_uniform(eng);
          if constexpr (std::is_same_v<T, LogNormal>) {
            x = std::exp(d.mu_ln + d.sigma_ln * normal::quantile(u));
          } else if constexpr (std::is_same_v<T, Exponential>) {
            // -log(u) has the same law as -log(1 - u) and keeps full precision
            x = -std::log(u) / d.lambda;
          } else {
            x = u * d.upper;
          }
        }
      },
      model.family());
  return xs;
}

[[nodiscard]] inline Sample sample_from(const DistributionModel& model, std::size_t n,
                                        rng::Engine& eng) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "sample_from needs n >= 2");
  return Sample(draw_values(model, n, eng));
}

struct SimulationConfig {
  DistributionModel model = DistributionModel::exponential(1.0);
  std::size_t n = 2000;
  double p = 0.75;
  std::size_t replications = 2000;
  std::size_t bootstrap_b = 200;
  std::uint64_t seed = 7;
  std::vector<VarianceMethod> methods = {VarianceMethod::Proposed, VarianceMethod::FixedQ,
                                         VarianceMethod::Bootstrap};
  double level = 0.95;
  // 0 picks hardware concurrency. Reports do not depend on it.
  unsigned threads = 0;

  [[nodiscard]] bool wants(VarianceMethod m) const {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
  }

  void validate() const {
    require_probability(p);
    require_probability(level, "level");
    if (replications < 100) {
      throw Error(ErrorCode::InvalidArgument, "coverage estimates need at least 100 replications");
    }
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "n must be at least 2");
    if (quantile_rank(n, p) == 0) {
      throw Error(ErrorCode::QuantileIndexZero, "floor(n*p) = 0 for the configured n and p");
    }
    if (wants(VarianceMethod::Bootstrap) && bootstrap_b < 2) {
      throw Error(ErrorCode::InvalidArgument, "bootstrap needs b >= 2");
    }
    if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "no variance methods requested");
  }
};

struct MethodSummary {
  double mean_variance = 0.0;
  double relative_bias = 0.0;  // (mean V-hat - V) / V
  double coverage = 0.0;
  double mean_runtime_ms = 0.0;
};

struct SimulationReport {
  std::string model_label;
  std::string family;
  std::size_t n = 0;
  double p = 0.0;
  std::size_t replications = 0;
  std::size_t bootstrap_b = 0;
  std::uint64_t seed = 0;
  double level = 0.95;
  double true_m = 0.0;
  double true_variance = 0.0;      // Monte Carlo variance of the L point estimates
  double analytic_variance = 0.0;  // population E(Y - qZ)^2 / (n mu^2)
  double mean_m_hat = 0.0;
  std::map<VarianceMethod, MethodSummary> methods;
};

namespace detail {

struct Replicate {
  double m_hat = 0.0;
  std::map<VarianceMethod, double> variance;
  std::map<VarianceMethod, bool> covered;
  std::map<VarianceMethod, double> runtime_ms;
};

template <typename Fn>
double time_ms(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

inline double compute_variance(VarianceMethod method, const Sample& sample, const ShareEstimate& est,
                               const ShareQuery& query, std::size_t b, std::uint64_t boot_seed) {
  switch (method) {
    case VarianceMethod::Proposed: return variance_proposed(sample, est);
    case VarianceMethod::FixedQ: return variance_fixed_q(sample, est);
    case VarianceMethod::BeachDavidson: return variance_beach_davidson(sample, est);
    case VarianceMethod::Bootstrap: return variance_bootstrap(sample, query, ResamplePlan{b, boot_seed, 1});
  }
  return 0.0;
}

}  // namespace detail

/// Repeats draw -> estimate -> variances -> Wald CI L times and aggregates
/// relative bias and coverage per method. Replication r uses streams keyed by
/// (seed, r), and aggregation runs in replication order, so the report is
/// the same for any thread count (apart from the runtime fields).
[[nodiscard]] inline SimulationReport run_simulation(const SimulationConfig& config) {
  config.validate();
  const double true_m = population_share(config.model, config.p);
  const ShareQuery query = ShareQuery::estimated(config.p);
  const double z = normal::critical_value(config.level);

  std::vector<detail::Replicate> reps(config.replications);
  detail::parallel_for(config.replications, config.threads, [&](std::size_t r, unsigned) {
    auto eng = rng::make_engine(config.seed, rng::Stream::Sample, r);
    const Sample sample = sample_from(config.model, config.n, eng);
    const std::uint64_t boot_seed =
        rng::derive_key(config.seed, {static_cast<std::uint64_t>(rng::Stream::Bootstrap), r});
    ShareEstimate est = estimate_share(sample, query);
    detail::Replicate& rep = reps[r];
    rep.m_hat = est.m_hat;
    for (VarianceMethod m : config.methods) {
      double v = 0.0;
      rep.runtime_ms[m] = detail::time_ms([&] {
        v = detail::compute_variance(m, sample, est, query, config.bootstrap_b, boot_seed);
      });
      rep.variance[m] = v;
      const double half = z * std::sqrt(v);
      rep.covered[m] = (est.m_hat - half <= true_m) && (true_m <= est.m_hat + half);
    }
  });

  SimulationReport report;
  report.model_label = config.model.label();
  report.family = config.model.name();
  report.n = config.n;
  report.p = config.p;
  report.replications = config.replications;
  report.bootstrap_b = config.bootstrap_b;
  report.seed = config.seed;
  report.level = config.level;
  report.true_m = true_m;
  report.analytic_variance = population_variance_proposed(config.model, config.p, config.n);

  const auto L = static_cast<double>(config.replications);
  CompensatedSum sum_m;
  for (const auto& rep : reps) sum_m += rep.m_hat;
  report.mean_m_hat = sum_m.value() / L;
  CompensatedSum ss;
  for (const auto& rep : reps) ss += (rep.m_hat - report.mean_m_hat) * (rep.m_hat - report.mean_m_hat);
  report.true_variance = ss.value() / (L - 1.0);

  for (VarianceMethod m : config.methods) {
    CompensatedSum v, t;
    std::size_t covered = 0;
    for (const auto& rep : reps) {
      v += rep.variance.at(m);
      t += rep.runtime_ms.at(m);
      covered += rep.covered.at(m) ? 1 : 0;
    }
    MethodSummary s;
    s.mean_variance = v.value() / L;
    s.relative_bias = (s.mean_variance - report.true_variance) / report.true_variance;
    s.coverage = static_cast<double>(covered) / L;
    s.mean_runtime_ms = t.value() / L;
    report.methods[m] = s;
  }
  return report;
}

struct TimingReport {
  std::string model_label;
  std::size_t n = 0;
  std::size_t bootstrap_b = 0;
  std::size_t repeats = 0;
  std::map<VarianceMethod, double> mean_ms;

  /// Mean bootstrap time over mean proposed time; 0 when either is missing.
  [[nodiscard]] double bootstrap_ratio() const {
    const auto b = mean_ms.find(VarianceMethod::Bootstrap);
    const auto a = mean_ms.find(VarianceMethod::Proposed);
    if (b == mean_ms.end() || a == mean_ms.end() || !(a->second > 0.0)) return 0.0;
    return b->second / a->second;
  }
};

/// Wall-clock cost of each variance method, single-threaded, on freshly drawn
/// samples. Each timed call covers the whole pipeline from raw sample to
/// variance (quantile selection and point estimate included).
[[nodiscard]] inline TimingReport run_timing(const SimulationConfig& config, std::size_t repeats) {
  if (repeats < 10) throw Error(ErrorCode::InvalidArgument, "timing needs at least 10 repeats");
  require_probability(config.p);
  const ShareQuery query = ShareQuery::estimated(config.p);
  TimingReport report;
  report.model_label = config.model.label();
  report.n = config.n;
  report.bootstrap_b = config.bootstrap_b;
  report.repeats = repeats;

  std::map<VarianceMethod, double> total;
  volatile double sink = 0.0;
  for (std::size_t r = 0; r < repeats; ++r) {
    auto eng = rng::make_engine(config.seed, rng::Stream::Timing, r);
    const Sample sample = sample_from(config.model, config.n, eng);
    for (VarianceMethod m : config.methods) {
      total[m] += detail::time_ms([&] {
        const ShareEstimate est = estimate_share(sample, query);
        sink = sink + detail::compute_variance(m, sample, est, query, config.bootstrap_b, config.seed + r);
      });
    }
  }
  for (const auto& [m, t] : total) report.mean_ms[m] = t / static_cast<double>(repeats);
  return report;
}

}  // namespace incmom
