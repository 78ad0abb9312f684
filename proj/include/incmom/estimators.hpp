#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "incmom/errors.hpp"
#include "incmom/normal.hpp"
#include "incmom/sample.hpp"
#include "incmom/summation.hpp"

namespace incmom {

enum class VarianceMethod { Proposed, FixedQ, BeachDavidson, Bootstrap };

inline constexpr std::array<VarianceMethod, 4> kAllMethods = {
    VarianceMethod::Proposed, VarianceMethod::FixedQ, VarianceMethod::BeachDavidson,
    VarianceMethod::Bootstrap};

constexpr std::string_view to_string(VarianceMethod m) noexcept {
  switch (m) {
    case VarianceMethod::Proposed: return "proposed";
    case VarianceMethod::FixedQ: return "fixed_q";
    case VarianceMethod::BeachDavidson: return "beach_davidson";
    case VarianceMethod::Bootstrap: return "bootstrap";
  }
  return "unknown";
}

inline std::optional<VarianceMethod> parse_method(std::string_view s) noexcept {
  for (VarianceMethod m : kAllMethods) {
    if (s == to_string(m)) return m;
  }
  if (s == "bd") return VarianceMethod::BeachDavidson;
  if (s == "fixed") return VarianceMethod::FixedQ;
  return std::nullopt;
}

/// Point estimate of the bottom-p share plus whatever variance estimates have
/// been attached to it.
struct ShareEstimate {
  double p = 0.0;
  double m_hat = 0.0;
  double q_hat = 0.0;
  std::size_t n = 0;
  bool quantile_estimated = true;
  // All observations identical: the proposed variance is reported as 0.
  bool degenerate = false;
  std::map<VarianceMethod, double> variances;

  [[nodiscard]] bool has(VarianceMethod m) const { return variances.contains(m); }

  [[nodiscard]] double variance(VarianceMethod m) const {
    const auto it = variances.find(m);
    if (it == variances.end()) {
      throw Error(ErrorCode::MethodMissing,
                  "no " + std::string(to_string(m)) + " variance attached to this estimate");
    }
    return it->second;
  }
};

struct InfluenceTerms {
  std::vector<double> y;
  std::vector<double> z;
};

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  VarianceMethod method = VarianceMethod::Proposed;

  [[nodiscard]] bool contains(double value) const noexcept { return lower <= value && value <= upper; }
  [[nodiscard]] double width() const noexcept { return upper - lower; }
};

struct TwoSampleTest {
  double t_statistic = 0.0;
  double p_value_one_sided = 0.5;
  double p_value_two_sided = 1.0;
};

using Matrix2 = std::array<std::array<double, 2>, 2>;

/// Which p the Z terms are centred on: the requested one, or the realised
/// fraction of observations at or below q-hat.
enum class PCentering { Nominal, Empirical };

// ---------------------------------------------------------------------------
// Quantile
// ---------------------------------------------------------------------------

/// floor(n * p), the 1-based rank of the order statistic used as q-hat.
[[nodiscard]] inline std::size_t quantile_rank(std::size_t n, double p) {
  require_probability(p);
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * p));
}

/// The floor(n p)-th order statistic (1-based). No interpolation, no clamping:
/// a zero rank means the sample is too small for this p.
[[nodiscard]] inline double estimate_quantile(std::span<const double> values, double p) {
  const std::size_t k = quantile_rank(values.size(), p);
  if (k == 0) {
    throw Error(ErrorCode::QuantileIndexZero,
                "floor(n*p) = 0 for n = " + std::to_string(values.size()) +
                    "; the sample is too small for the requested p");
  }
  std::vector<double> scratch(values.begin(), values.end());
  auto kth = scratch.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(scratch.begin(), kth, scratch.end());
  return *kth;
}

[[nodiscard]] inline double estimate_quantile(const Sample& sample, double p) {
  return estimate_quantile(sample.values(), p);
}

// ---------------------------------------------------------------------------
// Point estimate
// ---------------------------------------------------------------------------

/// Ratio of the mass at or below q to the total mass.
[[nodiscard]] inline double share_below(std::span<const double> values, double q) {
  CompensatedSum below;
  CompensatedSum total;
  for (double x : values) {
    total += x;
    if (x <= q) below += x;
  }
  return below.value() / total.value();
}

[[nodiscard]] inline ShareEstimate estimate_share(const Sample& sample, const ShareQuery& query) {
  require_probability(query.p);
  ShareEstimate est;
  est.p = query.p;
  est.n = sample.size();
  est.quantile_estimated = query.quantile_estimated();
  est.q_hat = query.fixed_q ? *query.fixed_q : estimate_quantile(sample, query.p);
  est.m_hat = share_below(sample.values(), est.q_hat);
  est.degenerate = sample.is_constant();
  return est;
}

[[nodiscard]] inline ShareEstimate estimate_share(const Sample& sample, double p) {
  return estimate_share(sample, ShareQuery::estimated(p));
}

// ---------------------------------------------------------------------------
// Closed-form variances
// ---------------------------------------------------------------------------

/// Per-observation terms of the augmented estimating equation:
/// y_i = x_i 1{x_i <= q} - m x_i and z_i = 1{x_i <= q} - p.
[[nodiscard]] inline InfluenceTerms influence_terms(const Sample& sample, double m_hat, double q_hat,
                                                    double p) {
  InfluenceTerms terms;
  terms.y.reserve(sample.size());
  terms.z.reserve(sample.size());
  for (double x : sample.values()) {
    const bool below = x <= q_hat;
    terms.y.push_back((below ? x : 0.0) - m_hat * x);
    terms.z.push_back((below ? 1.0 : 0.0) - p);
  }
  return terms;
}

/// Fraction of observations at or below q.
[[nodiscard]] inline double empirical_fraction(std::span<const double> values, double q) noexcept {
  std::size_t count = 0;
  for (double x : values) count += (x <= q) ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(values.size());
}

/// Sandwich variance of m-hat(q-hat) accounting for the randomness in q-hat:
/// sum (y_i - q z_i)^2 / (sum x_i)^2.
[[nodiscard]] inline double variance_proposed(const Sample& sample, const ShareEstimate& est,
                                              PCentering centering = PCentering::Nominal) {
  if (est.degenerate) return 0.0;
  const double q = est.q_hat;
  const double m = est.m_hat;
  const double p = centering == PCentering::Nominal ? est.p : empirical_fraction(sample.values(), q);
  CompensatedSum ssq;
  CompensatedSum total;
  for (double x : sample.values()) {
    const bool below = x <= q;
    const double y = (below ? x : 0.0) - m * x;
    const double z = (below ? 1.0 : 0.0) - p;
    const double r = y - q * z;
    ssq += r * r;
    total += x;
  }
  const double s = total.value();
  return ssq.value() / (s * s);
}

/// Variance obtained by treating q-hat as the known population quantile:
/// sum y_i^2 / (sum x_i)^2.
[[nodiscard]] inline double variance_fixed_q(const Sample& sample, const ShareEstimate& est) {
  const double q = est.q_hat;
  const double m = est.m_hat;
  CompensatedSum ssq;
  CompensatedSum total;
  for (double x : sample.values()) {
    const double y = ((x <= q) ? x : 0.0) - m * x;
    ssq += y * y;
    total += x;
  }
  const double s = total.value();
  return ssq.value() / (s * s);
}

/// Plug-in moments feeding the conditional-moment (Beach-Davidson) formula.
struct ConditionalMoments {
  double p = 0.0;       // share of observations at or below q
  double mean = 0.0;    // mu
  double var = 0.0;     // sigma^2, 1/n normalisation
  double q = 0.0;
  double cond_mean = 0.0;  // gamma = E(X | X <= q)
  double cond_var = 0.0;   // epsilon^2 = V(X | X <= q)
};

[[nodiscard]] inline ConditionalMoments conditional_moments(const Sample& sample, double q) {
  CompensatedSum s_x, s_xx, s_xa, s_xxa;
  std::size_t below = 0;
  for (double x : sample.values()) {
    s_x += x;
    s_xx += x * x;
    if (x <= q) {
      ++below;
      s_xa += x;
      s_xxa += x * x;
    }
  }
  if (below == 0) {
    throw Error(ErrorCode::DegenerateConditional, "no observations at or below q");
  }
  const auto n = static_cast<double>(sample.size());
  const auto k = static_cast<double>(below);
  ConditionalMoments mom;
  mom.q = q;
  mom.p = k / n;
  mom.mean = s_x.value() / n;
  mom.var = s_xx.value() / n - mom.mean * mom.mean;
  mom.cond_mean = s_xa.value() / k;
  mom.cond_var = s_xxa.value() / k - mom.cond_mean * mom.cond_mean;
  return mom;
}

/// Beach-Davidson asymptotic variance of a Lorenz ordinate, written in terms of
/// the conditional mean gamma and conditional variance epsilon^2 below q.
[[nodiscard]] inline double beach_davidson_formula(const ConditionalMoments& mom, double n) {
  const double p = mom.p;
  const double mu = mom.mean;
  const double g = mom.cond_mean;
  const double w = p * g / mu;  // equals m
  const double bracket = mom.var * p * g * g / (mu * mu) + mom.cond_var * (1.0 - 2.0 * w) +
                         (1.0 - p) * (mom.q - g) * (mom.q - g) -
                         2.0 * w * (mom.q - g) * (mu - g);
  return p / (n * mu * mu) * bracket;
}

[[nodiscard]] inline double variance_beach_davidson(const Sample& sample, const ShareEstimate& est) {
  const ConditionalMoments mom = conditional_moments(sample, est.q_hat);
  return std::max(0.0, beach_davidson_formula(mom, static_cast<double>(sample.size())));
}

// ---------------------------------------------------------------------------
// Intervals and tests
// ---------------------------------------------------------------------------

/// Wald interval m-hat +/- z_{(1+level)/2} sqrt(V).
[[nodiscard]] inline ConfidenceInterval confidence_interval(const ShareEstimate& est,
                                                            VarianceMethod method,
                                                            double level = 0.95) {
  require_probability(level, "level");
  const double v = est.variance(method);
  const double half = normal::critical_value(level) * std::sqrt(std::max(0.0, v));
  return ConfidenceInterval{est.m_hat - half, est.m_hat + half, level, method};
}

/// Normal-approximation test of H0: m_a = m_b against m_a > m_b.
[[nodiscard]] inline TwoSampleTest two_sample_test(const ShareEstimate& a, const ShareEstimate& b,
                                                   VarianceMethod method) {
  if (a.p != b.p) {
    throw Error(ErrorCode::PMismatch, "the two estimates target different p");
  }
  const double va = a.variance(method);
  const double vb = b.variance(method);
  const double diff = a.m_hat - b.m_hat;
  TwoSampleTest out;
  if (diff == 0.0) {
    out.t_statistic = 0.0;
  } else {
    out.t_statistic = diff / std::sqrt(va + vb);
  }
  out.p_value_one_sided = normal::upper_tail(out.t_statistic);
  out.p_value_two_sided = 2.0 * normal::upper_tail(std::abs(out.t_statistic));
  return out;
}

// ---------------------------------------------------------------------------
// Joint covariance of (m-hat, q-hat)
// ---------------------------------------------------------------------------

/// Plug-in estimate of Cov(m-hat, q-hat) given the density f at q. The (1,1)
/// entry is the proposed variance and needs no density.
[[nodiscard]] inline Matrix2 joint_covariance(const Sample& sample, const ShareEstimate& est,
                                              double density_at_q) {
  if (!(density_at_q > 0.0) || !std::isfinite(density_at_q)) {
    throw Error(ErrorCode::NonPositiveDensity, "density at q must be positive and finite");
  }
  const double q = est.q_hat;
  const double m = est.m_hat;
  const double p = est.p;
  const double f = density_at_q;
  const auto n = static_cast<double>(sample.size());

  CompensatedSum s_yz, s_zz, s_x;
  for (double x : sample.values()) {
    const bool below = x <= q;
    const double y = (below ? x : 0.0) - m * x;
    const double z = (below ? 1.0 : 0.0) - p;
    s_yz += y * z;
    s_zz += z * z;
    s_x += x;
  }
  const double mu = s_x.value() / n;
  const double e_yz = s_yz.value() / n;
  const double e_zz = s_zz.value() / n;

  // Cross term of the sandwich: E[(Y - qZ)(-Z)] / (mu f).
  const double off = -(e_yz - q * e_zz) / (n * mu * f);
  Matrix2 cov{};
  cov[0][0] = variance_proposed(sample, est);
  cov[1][1] = p * (1.0 - p) / (n * f * f);
  cov[0][1] = off;
  cov[1][0] = off;
  return cov;
}

/// Gaussian kernel density at x with Silverman's bandwidth
/// 1.06 sigma-hat n^{-1/5}. Approximate; intended only as a fallback when no
/// analytic density is available.
[[nodiscard]] inline double kde_density(const Sample& sample, double x) {
  const auto n = static_cast<double>(sample.size());
  CompensatedSum s, ss;
  for (double v : sample.values()) {
    s += v;
    ss += v * v;
  }
  const double mean = s.value() / n;
  const double sd = std::sqrt(std::max(0.0, (ss.value() - n * mean * mean) / (n - 1.0)));
  if (!(sd > 0.0)) {
    throw Error(ErrorCode::NonPositiveDensity, "bandwidth is zero for a constant sample");
  }
  const double h = 1.06 * sd * std::pow(n, -0.2);
  CompensatedSum acc;
  for (double v : sample.values()) acc += normal::pdf((x - v) / h);
  return acc.value() / (n * h);
}

}  // namespace incmom
