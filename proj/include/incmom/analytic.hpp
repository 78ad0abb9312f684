#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <variant>

#include "incmom/errors.hpp"
#include "incmom/estimators.hpp"
#include "incmom/normal.hpp"
#include "incmom/sample.hpp"

// Closed-form population quantities for the log-normal, exponential and
// uniform families. These are the ground truth used by the simulation harness
// and by the tests.

namespace incmom {

/// LN(mu_ln, sigma_ln): log X ~ N(mu_ln, sigma_ln^2). The log-scale parameters
/// are deliberately not called mu/sigma, which name the mean and variance of X.
struct LogNormal {
  double mu_ln = 0.0;
  double sigma_ln = 1.0;
};

struct Exponential {
  double lambda = 1.0;
};

/// Unif(0, upper).
struct Uniform {
  double upper = 1.0;
};

namespace detail {

// Regularised lower incomplete gamma P(a, t) for integer a, stable near 0
// where the textbook 1 - e^{-t} sum_{k<a} t^k/k! cancels.
[[nodiscard]] inline double lower_gamma_int(int a, double t) noexcept {
  if (t <= 0.0) return 0.0;
  if (t < 1.0) {
    double term = std::exp(-t);
    for (int k = 1; k <= a; ++k) term *= t / k;
    double sum = term;
    for (int k = a + 1; k < a + 60; ++k) {
      term *= t / k;
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return sum;
  }
  double term = 1.0;
  double partial = 1.0;
  for (int k = 1; k < a; ++k) {
    term *= t / k;
    partial += term;
  }
  return 1.0 - std::exp(-t) * partial;
}

}  // namespace detail

class DistributionModel {
 public:
  using Family = std::variant<LogNormal, Exponential, Uniform>;

  static DistributionModel log_normal(double mu_ln, double sigma_ln) {
    if (!(sigma_ln > 0.0) || !std::isfinite(mu_ln) || !std::isfinite(sigma_ln)) {
      throw Error(ErrorCode::InvalidArgument, "log-normal needs finite mu and sigma > 0");
    }
    return DistributionModel(LogNormal{mu_ln, sigma_ln});
  }
  static DistributionModel exponential(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw Error(ErrorCode::InvalidArgument, "exponential needs lambda > 0");
    }
    return DistributionModel(Exponential{lambda});
  }
  static DistributionModel uniform(double upper) {
    if (!(upper > 0.0) || !std::isfinite(upper)) {
      throw Error(ErrorCode::InvalidArgument, "uniform needs an upper bound > 0");
    }
    return DistributionModel(Uniform{upper});
  }

  [[nodiscard]] const Family& family() const noexcept { return family_; }

  [[nodiscard]] std::string name() const {
    return std::visit(
        [](const auto& d) -> std::string {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, LogNormal>) return "lognormal";
          else if constexpr (std::is_same_v<T, Exponential>) return "exponential";
          else return "uniform";
        },
        family_);
  }

  /// Short human-readable label such as "LN(0.4, 0.5)".
  [[nodiscard]] std::string label() const;

  [[nodiscard]] double quantile(double p) const {
    return std::visit(
        [p](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, LogNormal>) {
            return std::exp(d.mu_ln + d.sigma_ln * normal::quantile(p));
          } else if constexpr (std::is_same_v<T, Exponential>) {
            return -std::log1p(-p) / d.lambda;
          } else {
            return p * d.upper;
          }
        },
        family_);
  }

  [[nodiscard]] double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    return std::visit(
        [x](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, LogNormal>) {
            return normal::cdf((std::log(x) - d.mu_ln) / d.sigma_ln);
          } else if constexpr (std::is_same_v<T, Exponential>) {
            return -std::expm1(-d.lambda * x);
          } else {
            return x >= d.upper ? 1.0 : x / d.upper;
          }
        },
        family_);
  }

  [[nodiscard]] double pdf(double x) const {
    if (x <= 0.0) return 0.0;
    return std::visit(
        [x](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, LogNormal>) {
            return normal::pdf((std::log(x) - d.mu_ln) / d.sigma_ln) / (x * d.sigma_ln);
          } else if constexpr (std::is_same_v<T, Exponential>) {
            return d.lambda * std::exp(-d.lambda * x);
          } else {
            return x < d.upper ? 1.0 / d.upper : 0.0;
          }
        },
        family_);
  }

  [[nodiscard]] double mean() const {
    return std::visit(
        [](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, LogNormal>) {
            return std::exp(d.mu_ln + 0.5 * d.sigma_ln * d.sigma_ln);
          } else if constexpr (std::is_same_v<T, Exponential>) {
            return 1.0 / d.lambda;
          } else {
            return 0.5 * d.upper;
          }
        },
        family_);
  }

  /// E X^2.
  [[nodiscard]] double second_moment() const {
    return std::visit(
        [](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, LogNormal>) {
            return std::exp(2.0 * d.mu_ln + 2.0 * d.sigma_ln * d.sigma_ln);
          } else if constexpr (std::is_same_v<T, Exponential>) {
            return 2.0 / (d.lambda * d.lambda);
          } else {
            return d.upper * d.upper / 3.0;
          }
        },
        family_);
  }

  [[nodiscard]] double variance() const {
    const double mu = mean();
    return second_moment() - mu * mu;
  }

  /// E[X^k 1{X <= F^{-1}(p)}] for k = 1, 2, evaluated at the p-quantile.
  /// Parameterised by p rather than q so the log-normal case can use
  /// Phi^{-1}(p) directly instead of round-tripping through log(exp(.)).
  [[nodiscard]] double partial_moment_at(int k, double p) const {
    return std::visit(
        [k, p](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, LogNormal>) {
            const double s = d.sigma_ln;
            const double z = normal::quantile(p);
            const double kk = static_cast<double>(k);
            return std::exp(kk * d.mu_ln + 0.5 * kk * kk * s * s) * normal::cdf(z - kk * s);
          } else if constexpr (std::is_same_v<T, Exponential>) {
            const double t = -std::log1p(-p);
            // E[X^k 1{X<=q}] = k!/lambda^k P(k+1, lambda q)
            const double scale = k == 1 ? 1.0 / d.lambda : 2.0 / (d.lambda * d.lambda);
            return scale * detail::lower_gamma_int(k + 1, t);
          } else {
            const double q = p * d.upper;
            return k == 1 ? q * q / (2.0 * d.upper) : q * q * q / (3.0 * d.upper);
          }
        },
        family_);
  }

 private:
  explicit DistributionModel(Family f) : family_(f) {}
  Family family_;
};

inline std::string DistributionModel::label() const {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        auto fmt = [](double v) {
          std::string s = std::to_string(v);
          while (!s.empty() && s.back() == '0') s.pop_back();
          if (!s.empty() && s.back() == '.') s.pop_back();
          return s;
        };
        if constexpr (std::is_same_v<T, LogNormal>) {
          return "LN(" + fmt(d.mu_ln) + ", " + fmt(d.sigma_ln) + ")";
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return "Exp(" + fmt(d.lambda) + ")";
        } else {
          return "Unif(0, " + fmt(d.upper) + ")";
        }
      },
      family_);
}

/// Population quantities entering the asymptotic variances at a given p.
struct PopulationMoments {
  double p = 0.0;
  double q = 0.0;
  double mu = 0.0;        // E X
  double second = 0.0;    // E X^2
  double below1 = 0.0;    // E[X 1{X<=q}]
  double below2 = 0.0;    // E[X^2 1{X<=q}]
  double m = 0.0;         // below1 / mu
  double density = 0.0;   // f(q)
  double e_y2 = 0.0;      // E Y^2
  double e_yz = 0.0;      // E YZ
  double e_z2 = 0.0;      // E Z^2
};

[[nodiscard]] inline PopulationMoments population_moments(const DistributionModel& model, double p) {
  require_probability(p);
  PopulationMoments pm;
  pm.p = p;
  pm.q = model.quantile(p);
  pm.mu = model.mean();
  pm.second = model.second_moment();
  pm.below1 = model.partial_moment_at(1, p);
  pm.below2 = model.partial_moment_at(2, p);
  pm.m = pm.below1 / pm.mu;
  pm.density = model.pdf(pm.q);
  // Y = X 1{X<=q} - m X, Z = 1{X<=q} - p
  pm.e_y2 = pm.m * pm.m * pm.second - (2.0 * pm.m - 1.0) * pm.below2;
  pm.e_yz = pm.m * (1.0 - pm.m) * pm.mu;
  pm.e_z2 = p * (1.0 - p);
  return pm;
}

[[nodiscard]] inline double population_quantile(const DistributionModel& model, double p) {
  require_probability(p);
  return model.quantile(p);
}

/// m(q) at q = F^{-1}(p).
[[nodiscard]] inline double population_share(const DistributionModel& model, double p) {
  require_probability(p);
  return model.partial_moment_at(1, p) / model.mean();
}

inline void require_positive_n(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
}

/// E{(Y - qZ)^2} / (n mu^2).
[[nodiscard]] inline double population_variance_proposed(const DistributionModel& model, double p,
                                                         std::size_t n) {
  require_positive_n(n);
  const PopulationMoments pm = population_moments(model, p);
  const double e = pm.e_y2 - 2.0 * pm.q * pm.e_yz + pm.q * pm.q * pm.e_z2;
  return e / (static_cast<double>(n) * pm.mu * pm.mu);
}

/// E Y^2 / (n mu^2): the asymptotic variance when q is known.
[[nodiscard]] inline double population_variance_fixed_q(const DistributionModel& model, double p,
                                                        std::size_t n) {
  require_positive_n(n);
  const PopulationMoments pm = population_moments(model, p);
  return pm.e_y2 / (static_cast<double>(n) * pm.mu * pm.mu);
}

/// Known-q variance minus estimated-q variance:
/// q [2 m (1 - m) mu - q p (1 - p)] / (n mu^2).
[[nodiscard]] inline double variance_gap(const DistributionModel& model, double p, std::size_t n) {
  require_positive_n(n);
  const PopulationMoments pm = population_moments(model, p);
  const double inner = 2.0 * pm.m * (1.0 - pm.m) * pm.mu - pm.q * p * (1.0 - p);
  return pm.q * inner / (static_cast<double>(n) * pm.mu * pm.mu);
}

/// Beach-Davidson variance evaluated with exact population moments.
[[nodiscard]] inline double population_variance_beach_davidson(const DistributionModel& model,
                                                               double p, std::size_t n) {
  require_positive_n(n);
  const PopulationMoments pm = population_moments(model, p);
  ConditionalMoments mom;
  mom.p = p;
  mom.q = pm.q;
  mom.mean = pm.mu;
  mom.var = pm.second - pm.mu * pm.mu;
  mom.cond_mean = pm.m * pm.mu / p;
  mom.cond_var = pm.below2 / p - mom.cond_mean * mom.cond_mean;
  return beach_davidson_formula(mom, static_cast<double>(n));
}

/// Asymptotic covariance of (m-hat, q-hat) divided by n.
[[nodiscard]] inline Matrix2 population_joint_covariance(const DistributionModel& model, double p,
                                                         std::size_t n) {
  require_positive_n(n);
  const PopulationMoments pm = population_moments(model, p);
  const double nn = static_cast<double>(n);
  const double f = pm.density;
  if (!(f > 0.0)) throw Error(ErrorCode::NonPositiveDensity, "population density at q is zero");
  const double off = -(pm.e_yz - pm.q * pm.e_z2) / (nn * pm.mu * f);
  Matrix2 b{};
  b[0][0] = population_variance_proposed(model, p, n);
  b[1][1] = pm.e_z2 / (nn * f * f);
  b[0][1] = off;
  b[1][0] = off;
  return b;
}

/// h(t) = 2(e^t - 1 - t)(1 + t) - t(e^t - 1). Non-negative on t >= 0; the
/// exponential-family variance gap equals t e^{-2t} h(t) / n with t = lambda q.
[[nodiscard]] inline double h_function(double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "h(t) is defined for t >= 0");
  if (t < 1e-4) {
    // 5t^3/6 + t^4/4 + 7t^5/120 + t^6/90 + O(t^7)
    return t * t * t * (5.0 / 6.0 + t * (0.25 + t * (7.0 / 120.0 + t / 90.0)));
  }
  const double em1 = std::expm1(t);
  return 2.0 * (em1 - t) * (1.0 + t) - t * em1;
}

}  // namespace incmom
