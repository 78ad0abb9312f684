#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "incmom/errors.hpp"
#include "incmom/estimators.hpp"
#include "incmom/summation.hpp"

namespace incmom {

/// Mergeable summary of a data shard taken against a fixed threshold q.
///
/// Once q-hat is known (one pass over the full data, or a sort), every shard
/// can be reduced independently to these sums and the shards combined in any
/// order. The point estimate and both closed-form variances are recovered
/// exactly from the merged sums, so this is a MapReduce-friendly replacement
/// for the batch estimators.
class SufficientStats {
 public:
  SufficientStats(double q, double p) : q_(q), p_(p) {
    if (!(q > 0.0) || !std::isfinite(q)) {
      throw Error(ErrorCode::InvalidArgument, "threshold q must be positive and finite");
    }
    require_probability(p);
  }

  /// Rebuilds a summary from its serialised fields. Compensation terms are
  /// not part of the wire format and restart at zero.
  static SufficientStats from_fields(std::uint64_t n, double s_x, double s_xx, double s_xa,
                                     double s_xxa, std::uint64_t s_a, double q, double p) {
    SufficientStats s(q, p);
    if (s_a > n || !(s_x >= 0.0) || !(s_xx >= 0.0) || !(s_xa >= 0.0) || !(s_xxa >= 0.0) ||
        s_xa > s_x || s_xxa > s_xx || !std::isfinite(s_x) || !std::isfinite(s_xx)) {
      throw Error(ErrorCode::InvalidArgument, "inconsistent sufficient statistics record");
    }
    s.n_ = n;
    s.s_a_ = s_a;
    s.s_x_ = CompensatedSum(s_x);
    s.s_xx_ = CompensatedSum(s_xx);
    s.s_xa_ = CompensatedSum(s_xa);
    s.s_xxa_ = CompensatedSum(s_xxa);
    return s;
  }

  SufficientStats& accumulate(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw Error(ErrorCode::NonPositiveObservation, "observations must be positive and finite");
    }
    const double xx = x * x;
    ++n_;
    s_x_ += x;
    s_xx_ += xx;
    if (x <= q_) {
      ++s_a_;
      s_xa_ += x;
      s_xxa_ += xx;
    }
    return *this;
  }

  SufficientStats& accumulate(std::span<const double> xs) {
    for (double x : xs) accumulate(x);
    return *this;
  }

  SufficientStats& merge(const SufficientStats& other) {
    if (other.q_ != q_ || other.p_ != p_) {
      throw Error(ErrorCode::ThresholdMismatch, "cannot merge summaries taken against different (q, p)");
    }
    n_ += other.n_;
    s_a_ += other.s_a_;
    s_x_ += other.s_x_;
    s_xx_ += other.s_xx_;
    s_xa_ += other.s_xa_;
    s_xxa_ += other.s_xxa_;
    return *this;
  }

  [[nodiscard]] std::uint64_t n() const noexcept { return n_; }
  [[nodiscard]] std::uint64_t s_a() const noexcept { return s_a_; }
  [[nodiscard]] double s_x() const noexcept { return s_x_.value(); }
  [[nodiscard]] double s_xx() const noexcept { return s_xx_.value(); }
  [[nodiscard]] double s_xa() const noexcept { return s_xa_.value(); }
  [[nodiscard]] double s_xxa() const noexcept { return s_xxa_.value(); }
  [[nodiscard]] double q() const noexcept { return q_; }
  [[nodiscard]] double p() const noexcept { return p_; }

  /// Point estimate with proposed and fixed-q variances.
  [[nodiscard]] ShareEstimate finalize() const {
    if (n_ < 2 || !(s_x() > 0.0)) {
      throw Error(ErrorCode::InsufficientData, "finalize needs n >= 2 and a positive total");
    }
    const double n = static_cast<double>(n_);
    const double k = static_cast<double>(s_a_);
    const double q = q_;
    const double p = p_;
    const double sx = s_x();
    const double sxa = s_xa();
    const double sxxa = s_xxa();
    const double sxx_above = s_xx() - sxxa;
    const double sx_above = sx - sxa;
    const double m = sxa / sx;

    // Residual r = x a - m x - q a + q p, split by a in {0, 1}:
    //   a = 1: (1 - m) x - q (1 - p)
    //   a = 0: -m x + q p
    const double c_below = q * (1.0 - p);
    const double c_above = q * p;
    const double below = (1.0 - m) * (1.0 - m) * sxxa - 2.0 * (1.0 - m) * c_below * sxa +
                         c_below * c_below * k;
    const double above = m * m * sxx_above - 2.0 * m * c_above * sx_above +
                         c_above * c_above * (n - k);
    const double fixed = (1.0 - m) * (1.0 - m) * sxxa + m * m * sxx_above;

    ShareEstimate est;
    est.p = p;
    est.q_hat = q;
    est.m_hat = m;
    est.n = static_cast<std::size_t>(n_);
    est.quantile_estimated = true;
    est.variances[VarianceMethod::Proposed] = std::max(0.0, below + above) / (sx * sx);
    est.variances[VarianceMethod::FixedQ] = std::max(0.0, fixed) / (sx * sx);
    return est;
  }

 private:
  std::uint64_t n_ = 0;
  std::uint64_t s_a_ = 0;
  CompensatedSum s_x_;
  CompensatedSum s_xx_;
  CompensatedSum s_xa_;
  CompensatedSum s_xxa_;
  double q_;
  double p_;
};

[[nodiscard]] inline SufficientStats merge(SufficientStats a, const SufficientStats& b) {
  a.merge(b);
  return a;
}

[[nodiscard]] inline SufficientStats summarize(std::span<const double> xs, double q, double p) {
  SufficientStats s(q, p);
  s.accumulate(xs);
  return s;
}

}  // namespace incmom
