#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "incmom/errors.hpp"

namespace incmom {

/// A validated vector of strictly positive, finite observations (n >= 2).
class Sample {
 public:
  explicit Sample(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) {
      throw Error(ErrorCode::InsufficientData,
                  "a sample needs at least two observations, got " + std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double x = values_[i];
      if (!(x > 0.0) || !std::isfinite(x)) {
        throw Error(ErrorCode::NonPositiveObservation,
                    "observation " + std::to_string(i) + " is not a positive finite number");
      }
    }
  }

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }

  /// True when every observation is identical.
  [[nodiscard]] bool is_constant() const noexcept {
    const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
    return *lo == *hi;
  }

 private:
  std::vector<double> values_;
};

inline void require_probability(double p, const char* what = "p") {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must lie in (0, 1)");
  }
}

/// Which share to estimate: the bottom-p share with q either estimated as the
/// sample order statistic or supplied by the caller as a known threshold.
struct ShareQuery {
  double p = 0.5;
  std::optional<double> fixed_q;

  static ShareQuery estimated(double p) {
    require_probability(p);
    return ShareQuery{p, std::nullopt};
  }

  static ShareQuery known_threshold(double p, double q) {
    require_probability(p);
    if (!(q > 0.0) || !std::isfinite(q)) {
      throw Error(ErrorCode::InvalidArgument, "a known threshold q must be positive and finite");
    }
    return ShareQuery{p, q};
  }

  [[nodiscard]] bool quantile_estimated() const noexcept { return !fixed_q.has_value(); }
};

}  // namespace incmom
