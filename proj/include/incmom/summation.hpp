#pragma once

#include <cmath>
#include <concepts>
#include <ranges>

namespace incmom {

// Neumaier's variant of Kahan summation. Keeps the running sum and its
// rounding error separately so that partial sums from disjoint shards can be
// combined without losing the low-order bits of either side.
class CompensatedSum {
 public:
  constexpr CompensatedSum() = default;
  constexpr explicit CompensatedSum(double initial) : sum_(initial) {}

  constexpr CompensatedSum& add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  constexpr CompensatedSum& operator+=(double x) noexcept { return add(x); }

  constexpr CompensatedSum& operator+=(const CompensatedSum& other) noexcept {
    add(other.sum_);
    comp_ += other.comp_;
    return *this;
  }

  [[nodiscard]] constexpr double value() const noexcept { return sum_ + comp_; }
  [[nodiscard]] constexpr double raw_sum() const noexcept { return sum_; }
  [[nodiscard]] constexpr double compensation() const noexcept { return comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

template <std::ranges::input_range R>
  requires std::convertible_to<std::ranges::range_value_t<R>, double>
[[nodiscard]] double compensated_sum(R&& values) {
  CompensatedSum acc;
  for (auto&& v : values) acc += static_cast<double>(v);
  return acc.value();
}

}  // namespace incmom
