#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "incmom/errors.hpp"
#include "incmom/estimators.hpp"
#include "incmom/rng.hpp"
#include "incmom/sample.hpp"
#include "incmom/summation.hpp"

namespace incmom {

struct ResamplePlan {
  std::size_t b = 200;
  std::uint64_t seed = 0;
  // 0 picks std::thread::hardware_concurrency(). Results never depend on it.
  unsigned threads = 1;

  void validate() const {
    if (b < 2) throw Error(ErrorCode::InvalidArgument, "bootstrap needs b >= 2 resamples");
  }
};

/// Indices drawn for resample j of a size-n sample. Stream j depends only on
/// (seed, j), so any subset of resamples can be regenerated in isolation.
inline void resample_indices(std::size_t n, std::uint64_t seed, std::size_t j,
                             std::vector<std::size_t>& out) {
  auto eng = rng::make_engine(seed, rng::Stream::Bootstrap, j);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rng::uniform_index(eng, n);
}

[[nodiscard]] inline std::vector<std::size_t> resample_indices(std::size_t n, std::uint64_t seed,
                                                               std::size_t j) {
  std::vector<std::size_t> out;
  resample_indices(n, seed, j, out);
  return out;
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i, 0u);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += threads) fn(i, t);
    });
  }
}

}  // namespace detail

/// Nonparametric bootstrap of an arbitrary statistic. The statistic receives a
/// mutable span over the resampled values and may reorder it.
template <typename Statistic>
  requires std::invocable<Statistic&, std::span<double>>
[[nodiscard]] std::vector<double> bootstrap_distribution(std::span<const double> values,
                                                         const ResamplePlan& plan,
                                                         Statistic statistic) {
  plan.validate();
  const std::size_t n = values.size();
  std::vector<double> stats(plan.b);
  unsigned threads = plan.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : plan.threads;
  std::vector<std::vector<double>> buffers(threads);
  std::vector<std::vector<std::size_t>> index_buffers(threads);
  detail::parallel_for(plan.b, threads, [&](std::size_t j, unsigned t) {
    auto& idx = index_buffers[t];
    auto& buf = buffers[t];
    resample_indices(n, plan.seed, j, idx);
    buf.resize(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = values[idx[i]];
    stats[j] = static_cast<double>(statistic(std::span<double>(buf)));
  });
  return stats;
}

/// m-hat(q-hat) recomputed from scratch on a resample: q-hat is re-selected
/// from the resample itself.
[[nodiscard]] inline double share_statistic(std::span<double> resample, double p) {
  const std::size_t k = quantile_rank(resample.size(), p);
  if (k == 0) throw Error(ErrorCode::QuantileIndexZero, "floor(n*p) = 0 in a resample");
  auto kth = resample.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(resample.begin(), kth, resample.end());
  const double q = *kth;
  return share_below(resample, q);
}

[[nodiscard]] inline std::vector<double> bootstrap_distribution(const Sample& sample, double p,
                                                                const ResamplePlan& plan) {
  require_probability(p);
  if (quantile_rank(sample.size(), p) == 0) {
    throw Error(ErrorCode::QuantileIndexZero, "floor(n*p) = 0; the sample is too small for p");
  }
  return bootstrap_distribution(sample.values(), plan,
                                [p](std::span<double> r) { return share_statistic(r, p); });
}

/// Unbiased (b - 1 denominator) variance of a set of replicate statistics.
[[nodiscard]] inline double replicate_variance(std::span<const double> stats) {
  const auto b = static_cast<double>(stats.size());
  const double mean = compensated_sum(stats) / b;
  CompensatedSum ss;
  for (double s : stats) ss += (s - mean) * (s - mean);
  return ss.value() / (b - 1.0);
}

/// Bootstrap variance of the share estimator. With a known threshold the
/// threshold stays fixed across resamples; otherwise q-hat is re-estimated in
/// every resample.
[[nodiscard]] inline double variance_bootstrap(const Sample& sample, const ShareQuery& query,
                                               const ResamplePlan& plan) {
  if (query.fixed_q) {
    const double q = *query.fixed_q;
    const auto stats = bootstrap_distribution(
        sample.values(), plan, [q](std::span<double> r) { return share_below(r, q); });
    return replicate_variance(stats);
  }
  const auto stats = bootstrap_distribution(sample, query.p, plan);
  return replicate_variance(stats);
}

[[nodiscard]] inline double variance_bootstrap(const Sample& sample, const ShareQuery& query,
                                               std::size_t b, std::uint64_t seed) {
  return variance_bootstrap(sample, query, ResamplePlan{b, seed, 1});
}

}  // namespace incmom
