#pragma once

#include <vector>

#include "incmom/bootstrap.hpp"
#include "incmom/estimators.hpp"
#include "incmom/sample.hpp"

namespace incmom {

struct EstimateOptions {
  std::vector<VarianceMethod> methods = {VarianceMethod::Proposed, VarianceMethod::FixedQ};
  ResamplePlan bootstrap{};
};

/// Point estimate with the requested variance estimates attached.
[[nodiscard]] inline ShareEstimate estimate(const Sample& sample, const ShareQuery& query,
                                            const EstimateOptions& options = {}) {
  ShareEstimate est = estimate_share(sample, query);
  for (VarianceMethod m : options.methods) {
    switch (m) {
      case VarianceMethod::Proposed:
        est.variances[m] = variance_proposed(sample, est);
        break;
      case VarianceMethod::FixedQ:
        est.variances[m] = variance_fixed_q(sample, est);
        break;
      case VarianceMethod::BeachDavidson:
        est.variances[m] = variance_beach_davidson(sample, est);
        break;
      case VarianceMethod::Bootstrap:
        est.variances[m] = variance_bootstrap(sample, query, options.bootstrap);
        break;
    }
  }
  return est;
}

}  // namespace incmom
