#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "incmom/csv.hpp"
#include "incmom/errors.hpp"
#include "incmom/estimate.hpp"

namespace incmom {

struct GroupEstimate {
  std::string group;
  ShareEstimate estimate;
};

/// Two groups side by side with the equal-share test under the proposed and
/// the fixed-q variance.
struct ComparisonReport {
  double p = 0.0;
  double level = 0.95;
  std::vector<GroupEstimate> rows;
  TwoSampleTest proposed;
  TwoSampleTest fixed_q;
};

[[nodiscard]] inline ComparisonReport compare_groups(const csv::Dataset& data, double p,
                                                     double level = 0.95,
                                                     std::optional<std::pair<std::string, std::string>> order = {}) {
  require_probability(p);
  require_probability(level, "level");
  if (data.groups.size() != 2) {
    throw Error(ErrorCode::GroupCountNotTwo,
                "comparison needs exactly two groups, found " + std::to_string(data.groups.size()));
  }
  const csv::Group* first = &data.groups[0];
  const csv::Group* second = &data.groups[1];
  if (order) {
    first = data.find(order->first);
    second = data.find(order->second);
    if (!first || !second || first == second) {
      throw Error(ErrorCode::InvalidArgument, "group order does not name the two groups in the data");
    }
  }

  ComparisonReport report;
  report.p = p;
  report.level = level;
  const EstimateOptions opts{{VarianceMethod::Proposed, VarianceMethod::FixedQ}, {}};
  for (const csv::Group* g : {first, second}) {
    const Sample sample(g->values);
    report.rows.push_back(GroupEstimate{g->name, estimate(sample, ShareQuery::estimated(p), opts)});
  }
  report.proposed = two_sample_test(report.rows[0].estimate, report.rows[1].estimate,
                                    VarianceMethod::Proposed);
  report.fixed_q = two_sample_test(report.rows[0].estimate, report.rows[1].estimate,
                                   VarianceMethod::FixedQ);
  return report;
}

}  // namespace incmom
