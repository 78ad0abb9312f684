#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "incmom/compare.hpp"
#include "incmom/estimators.hpp"
#include "incmom/simulation.hpp"
#include "incmom/streaming.hpp"

// JSON and aligned-text renderings of the library's result types. JSON
// carries full double precision; tables use 6 significant digits.

namespace incmom::report {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

[[nodiscard]] inline std::string sig6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

[[nodiscard]] inline std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
  return buf;
}

/// Renders rows as left-aligned columns separated by two spaces.
[[nodiscard]] inline std::string align(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream os;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      os << r[i];
      if (i + 1 < r.size()) os << std::string(width[i] - r[i].size() + 2, ' ');
    }
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Estimates
// ---------------------------------------------------------------------------

[[nodiscard]] inline json to_json(const ConfidenceInterval& ci) {
  return json{{"lower", ci.lower}, {"upper", ci.upper}, {"level", ci.level}};
}

[[nodiscard]] inline json to_json(const ShareEstimate& est, double level) {
  json variances = json::object();
  json intervals = json::object();
  for (const auto& [m, v] : est.variances) {
    variances[std::string(to_string(m))] = v;
    intervals[std::string(to_string(m))] = to_json(confidence_interval(est, m, level));
  }
  return json{{"p", est.p},
              {"n", est.n},
              {"q_hat", est.q_hat},
              {"m_hat", est.m_hat},
              {"quantile_estimated", est.quantile_estimated},
              {"degenerate", est.degenerate},
              {"variances", variances},
              {"confidence_intervals", intervals}};
}

// ---------------------------------------------------------------------------
// Sufficient statistics wire format
// ---------------------------------------------------------------------------

[[nodiscard]] inline json to_json(const SufficientStats& s) {
  return json{{"n", s.n()},     {"s_x", s.s_x()},   {"s_xx", s.s_xx()}, {"s_xa", s.s_xa()},
              {"s_xxa", s.s_xxa()}, {"s_a", s.s_a()}, {"q", s.q()},       {"p", s.p()}};
}

[[nodiscard]] inline SufficientStats stats_from_json(const json& j) {
  try {
    return SufficientStats::from_fields(j.at("n").get<std::uint64_t>(), j.at("s_x").get<double>(),
                                        j.at("s_xx").get<double>(), j.at("s_xa").get<double>(),
                                        j.at("s_xxa").get<double>(), j.at("s_a").get<std::uint64_t>(),
                                        j.at("q").get<double>(), j.at("p").get<double>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed sufficient statistics record: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

[[nodiscard]] inline json to_json(const TwoSampleTest& t) {
  return json{{"t_statistic", t.t_statistic},
              {"p_value_one_sided", t.p_value_one_sided},
              {"p_value_two_sided", t.p_value_two_sided}};
}

[[nodiscard]] inline json to_json(const ComparisonReport& r) {
  json groups = json::array();
  for (const auto& row : r.rows) {
    json g = to_json(row.estimate, r.level);
    g["group"] = row.group;
    groups.push_back(std::move(g));
  }
  return json{{"schema_version", kSchemaVersion},
              {"p", r.p},
              {"level", r.level},
              {"groups", groups},
              {"tests", {{"proposed", to_json(r.proposed)}, {"fixed_q", to_json(r.fixed_q)}}}};
}

[[nodiscard]] inline std::string to_table(const ComparisonReport& r) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"group", "size", "m_hat", "V_proposed", "V_fixed_q"});
  for (const auto& row : r.rows) {
    rows.push_back({row.group, std::to_string(row.estimate.n), sig6(row.estimate.m_hat),
                    sig6(row.estimate.variance(VarianceMethod::Proposed)),
                    sig6(row.estimate.variance(VarianceMethod::FixedQ))});
  }
  std::string out = align(rows);
  out += "\n";
  out += align({{"method", "t", "p_one_sided", "p_two_sided"},
                {"proposed", sig6(r.proposed.t_statistic), sig6(r.proposed.p_value_one_sided),
                 sig6(r.proposed.p_value_two_sided)},
                {"fixed_q", sig6(r.fixed_q.t_statistic), sig6(r.fixed_q.p_value_one_sided),
                 sig6(r.fixed_q.p_value_two_sided)}});
  return out;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

[[nodiscard]] inline json to_json(const SimulationReport& r, bool with_timings) {
  json methods = json::object();
  for (const auto& [m, s] : r.methods) {
    json j{{"mean_variance", s.mean_variance},
           {"relative_bias", s.relative_bias},
           {"coverage", s.coverage}};
    if (with_timings) j["mean_runtime_ms"] = s.mean_runtime_ms;
    methods[std::string(to_string(m))] = std::move(j);
  }
  return json{{"schema_version", kSchemaVersion},
              {"model", r.model_label},
              {"family", r.family},
              {"n", r.n},
              {"p", r.p},
              {"replications", r.replications},
              {"bootstrap_b", r.bootstrap_b},
              {"seed", r.seed},
              {"level", r.level},
              {"true_m", r.true_m},
              {"true_variance", r.true_variance},
              {"analytic_variance", r.analytic_variance},
              {"mean_m_hat", r.mean_m_hat},
              {"methods", methods}};
}

/// One row per report, columns in the order: case, n, m, true variance,
/// relative biases, coverages.
[[nodiscard]] inline std::string to_table(const std::vector<SimulationReport>& reports) {
  std::vector<VarianceMethod> order;
  for (VarianceMethod m : {VarianceMethod::Proposed, VarianceMethod::FixedQ, VarianceMethod::Bootstrap,
                           VarianceMethod::BeachDavidson}) {
    for (const auto& r : reports) {
      if (r.methods.contains(m)) {
        order.push_back(m);
        break;
      }
    }
  }
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"case", "n", "m", "V"};
  for (VarianceMethod m : order) head.push_back("bias_" + std::string(to_string(m)));
  for (VarianceMethod m : order) head.push_back("cover_" + std::string(to_string(m)));
  rows.push_back(head);
  for (const auto& r : reports) {
    std::vector<std::string> row{r.model_label, std::to_string(r.n), sig6(r.true_m), sig6(r.true_variance)};
    for (VarianceMethod m : order) row.push_back(r.methods.contains(m) ? percent(r.methods.at(m).relative_bias) : "-");
    for (VarianceMethod m : order) row.push_back(r.methods.contains(m) ? percent(r.methods.at(m).coverage) : "-");
    rows.push_back(std::move(row));
  }
  return align(rows);
}

[[nodiscard]] inline json to_json(const TimingReport& r) {
  json methods = json::object();
  for (const auto& [m, ms] : r.mean_ms) methods[std::string(to_string(m))] = ms;
  return json{{"schema_version", kSchemaVersion},
              {"model", r.model_label},
              {"n", r.n},
              {"bootstrap_b", r.bootstrap_b},
              {"repeats", r.repeats},
              {"mean_ms", methods},
              {"bootstrap_over_proposed", r.bootstrap_ratio()}};
}

[[nodiscard]] inline std::string to_table(const std::vector<TimingReport>& reports) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"case", "n", "proposed_ms", "bootstrap_ms", "ratio"});
  for (const auto& r : reports) {
    auto get = [&](VarianceMethod m) {
      return r.mean_ms.contains(m) ? sig6(r.mean_ms.at(m)) : std::string("-");
    };
    rows.push_back({r.model_label, std::to_string(r.n), get(VarianceMethod::Proposed),
                    get(VarianceMethod::Bootstrap), sig6(r.bootstrap_ratio())});
  }
  return align(rows);
}

}  // namespace incmom::report
