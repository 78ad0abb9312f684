// incmom: estimate bottom-p shares with confidence intervals, compare two
// groups, run Monte Carlo coverage studies and timing benchmarks, and merge
// shard summaries.
//
// Exit codes: 0 success, 2 input error, 3 numeric error.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "incmom/incmom.hpp"

namespace {

using incmom::Error;
using incmom::ErrorKind;
using incmom::VarianceMethod;
using incmom::report::json;

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("INCMOM_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(incmom::ErrorCode::InvalidArgument, "INCMOM_SEED is not an unsigned integer");
    }
  }
  return 0;
}

std::vector<VarianceMethod> parse_methods(const std::vector<std::string>& names) {
  std::vector<VarianceMethod> out;
  for (const auto& n : names) {
    const auto m = incmom::parse_method(n);
    if (!m) throw Error(incmom::ErrorCode::InvalidArgument, "unknown variance method '" + n + "'");
    out.push_back(*m);
  }
  return out;
}

struct DataOptions {
  std::string file;
  std::string value_column;
  std::string group_column;
  std::string delimiter = ",";
  bool no_header = false;
  bool skip_invalid = false;

  void attach(CLI::App* app) {
    app->add_option("-f,--file", file, "CSV input file")->required();
    app->add_option("-v,--value", value_column, "value column (name, or 1-based index with --no-header)")
        ->required();
    app->add_option("-g,--group", group_column, "optional grouping column");
    app->add_option("-d,--delimiter", delimiter, "field delimiter")->capture_default_str();
    app->add_flag("--no-header", no_header, "the file has no header row");
    app->add_flag("--skip-nonpositive", skip_invalid,
                  "skip and count rows with non-positive or unparseable values instead of failing");
  }

  [[nodiscard]] incmom::csv::Dataset load() const {
    if (delimiter.size() != 1) {
      throw Error(incmom::ErrorCode::InvalidArgument, "delimiter must be a single character");
    }
    incmom::csv::DatasetSpec spec;
    spec.path = file;
    spec.value_column = value_column;
    if (!group_column.empty()) spec.group_column = group_column;
    spec.delimiter = delimiter.front();
    spec.header = !no_header;
    spec.skip_invalid = skip_invalid;
    auto data = incmom::csv::parse_csv(spec);
    for (const auto& g : data.groups) {
      std::cerr << "group '" << g.name << "': " << g.values.size() << " observations\n";
    }
    if (data.skipped_nonpositive + data.skipped_unparseable > 0) {
      std::cerr << "skipped " << data.skipped_nonpositive << " non-positive and "
                << data.skipped_unparseable << " unparseable rows\n";
    }
    return data;
  }
};

json dataset_meta(const incmom::csv::Dataset& d) {
  return json{{"rows", d.rows},
              {"skipped_nonpositive", d.skipped_nonpositive},
              {"skipped_unparseable", d.skipped_unparseable}};
}

// --- estimate ---------------------------------------------------------------

struct EstimateCmd {
  DataOptions data;
  double p = 0.0;
  std::optional<double> q;
  double level = 0.95;
  std::vector<std::string> methods{"proposed", "fixed_q"};
  std::size_t boot = 200;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string format = "json";

  void attach(CLI::App* app) {
    data.attach(app);
    app->add_option("-p,--p", p, "bottom share probability in (0,1)")->required();
    app->add_option("-q,--q", q, "use this known threshold instead of the sample quantile");
    app->add_option("--level", level, "confidence level")->capture_default_str();
    app->add_option("-m,--methods", methods, "variance methods: proposed,fixed_q,beach_davidson,bootstrap")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--boot", boot, "bootstrap resamples")->capture_default_str();
    app->add_option("--seed", seed, "bootstrap seed (default: $INCMOM_SEED or 0)");
    app->add_option("--threads", threads, "bootstrap threads (0 = all cores)")->capture_default_str();
    app->add_option("--format", format, "json or tsv")
        ->check(CLI::IsMember({"json", "tsv"}))
        ->capture_default_str();
  }

  int run() const {
    const auto dataset = data.load();
    const auto query = q ? incmom::ShareQuery::known_threshold(p, *q) : incmom::ShareQuery::estimated(p);
    incmom::EstimateOptions opts;
    opts.methods = parse_methods(methods);
    opts.bootstrap = incmom::ResamplePlan{boot, seed.value_or(default_seed()), threads};

    std::vector<std::pair<std::string, incmom::ShareEstimate>> results;
    for (const auto& g : dataset.groups) {
      const incmom::Sample sample(g.values);
      results.emplace_back(g.name, incmom::estimate(sample, query, opts));
    }

    if (format == "json") {
      json groups = json::array();
      for (const auto& [name, est] : results) {
        json j = incmom::report::to_json(est, level);
        j["group"] = name;
        groups.push_back(std::move(j));
      }
      json out{{"schema_version", incmom::report::kSchemaVersion},
               {"command", "estimate"},
               {"level", level},
               {"input", dataset_meta(dataset)},
               {"groups", groups}};
      std::cout << out.dump(2) << '\n';
    } else {
      std::vector<std::vector<std::string>> rows;
      std::vector<std::string> head{"group", "n", "q_hat", "m_hat"};
      for (VarianceMethod m : opts.methods) {
        const std::string s(incmom::to_string(m));
        head.insert(head.end(), {"var_" + s, "lower_" + s, "upper_" + s});
      }
      rows.push_back(head);
      for (const auto& [name, est] : results) {
        std::vector<std::string> row{name, std::to_string(est.n), incmom::report::sig6(est.q_hat),
                                     incmom::report::sig6(est.m_hat)};
        for (VarianceMethod m : opts.methods) {
          const auto ci = incmom::confidence_interval(est, m, level);
          row.insert(row.end(), {incmom::report::sig6(est.variance(m)), incmom::report::sig6(ci.lower),
                                 incmom::report::sig6(ci.upper)});
        }
        rows.push_back(std::move(row));
      }
      for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) std::cout << r[i] << (i + 1 < r.size() ? '\t' : '\n');
      }
    }
    return 0;
  }
};

// --- compare ----------------------------------------------------------------

struct CompareCmd {
  DataOptions data;
  double p = 0.0;
  double level = 0.95;
  std::vector<std::string> order;
  std::string format = "table";

  void attach(CLI::App* app) {
    data.attach(app);
    app->add_option("-p,--p", p, "bottom share probability in (0,1)")->required();
    app->add_option("--level", level, "confidence level")->capture_default_str();
    app->add_option("--order", order, "the two group labels, first minus second")->delimiter(',')->expected(2);
    app->add_option("--format", format, "json or table")
        ->check(CLI::IsMember({"json", "table"}))
        ->capture_default_str();
  }

  int run() const {
    if (data.group_column.empty()) {
      throw Error(incmom::ErrorCode::GroupCountNotTwo, "compare needs --group");
    }
    const auto dataset = data.load();
    std::optional<std::pair<std::string, std::string>> ord;
    if (order.size() == 2) ord = std::make_pair(order[0], order[1]);
    const auto report = incmom::compare_groups(dataset, p, level, ord);
    if (format == "json") {
      json out = incmom::report::to_json(report);
      out["command"] = "compare";
      out["input"] = dataset_meta(dataset);
      std::cout << out.dump(2) << '\n';
    } else {
      std::cout << incmom::report::to_table(report);
    }
    return 0;
  }
};

// --- simulate / bench ---------------------------------------------------------

struct ModelOptions {
  std::string dist = "exp";
  double mu = 0.4;
  double sigma = 0.5;
  double lambda = 1.0;
  double upper = 1.0;
  std::vector<std::size_t> n{2000};
  double p = 0.75;
  std::size_t boot = 200;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string format = "table";
  std::vector<std::string> methods;

  void attach(CLI::App* app) {
    app->add_option("--dist", dist, "exp, lognormal or uniform")
        ->check(CLI::IsMember({"exp", "exponential", "lognormal", "ln", "uniform", "unif"}))
        ->capture_default_str();
    app->add_option("--mu", mu, "log-normal log-scale mean")->capture_default_str();
    app->add_option("--sigma", sigma, "log-normal log-scale standard deviation")->capture_default_str();
    app->add_option("--lambda", lambda, "exponential rate")->capture_default_str();
    app->add_option("--upper", upper, "uniform upper bound")->capture_default_str();
    app->add_option("--n", n, "sample size(s), comma separated")->delimiter(',')->capture_default_str();
    app->add_option("--p", p, "bottom share probability")->capture_default_str();
    app->add_option("--boot", boot, "bootstrap resamples")->capture_default_str();
    app->add_option("--seed", seed, "root seed (default: $INCMOM_SEED or 0)");
    app->add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();
    app->add_option("--format", format, "json or table")
        ->check(CLI::IsMember({"json", "table"}))
        ->capture_default_str();
  }

  [[nodiscard]] incmom::DistributionModel model() const {
    if (dist == "exp" || dist == "exponential") return incmom::DistributionModel::exponential(lambda);
    if (dist == "lognormal" || dist == "ln") return incmom::DistributionModel::log_normal(mu, sigma);
    return incmom::DistributionModel::uniform(upper);
  }

  [[nodiscard]] incmom::SimulationConfig config(std::size_t size) const {
    incmom::SimulationConfig c;
    c.model = model();
    c.n = size;
    c.p = p;
    c.bootstrap_b = boot;
    c.seed = seed.value_or(default_seed());
    c.threads = threads;
    if (!methods.empty()) c.methods = parse_methods(methods);
    return c;
  }
};

struct SimulateCmd {
  ModelOptions model;
  std::size_t reps = 2000;
  double level = 0.95;
  bool with_timings = false;

  void attach(CLI::App* app) {
    model.attach(app);
    app->add_option("--reps", reps, "Monte Carlo replications L")->capture_default_str();
    app->add_option("--level", level, "confidence level")->capture_default_str();
    app->add_option("--methods", model.methods, "variance methods (default proposed,fixed_q,bootstrap)")
        ->delimiter(',');
    app->add_flag("--with-timings", with_timings, "include per-method runtimes (not reproducible)");
  }

  int run() const {
    std::vector<incmom::SimulationReport> reports;
    for (std::size_t n : model.n) {
      auto c = model.config(n);
      c.replications = reps;
      c.level = level;
      reports.push_back(incmom::run_simulation(c));
    }
    if (model.format == "json") {
      json arr = json::array();
      for (const auto& r : reports) arr.push_back(incmom::report::to_json(r, with_timings));
      json out{{"schema_version", incmom::report::kSchemaVersion}, {"command", "simulate"}, {"reports", arr}};
      std::cout << out.dump(2) << '\n';
    } else {
      std::cout << incmom::report::to_table(reports);
    }
    return 0;
  }
};

struct BenchCmd {
  ModelOptions model;
  std::size_t repeats = 100;

  void attach(CLI::App* app) {
    model.attach(app);
    app->add_option("--repeats", repeats, "timed repetitions per size")->capture_default_str();
    app->add_option("--methods", model.methods, "variance methods (default proposed,bootstrap)")->delimiter(',');
  }

  int run() const {
    std::vector<incmom::TimingReport> reports;
    for (std::size_t n : model.n) {
      auto c = model.config(n);
      if (model.methods.empty()) c.methods = {VarianceMethod::Proposed, VarianceMethod::Bootstrap};
      reports.push_back(incmom::run_timing(c, repeats));
    }
    if (model.format == "json") {
      json arr = json::array();
      for (const auto& r : reports) arr.push_back(incmom::report::to_json(r));
      json out{{"schema_version", incmom::report::kSchemaVersion}, {"command", "bench"}, {"reports", arr}};
      std::cout << out.dump(2) << '\n';
    } else {
      std::cout << incmom::report::to_table(reports);
    }
    return 0;
  }
};

// --- shards -------------------------------------------------------------------

struct ShardAccumulateCmd {
  DataOptions data;
  double p = 0.0;
  double q = 0.0;

  void attach(CLI::App* app) {
    data.attach(app);
    app->add_option("-p,--p", p, "nominal probability the threshold was chosen for")->required();
    app->add_option("-q,--q", q, "threshold fixed by the first pass")->required();
  }

  int run() const {
    const auto dataset = data.load();
    json out = json::array();
    for (const auto& g : dataset.groups) {
      json rec = incmom::report::to_json(incmom::summarize(g.values, q, p));
      if (!data.group_column.empty()) rec["group"] = g.name;
      out.push_back(std::move(rec));
    }
    std::cout << (out.size() == 1 ? out.front() : out).dump() << '\n';
    return 0;
  }
};

void collect_records(const json& j, std::vector<json>& out) {
  if (j.is_array()) {
    for (const auto& e : j) collect_records(e, out);
  } else {
    out.push_back(j);
  }
}

std::vector<json> read_records(std::istream& in, const std::string& where) {
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<json> out;
  try {
    collect_records(json::parse(text), out);
    return out;
  } catch (const json::parse_error&) {
  }
  // Fall back to one JSON document per line.
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      collect_records(json::parse(line), out);
    } catch (const json::parse_error& e) {
      throw Error(incmom::ErrorCode::InvalidArgument, where + ": not JSON: " + e.what());
    }
  }
  return out;
}

struct ShardMergeCmd {
  std::vector<std::string> files;
  double level = 0.95;

  void attach(CLI::App* app) {
    app->add_option("files", files, "files of sufficient-statistics records (default: stdin)");
    app->add_option("--level", level, "confidence level")->capture_default_str();
  }

  int run() const {
    std::vector<json> records;
    if (files.empty()) {
      auto r = read_records(std::cin, "stdin");
      records.insert(records.end(), r.begin(), r.end());
    } else {
      for (const auto& f : files) {
        std::ifstream in(f);
        if (!in) throw Error(incmom::ErrorCode::FileNotFound, "cannot open '" + f + "'");
        auto r = read_records(in, f);
        records.insert(records.end(), r.begin(), r.end());
      }
    }
    if (records.empty()) throw Error(incmom::ErrorCode::InsufficientData, "no records to merge");
    auto merged = incmom::report::stats_from_json(records.front());
    for (std::size_t i = 1; i < records.size(); ++i) merged.merge(incmom::report::stats_from_json(records[i]));
    const auto est = merged.finalize();
    json out{{"schema_version", incmom::report::kSchemaVersion},
             {"command", "shard-merge"},
             {"shards", records.size()},
             {"merged", incmom::report::to_json(merged)},
             {"estimate", incmom::report::to_json(est, level)}};
    std::cout << out.dump(2) << '\n';
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bottom-p share (first normalized incomplete moment) estimation and inference"};
  app.require_subcommand(1);

  EstimateCmd estimate;
  CompareCmd compare;
  SimulateCmd simulate;
  BenchCmd bench;
  ShardAccumulateCmd shard_acc;
  ShardMergeCmd shard_merge;

  auto* est_app = app.add_subcommand("estimate", "estimate the bottom-p share with variances and CIs");
  estimate.attach(est_app);
  auto* cmp_app = app.add_subcommand("compare", "test equality of the bottom-p share between two groups");
  compare.attach(cmp_app);
  auto* sim_app = app.add_subcommand("simulate", "Monte Carlo relative bias and coverage study");
  simulate.attach(sim_app);
  auto* bench_app = app.add_subcommand("bench", "time the proposed variance against the bootstrap");
  bench.attach(bench_app);
  auto* acc_app = app.add_subcommand("shard-accumulate", "summarise a shard against a fixed threshold");
  shard_acc.attach(acc_app);
  auto* merge_app = app.add_subcommand("shard-merge", "merge shard summaries and finalize the estimate");
  shard_merge.attach(merge_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (*est_app) return estimate.run();
    if (*cmp_app) return compare.run();
    if (*sim_app) return simulate.run();
    if (*bench_app) return bench.run();
    if (*acc_app) return shard_acc.run();
    if (*merge_app) return shard_merge.run();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::Input ? kExitInput : kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
