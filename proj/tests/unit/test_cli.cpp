#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "incmom/estimators.hpp"
#include "incmom/streaming.hpp"

using nlohmann::json;

namespace {

struct Run {
  int exit_code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(INCMOM_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path write_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::current_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("estimate on the worked example", "[cli]") {
  const auto f = write_file("cli_small.csv", "wage\n1\n2\n3\n4\n");
  const auto r = run("estimate -f " + f.string() + " -v wage -p 0.5");
  REQUIRE(r.exit_code == 0);
  const auto j = json::parse(r.out);
  CHECK(j.at("schema_version") == 1);
  CHECK(j.at("command") == "estimate");
  const auto& g = j.at("groups")[0];
  CHECK(g.at("q_hat") == 2.0);
  CHECK(std::abs(g.at("m_hat").get<double>() - 0.3) < 1e-12);
  CHECK(std::abs(g.at("variances").at("proposed").get<double>() - 0.0030) < 1e-12);
  CHECK(std::abs(g.at("variances").at("fixed_q").get<double>() - 0.047) < 1e-12);

  const auto tsv = run("estimate -f " + f.string() + " -v wage -p 0.5 --format tsv");
  REQUIRE(tsv.exit_code == 0);
  CHECK(tsv.out.rfind("group\tn\tq_hat\tm_hat", 0) == 0);
}

TEST_CASE("estimate with bootstrap is reproducible", "[cli]") {
  const auto f = write_file("cli_boot.csv", "w\n1\n2\n3\n4\n5\n6\n7\n8\n9\n10\n");
  const auto a = run("estimate -f " + f.string() + " -v w -p 0.5 -m proposed,bootstrap --boot 300 --seed 4");
  const auto b = run("estimate -f " + f.string() + " -v w -p 0.5 -m proposed,bootstrap --boot 300 --seed 4 --threads 3");
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("exit codes", "[cli]") {
  const auto good = write_file("cli_good.csv", "wage\n1\n2\n3\n4\n");
  const auto bad = write_file("cli_bad.csv", "wage\n1\n-2\n3\n");
  CHECK(run("estimate -f /nonexistent.csv -v wage -p 0.5").exit_code == 2);
  CHECK(run("estimate -f " + bad.string() + " -v wage -p 0.5").exit_code == 2);
  CHECK(run("estimate -f " + bad.string() + " -v wage -p 0.5 --skip-nonpositive").exit_code == 0);
  CHECK(run("estimate -f " + good.string() + " -v salary -p 0.5").exit_code == 2);
  CHECK(run("estimate -f " + good.string() + " -v wage -p 1.5").exit_code == 2);
  CHECK(run("estimate -f " + good.string() + " -v wage -p 0.1").exit_code == 3);
  CHECK(run("estimate -f " + good.string() + " -v wage -p 0.5 -m nonsense").exit_code == 2);
  CHECK(run("frobnicate").exit_code == 2);
  CHECK(run("compare -f " + good.string() + " -v wage -p 0.5").exit_code == 2);
}

TEST_CASE("compare two groups", "[cli]") {
  const auto f = write_file("cli_groups.csv", "w,g\n1,a\n2,a\n3,a\n4,a\n1,b\n2,b\n3,b\n4,b\n");
  const auto r = run("compare -f " + f.string() + " -v w -g g -p 0.5 --format json");
  REQUIRE(r.exit_code == 0);
  const auto j = json::parse(r.out);
  CHECK(j.at("tests").at("proposed").at("t_statistic") == 0.0);
  CHECK(j.at("groups")[0].at("group") == "a");
  const auto t = run("compare -f " + f.string() + " -v w -g g -p 0.5 --order b,a");
  REQUIRE(t.exit_code == 0);
  CHECK(t.out.find("group") != std::string::npos);
}

TEST_CASE("simulate JSON is byte-identical across runs and thread counts", "[cli]") {
  const std::string args = "simulate --dist lognormal --mu 0.4 --sigma 0.5 --n 200 --reps 100 --boot 20 --seed 9 --format json";
  const auto a = run(args + " --threads 1");
  const auto b = run(args + " --threads 4");
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  const auto j = json::parse(a.out);
  CHECK(j.at("reports")[0].at("replications") == 100);
  CHECK_FALSE(j.at("reports")[0].at("methods").at("proposed").contains("mean_runtime_ms"));
  CHECK(run("simulate --n 200 --reps 10").exit_code == 2);
}

TEST_CASE("seed comes from the environment when not given", "[cli]") {
  const std::string args = " simulate --dist exp --n 100 --reps 100 --methods proposed --format json";
  // popen runs through the shell, so the variable can be set inline.
  const std::string cli = INCMOM_CLI_PATH;
  auto env_run = [&](const std::string& seed) {
    Run r;
    FILE* pipe = popen(("INCMOM_SEED=" + seed + " " + cli + args + " 2>/dev/null").c_str(), "r");
    char buf[4096];
    std::size_t got = 0;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    r.exit_code = WEXITSTATUS(pclose(pipe));
    return r;
  };
  const auto s5 = env_run("5");
  const auto s5b = env_run("5");
  const auto s6 = env_run("6");
  REQUIRE(s5.exit_code == 0);
  CHECK(s5.out == s5b.out);
  CHECK(s5.out != s6.out);
  CHECK(json::parse(s5.out).at("reports")[0].at("seed") == 5);
}

TEST_CASE("shard accumulate and merge reproduce the batch estimate", "[cli]") {
  const auto part1 = write_file("cli_shard1.csv", "w\n1\n2\n");
  const auto part2 = write_file("cli_shard2.csv", "w\n3\n4\n");
  const auto a = run("shard-accumulate -f " + part1.string() + " -v w -p 0.5 -q 2");
  const auto b = run("shard-accumulate -f " + part2.string() + " -v w -p 0.5 -q 2");
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  const auto shards = write_file("cli_shards.jsonl", a.out + b.out);
  const auto m = run("shard-merge " + shards.string());
  REQUIRE(m.exit_code == 0);
  const auto j = json::parse(m.out);
  CHECK(j.at("shards") == 2);
  CHECK(j.at("merged").at("s_x") == 10.0);
  const auto& est = j.at("estimate");
  CHECK(std::abs(est.at("m_hat").get<double>() - 0.3) < 1e-12);
  CHECK(std::abs(est.at("variances").at("proposed").get<double>() - 0.0030) < 1e-12);

  const auto mismatch = run("shard-accumulate -f " + part2.string() + " -v w -p 0.5 -q 3");
  const auto bad = write_file("cli_shards_bad.jsonl", a.out + mismatch.out);
  CHECK(run("shard-merge " + bad.string()).exit_code == 2);
}

TEST_CASE("shard merge of a larger file agrees with the library", "[cli]") {
  std::string text = "w\n";
  std::vector<double> xs;
  for (int i = 1; i <= 997; ++i) {
    const double x = 0.5 + std::fmod(i * 0.6180339887, 7.0);
    xs.push_back(x);
    text += std::to_string(x) + "\n";
  }
  // Re-read the values as printed so both sides see identical doubles.
  xs.clear();
  {
    std::istringstream in(text.substr(2));
    double v;
    while (in >> v) xs.push_back(v);
  }
  const auto f = write_file("cli_big.csv", text);
  const incmom::Sample s(xs);
  const auto batch = incmom::estimate_share(s, 0.75);
  char q[64];
  std::snprintf(q, sizeof q, "%.17g", batch.q_hat);
  const auto acc = run("shard-accumulate -f " + f.string() + " -v w -p 0.75 -q " + q);
  REQUIRE(acc.exit_code == 0);
  const auto shard = write_file("cli_big.json", acc.out);
  const auto m = run("shard-merge " + shard.string());
  REQUIRE(m.exit_code == 0);
  const auto est = json::parse(m.out).at("estimate");
  CHECK(est.at("m_hat").get<double>() == Catch::Approx(batch.m_hat).epsilon(1e-12));
  CHECK(est.at("variances").at("proposed").get<double>() ==
        Catch::Approx(incmom::variance_proposed(s, batch)).epsilon(1e-12));
}
