#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "pursuit/bench.hpp"

using namespace pursuit;
using namespace pursuit::bench;
using Catch::Approx;

namespace {

Config parse(const std::string& text) {
  std::istringstream in(text);
  return Config::parse(in, "test.toml");
}

std::string csv_of(const std::vector<ExperimentRecord>& rows) {
  std::ostringstream out;
  write_csv(rows, out);
  return out.str();
}

/// The CSV with the timing column blanked.
std::string without_seconds(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() > 15) f[15] = "";
    for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + f[i];
    out += '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("config parses scalars, lists and comments") {
  auto c = parse("[experiment]\nkind = \"noise-sweep\"  # trailing\nn = 600\nQ_grid = [0, 10, 20]\nalgorithms = scp\n");
  CHECK(c.str("kind") == "noise-sweep");
  CHECK(c.integer("n") == 600);
  CHECK(c.numbers("Q_grid") == std::vector<double>{0, 10, 20});
  CHECK(c.words("algorithms") == std::vector<std::string>{"scp"});
  CHECK(c.number("missing", 2.5) == 2.5);
  CHECK_THROWS_AS(c.integer("missing"), invalid_input);
  CHECK(c.unused().empty());
}

TEST_CASE("config lists longer than a short string") {
  auto c = parse("Q_grid = 0, 10, 20, 30, 40, 60, 80, 100\nalgorithms = scp, iscp, sc, cocluster, scp\n");
  CHECK(c.numbers("Q_grid") == std::vector<double>{0, 10, 20, 30, 40, 60, 80, 100});
  CHECK(c.words("algorithms").size() == 5);
}

TEST_CASE("config rejects malformed input") {
  CHECK_THROWS_AS(parse("n = 1\nn = 2\n"), invalid_input);
  CHECK_THROWS_AS(parse("just words\n"), invalid_input);
  CHECK_THROWS_AS(parse("= 3\n"), invalid_input);
  auto c = parse("n = -4\nflag = maybe\n");
  CHECK_THROWS_AS(c.integer("n"), invalid_input);
  CHECK_THROWS_AS(c.flag("flag", false), invalid_input);
}

TEST_CASE("experiment spec reads every kind") {
  auto sweep = ExperimentSpec::from_config(
      parse("kind = noise-sweep\nn = 600\nk = 3\np = 0.5\nQ_grid = 0,10\ntrials = 2\nmaster_seed = 9\n"));
  CHECK(sweep.kind == Kind::noise_sweep);
  CHECK(sweep.q_grid == std::vector<double>{0, 10});
  CHECK(sweep.master_seed == 9);

  auto scaling = ExperimentSpec::from_config(
      parse("kind = scaling\nn0 = 100\nk_grid = [2, 4]\np_log_sqrt = 2\nq_log_n = 2\nsc_trials = 1\n"));
  CHECK(scaling.k_grid == std::vector<std::size_t>{2, 4});
  CHECK(scaling.p.at(1000) == Approx(2 * std::log(1000.0) / std::sqrt(1000.0)));
  CHECK(scaling.q.at(1000) == Approx(2 * std::log(1000.0) / 1000.0));
  CHECK(scaling.algorithms == std::vector<std::string>{"scp", "sc"});

  auto co = ExperimentSpec::from_config(parse("kind = cocluster\nrows = 20\ncols = 10\nk = 2\np_in = 0.9\np_out = 0.05\n"));
  CHECK(co.algorithms == std::vector<std::string>{"cocluster"});

  auto rec = ExperimentSpec::from_config(parse("kind = full-partition\nn = 60\nk = 3\np = 0.5\nq = 0.01\n"));
  CHECK(rec.algorithms == std::vector<std::string>{"iscp"});
}

TEST_CASE("experiment spec rejects unknown or conflicting keys") {
  CHECK_THROWS_AS(ExperimentSpec::from_config(parse("kind = noise-sweep\nn = 600\nk = 3\np = 0.5\nQ_grid = 0\ntypo = 1\n")),
                  invalid_input);
  CHECK_THROWS_AS(ExperimentSpec::from_config(parse("kind = scaling\nn0 = 10\nk_grid = 2\np = 0.5\np_log_n = 1\n")),
                  invalid_input);
  CHECK_THROWS_AS(ExperimentSpec::from_config(parse("kind = nope\n")), invalid_input);
  CHECK_THROWS_AS(
      ExperimentSpec::from_config(parse("kind = single-cluster\nn = 60\nk = 3\np = 0.5\nalgorithms = magic\n")),
      invalid_input);
  CHECK_THROWS_AS(ExperimentSpec::from_config(parse("kind = single-cluster\nn = 60\nk = 3\np = 0.5\ntrials = 0\n")),
                  invalid_input);
}

TEST_CASE("trial seeds are distinct across grid points and trials") {
  std::set<std::uint64_t> seen;
  for (std::size_t g = 0; g < 10; ++g) {
    for (std::size_t t = 0; t < 10; ++t) seen.insert(trial_seed(42, g, t));
  }
  CHECK(seen.size() == 100);
}

TEST_CASE("noise sweep output is reproducible from the master seed") {
  auto spec = ExperimentSpec::from_config(
      parse("kind = noise-sweep\nn = 300\nk = 3\np = 0.5\nQ_grid = 0, 20\ntrials = 3\nmaster_seed = 7\n"));
  auto a = run(spec);
  auto b = run(spec);
  REQUIRE(a.size() == 6);
  CHECK(without_seconds(csv_of(a)) == without_seconds(csv_of(b)));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].grid == i / 3);
    CHECK(a[i].trial == i % 3);
    CHECK(a[i].success);
  }
  CHECK(a[0].q == 0.0);
  CHECK(a[3].q == Approx(20.0 / 200.0));
  CHECK(a[0].exact);

  spec.threads = 3;
  auto c = run(spec);
  CHECK(without_seconds(csv_of(a)) == without_seconds(csv_of(c)));

  spec.master_seed = 8;
  CHECK(without_seconds(csv_of(a)) != without_seconds(csv_of(run(spec))));
}

TEST_CASE("scaling grid runs scp and sc and skips sc as configured") {
  auto spec = ExperimentSpec::from_config(
      parse("kind = scaling\nk = 2\nn_grid = 100, 200\np = 0.5\nq = 0.01\ntrials = 2\nsc_trials = 1\n"));
  auto rows = run(spec);
  REQUIRE(rows.size() == 8);
  CHECK(rows[0].algorithm == "scp");
  CHECK(rows[1].algorithm == "sc");
  CHECK(rows[1].success);
  CHECK(rows[3].algorithm == "sc");
  CHECK_FALSE(rows[3].success);
  CHECK(rows[3].note == "skipped: sc_trials");
  auto sum = summarize(rows);
  REQUIRE(sum.size() == 4);
  CHECK(sum[1].algorithm == "sc");
  CHECK(sum[1].trials == 1);
  CHECK(sum[1].failures == 1);
}

TEST_CASE("isolated vertices fail a trial instead of aborting the run") {
  auto spec = ExperimentSpec::from_config(parse("kind = single-cluster\nn = 40\nk = 2\np = 0.02\ntrials = 2\n"));
  auto rows = run(spec);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK_FALSE(r.success);
    CHECK(r.note.rfind("generation:", 0) == 0);
  }
}

TEST_CASE("cocluster runs report row and column agreement") {
  auto spec = ExperimentSpec::from_config(
      parse("kind = cocluster\nrows = 120\ncols = 60\nk = 3\np_in = 0.6\np_out = 0.03\ntrials = 2\n"));
  auto rows = run(spec);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].note.rfind("rows=", 0) == 0);
  CHECK(rows[0].exact);
}

TEST_CASE("csv escaping and header") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  ExperimentRecord r;
  r.algorithm = "scp";
  r.note = "x,y";
  auto csv = csv_of({r});
  CHECK(csv.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(csv.find("\"x,y\"") != std::string::npos);
}

TEST_CASE("median and log-log slope") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK(std::isnan(median({})));
  std::vector<double> x{10, 100, 1000}, y{2, 200, 20000};
  CHECK(loglog_slope(x, y) == Approx(2.0));
  CHECK_THROWS_AS(loglog_slope({1}, {1}), invalid_input);
  CHECK_THROWS_AS(loglog_slope({1, 1}, {1, 2}), invalid_input);
  CHECK_THROWS_AS(loglog_slope({1, 2}, {0, 2}), invalid_input);
}
