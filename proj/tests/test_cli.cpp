// Drives the real cqsc binary; its path arrives as the first argument.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cqsc/records.hpp"

using namespace cqsc;

namespace {

std::string g_cli;

struct Result {
  int code = -1;
  std::string out;
  std::vector<std::string> lines() const {
    std::vector<std::string> v;
    std::istringstream in(out);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
  }
};

Result cli(const std::string& args) {
  const std::string cmd = "'" + g_cli + "' " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<json> records(const Result& r) {
  std::vector<json> v;
  for (const auto& l : r.lines()) v.push_back(json::parse(l));
  return v;
}

void expect_valid(const Result& r) {
  for (const auto& rec : records(r)) {
    const auto errs = validate_record(rec);
    EXPECT_TRUE(errs.empty()) << rec.dump() << (errs.empty() ? "" : ": " + errs.front());
  }
}

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("cqsc_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

}  // namespace

TEST(Simulate, WorkedMessageDecodes) {
  const auto r = cli("simulate --controllers 1 --message 100101 --seed 7 --format json --no-timing");
  ASSERT_EQ(r.code, 0);
  const auto recs = records(r);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0]["decoded_message"], "100101");
  EXPECT_EQ(recs[0]["timing_ms"], 0.0);
  expect_valid(r);
}

TEST(Simulate, EmptyMessageThreeControllers) {
  const auto r = cli("simulate --controllers 3 --message \"\" --format json");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(records(r)[0]["decoded_message"], "");
  expect_valid(r);
}

TEST(Simulate, HexMessage) {
  const auto r = cli("simulate --message 0xA5 --format json --seed 3");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(records(r)[0]["decoded_message"], "10100101");
}

TEST(Simulate, UsageErrorsExitOne) {
  EXPECT_EQ(cli("simulate --controllers 0").code, 1);
  EXPECT_EQ(cli("simulate --message 10a1").code, 1);
  EXPECT_EQ(cli("simulate --message 101").code, 1);
  EXPECT_EQ(cli("simulate --message 0xZZ").code, 1);
  EXPECT_EQ(cli("simulate --format yaml").code, 1);
  EXPECT_EQ(cli("simulate --check-fraction 1.5").code, 1);
  EXPECT_EQ(cli("simulate --triples 2 --message 1111").code, 1);
  EXPECT_EQ(cli("simulate --attack laser").code, 1);
  EXPECT_EQ(cli("simulate --bogus").code, 1);
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
}

TEST(Simulate, HelpExitsZero) { EXPECT_EQ(cli("--help").code, 0); }

TEST(Simulate, AbortExitsTwo) {
  const auto r = cli("simulate --attack measure --triples 400 --message 1010 --format json --seed 5");
  ASSERT_EQ(r.code, 2);
  const auto rec = records(r).at(0);
  EXPECT_EQ(rec["aborted_at"], "first_check");
  EXPECT_TRUE(rec["decoded_message"].is_null());
  expect_valid(r);

  const auto d = cli("simulate --attack intercept --phase return --decoys 200 --message 10 --format json --seed 5");
  ASSERT_EQ(d.code, 2);
  EXPECT_EQ(records(d).at(0)["aborted_at"], "decoy_check");
}

TEST(Simulate, TextAndCsvFormats) {
  const auto t = cli("simulate --message 0110 --seed 2 --transcript");
  ASSERT_EQ(t.code, 0);
  EXPECT_NE(t.out.find("decoded          0110"), std::string::npos);
  EXPECT_NE(t.out.find("receipt_confirmation"), std::string::npos);
  const auto c = cli("simulate --message 0110 --seed 2 --format csv");
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(c.lines().size(), 2u);
}

TEST(Simulate, ConfigFileAndOverrides) {
  const auto cfg = temp_file("ok.json", R"({"controllers": 2, "message": "1101", "seed": 11, "decoys": 3})");
  const auto r = cli("simulate --format json --config " + cfg);
  ASSERT_EQ(r.code, 0);
  auto rec = records(r).at(0);
  EXPECT_EQ(rec["config"]["n_controllers"], 2);
  EXPECT_EQ(rec["config"]["n_decoys"], 3);
  EXPECT_EQ(rec["seed"], 11);
  EXPECT_EQ(rec["decoded_message"], "1101");

  const auto o = cli("simulate --format json --controllers 4 --seed 12 --config " + cfg);
  ASSERT_EQ(o.code, 0);
  rec = records(o).at(0);
  EXPECT_EQ(rec["config"]["n_controllers"], 4);
  EXPECT_EQ(rec["seed"], 12);
  EXPECT_EQ(rec["message"], "1101");

  EXPECT_EQ(cli("simulate --config " + temp_file("bad.json", R"({"controlers": 2})")).code, 1);
  EXPECT_EQ(cli("simulate --config " + temp_file("type.json", R"({"seed": "x"})")).code, 1);
  EXPECT_EQ(cli("simulate --config " + temp_file("trials.json", R"({"trials": 4})")).code, 1);
  EXPECT_EQ(cli("simulate --config /nonexistent/cqsc.json").code, 1);
}

TEST(Attack, ReportsAndDeterminism) {
  const std::string args = "attack --attack intercept --trials 1 --seed 99 --format json --no-timing";
  const auto a = cli(args);
  const auto b = cli(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  expect_valid(a);
  EXPECT_EQ(records(a).at(0)["attack"], "intercept");
}

TEST(Attack, ThreadCountDoesNotChangeOutput) {
  const std::string base = "attack --attack entangle --trials 40 --triples 20 --seed 3 --format json --no-timing";
  EXPECT_EQ(cli(base + " --threads 1").out, cli(base + " --threads 3").out);
}

TEST(Attack, MeasureResendRates) {
  const auto r = cli("attack --attack measure --trials 100 --triples 200 --seed 1 --format json --no-timing");
  ASSERT_EQ(r.code, 0);
  const auto rec = records(r).at(0);
  EXPECT_EQ(rec["per_basis_error"]["z"]["mean"], 0.0);
  EXPECT_NEAR(rec["first_check_error_rate"]["mean"].get<double>(), 0.25, 0.02);
  EXPECT_EQ(rec["detection_probability"], 1.0);
}

TEST(Attack, SweepCsvAndUsageErrors) {
  const auto r = cli("attack --attack measure --trials 20 --sweep 10,50 --format csv --seed 2");
  ASSERT_EQ(r.code, 0);
  const auto lines = r.lines();
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], detection_csv_header());
  EXPECT_EQ(lines[1].rfind("measure,distribution,10,20,", 0), 0u);
  EXPECT_EQ(cli("attack --attack photon").code, 1);
  EXPECT_EQ(cli("attack --attack measure --phase sideways").code, 1);
  EXPECT_EQ(cli("attack --attack measure --trials 0").code, 1);
  EXPECT_EQ(cli("attack --attack measure --message-bits 3").code, 1);
}

TEST(Plan, ListingsAndCounts) {
  const auto two = cli("plan --controllers 2 --format json");
  ASSERT_EQ(two.code, 0);
  auto rec = records(two).at(0);
  EXPECT_EQ(rec["ghz_states"], 2);
  EXPECT_EQ(rec["triples"][0][0]["tag"], "p'1");
  EXPECT_EQ(rec["triples"][0][1]["tag"], "a");
  EXPECT_EQ(rec["triples"][0][2]["tag"], "p'2");
  EXPECT_EQ(rec["triples"][1][0]["tag"], "p1");
  EXPECT_EQ(rec["triples"][1][1]["tag"], "b");
  EXPECT_EQ(rec["triples"][1][2]["tag"], "p2");
  rec = records(cli("plan --controllers 3 --format json")).at(0);
  EXPECT_EQ(rec["ghz_states"], 2);
  EXPECT_EQ(rec["triples"][0][2]["tag"], "p2");
  EXPECT_EQ(rec["triples"][1][2]["tag"], "p3");
  EXPECT_EQ(records(cli("plan --controllers 4 --format json")).at(0)["ghz_states"], 3);
  const auto text = cli("plan --controllers 5");
  ASSERT_EQ(text.code, 0);
  EXPECT_NE(text.out.find("GHZ-like states 3"), std::string::npos);
  EXPECT_EQ(cli("plan --controllers 0").code, 1);
  EXPECT_EQ(cli("plan").code, 1);
}

TEST(Tables, AllRowsPass) {
  const auto t = cli("tables");
  ASSERT_EQ(t.code, 0);
  EXPECT_NE(t.out.find("N=2: 16/16 rows pass"), std::string::npos);
  EXPECT_NE(t.out.find("N=3: 16/16 rows pass"), std::string::npos);
  EXPECT_NE(t.out.find("efficiency(2, 3, 1) = 0.5"), std::string::npos);
  const auto j = cli("tables --format json");
  ASSERT_EQ(j.code, 0);
  expect_valid(j);
  std::size_t rows = 0;
  for (const auto& rec : records(j)) {
    if (rec["record"] == "table_row") {
      ++rows;
      EXPECT_EQ(rec["pass"], true);
    }
  }
  EXPECT_EQ(rows, 32u);
}

TEST(Determinism, RepeatedInvocationsAreByteIdentical) {
  for (const std::string args :
       {"simulate --controllers 3 --message 110100 --seed 42 --format json --no-timing",
        "simulate --controllers 1 --message 100101 --seed 7 --format csv", "plan --controllers 6 --format json",
        "tables --format json",
        "attack --attack entangle --trials 30 --seed 5 --format json --no-timing --sweep 10,20"}) {
    const auto a = cli(args);
    const auto b = cli(args);
    EXPECT_EQ(a.code, b.code) << args;
    EXPECT_EQ(a.out, b.out) << args;
    EXPECT_FALSE(a.out.empty()) << args;
  }
}

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path to cqsc>\n");
    return 2;
  }
  g_cli = argv[1];
  return RUN_ALL_TESTS();
}
