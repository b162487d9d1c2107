#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "measles_fixture.hpp"
#include "sidiff/dataio.hpp"
#include "sidiff/simulate.hpp"

using namespace sidiff;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const auto dir = fs::temp_directory_path() / "sidiff_test_dataio" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

} // namespace

TEST(LoadCsv, WellFormedThreeRows) {
  const auto dir = scratch("three");
  write(dir / "cases.csv", "# comment\ntime,A,B\n0,2,1\n1,3,0\n2,5,4\n");
  write(dir / "pop.csv", "location,population\nB,50\nA,100\n");
  const auto t = io::load_csv(dir / "cases.csv", dir / "pop.csv");
  EXPECT_EQ(t.times.size(), 3u);
  EXPECT_EQ(t.locations, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(t.populations, (std::vector<double>{100, 50}));
  EXPECT_EQ(t.counts[0], (std::vector<double>{2, 3, 5}));
}

TEST(LoadCsv, ErrorsNameTheLine) {
  const auto dir = scratch("errors");
  write(dir / "pop.csv", "location,population\nA,100\n");
  write(dir / "neg.csv", "time,A\n0,2\n1,-3\n2,5\n");
  try {
    io::load_csv(dir / "neg.csv", dir / "pop.csv");
    FAIL() << "expected DataError";
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  write(dir / "text.csv", "time,A\n0,2\n1,abc\n2,5\n");
  EXPECT_THROW(io::load_csv(dir / "text.csv", dir / "pop.csv"), DataError);
  write(dir / "dup.csv", "time,A\n0,2\n0,3\n2,5\n");
  EXPECT_THROW(io::load_csv(dir / "dup.csv", dir / "pop.csv"), DataError);
  write(dir / "missing.csv", "time,A,B\n0,2,1\n1,3,1\n2,5,1\n");
  EXPECT_THROW(io::load_csv(dir / "missing.csv", dir / "pop.csv"), DataError);
  EXPECT_THROW(io::load_csv(dir / "nope.csv", dir / "pop.csv"), IoError);
}

TEST(LoadCsv, RoundTripIsBitExact) {
  const auto table = fixtures::measles_like_table();
  const auto dir = scratch("roundtrip");
  const auto [cases, pops] = io::series_csv(table);
  write(dir / "cases.csv", cases);
  write(dir / "pop.csv", pops);
  const auto back = io::load_csv(dir / "cases.csv", dir / "pop.csv");
  EXPECT_EQ(back.times, table.times);
  EXPECT_EQ(back.locations, table.locations);
  EXPECT_EQ(back.counts, table.counts);
  EXPECT_EQ(back.populations, table.populations);
}

TEST(CumulateNormalize, Arithmetic) {
  io::RawSeriesTable t;
  t.times = {0, 1, 2};
  t.locations = {"A", "Z"};
  t.counts = {{2, 3, 5}, {1, 0, 0}};
  t.populations = {100, 100};
  const auto p = io::cumulate_normalize(t);
  EXPECT_NEAR(p(0, 0), 0.02, 1e-15);
  EXPECT_NEAR(p(0, 1), 0.05, 1e-15);
  EXPECT_NEAR(p(0, 2), 0.10, 1e-15);
  EXPECT_EQ(p(1, 0), p(1, 1));
  EXPECT_EQ(p(1, 1), p(1, 2));
  io::NormalizeOptions small;
  small.K = 0.05;
  EXPECT_THROW(io::cumulate_normalize(t, small), DataError);
}

TEST(CumulateNormalize, MeaslesFixtureShape) {
  const auto table = fixtures::measles_like_table();
  ASSERT_EQ(table.locations.size(), 20u);
  ASSERT_EQ(table.times.size(), 546u);
  const auto p = io::cumulate_normalize(table);
  for (std::size_t i = 0; i < p.paths(); ++i) {
    for (std::size_t j = 0; j < p.times(); ++j) {
      ASSERT_GT(p(i, j), 0.0);
      ASSERT_LT(p(i, j), 0.25);
      if (j) {
        ASSERT_GE(p(i, j), p(i, j - 1));
      }
    }
  }
}

TEST(SuggestK, Examples) {
  PathSet p(TimeGrid(0, 1, 3), 1, Space::X, 0.25);
  p(0, 0) = 0.1;
  p(0, 1) = 0.238;
  p(0, 2) = 0.2;
  EXPECT_NEAR(io::suggest_K(p), 0.2499, 1e-12);
  PathSet c(TimeGrid(0, 1, 3), 1, Space::X, 1);
  for (std::size_t j = 0; j < 3; ++j)
    c(0, j) = 0.3;
  EXPECT_NEAR(io::suggest_K(c), 0.315, 1e-15);

  const RatePair rates(RateFunction::constant(0.8), RateFunction::constant(0.05), 200);
  const auto x = simulate_exact(rates, 20, TimeGrid(0, 0.1, 201), 10, 4);
  const double k = io::suggest_K(x);
  EXPECT_GT(x(0, 200), 199.9);
  EXPECT_NEAR(k / 200.0, 1.0, 0.05);
}

TEST(PathSetCsv, RoundTrip) {
  const RatePair rates(RateFunction::constant(0.4), RateFunction::constant(0.1), 200);
  const auto x = simulate_exact(rates, 20, TimeGrid(0, 0.01, 101), 4, 9);
  const auto dir = scratch("paths");
  io::write_atomic(dir / "p.csv", io::path_set_csv(x, {"abc", 9, "0"}));
  const auto back = io::read_path_set_csv(dir / "p.csv", 200);
  ASSERT_EQ(back.paths(), 4u);
  ASSERT_EQ(back.times(), 101u);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 101; ++j)
      EXPECT_EQ(back(i, j), x(i, j));
  EXPECT_FALSE(fs::exists(dir / "p.csv.tmp"));
}

TEST(Analyze, MeaslesSignature) {
  const auto table = fixtures::measles_like_table();
  io::AnalysisOptions opt;
  opt.normalize.K = 0.25;
  const auto r = io::analyze(table, opt);
  const auto &lam = r.estimate.lambda_hat;
  const auto &sig = r.estimate.sigma2_raw;
  const std::size_t n = lam.size();
  const std::size_t head = std::max<std::size_t>(n / 20, 3);
  double lam_head = 0, lam_tail = 0, sig_head = 0, sig_tail = 0;
  for (std::size_t j = 0; j < head; ++j) {
    lam_head += lam[j] / head;
    sig_head += sig[j] / head;
  }
  const std::size_t tail_start = n - n / 3;
  for (std::size_t j = tail_start; j < n; ++j) {
    lam_tail += lam[j] / (n - tail_start);
    sig_tail += sig[j] / (n - tail_start);
  }
  EXPECT_GE(lam_head, 5 * lam_tail);
  EXPECT_LT(sig_tail, sig_head);
  EXPECT_GT(r.suggested_K, 0.0);
}
