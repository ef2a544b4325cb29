#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "oracles.hpp"
#include "rankone/error.hpp"
#include "rankone/tower.hpp"

using namespace rankone;

namespace {

std::vector<int> codes_of(const TowerModel& m) { return {m.codes().begin(), m.codes().end()}; }

constexpr int b = 0;
constexpr int sp1 = -1;
constexpr int sp2 = -2;

}  // namespace

TEST_CASE("label words") {
  const auto odo = Construction::odometer(2, 1);
  CHECK(codes_of(build_labels(odo, 1, 2)) == std::vector<int>{0, 1, 0, 1});

  const auto chacon = Construction::chacon();
  CHECK(codes_of(build_labels(chacon, 1, 2)) == std::vector<int>{b, b, sp1, b});
  const std::vector<int> word13{b, b, sp1, b, b, b, sp1, b, sp2, b, b, sp1, b};
  const TowerModel m = build_labels(chacon, 1, 3);
  CHECK(codes_of(m) == word13);
  CHECK(m.size() == 13);
  CHECK(m.copies() == 9);
  CHECK(m.spacer_count() == 4);
  CHECK(m.label(8).is_spacer());
  CHECK(m.label(8).spacer_stage() == 2);

  CHECK(codes_of(build_labels(chacon, 3, 3)) == std::vector<int>(oracle::word(chacon, 3, 3)));
  CHECK_THROWS_AS(build_labels(chacon, 3, 2), InvalidArgument);
  CHECK_THROWS_AS(build_labels(chacon, 0, 2), InvalidArgument);
}

TEST_CASE("labels agree with the recursive word oracle") {
  for (const char* name : {"odometer2", "odometer3", "chacon", "flat3", "class4"}) {
    const auto c = Construction::preset(name);
    for (int j = 1; j <= 3; ++j) {
      for (int K = j; K <= j + 5; ++K) REQUIRE(codes_of(build_labels(c, j, K)) == oracle::word(c, j, K));
    }
  }
  const auto r = Construction::random_bounded(2, 4, 3, 99);
  CHECK(codes_of(build_labels(r, 2, 6)) == oracle::word(r, 2, 6));
}

TEST_CASE("prefix embedding and counting") {
  for (const char* name : {"odometer2", "chacon", "flat3", "class4"}) {
    const auto c = Construction::preset(name);
    for (int K = 2; K <= 9; ++K) {
      const TowerModel small = build_labels(c, 2, K);
      const TowerModel big = build_labels(c, 2, K + 1);
      REQUIRE(std::equal(small.codes().begin(), small.codes().end(), big.codes().begin()));
      const LevelMeasures mu = level_measures(big);
      for (auto count : mu.counts) REQUIRE(count == big.copies());
      REQUIRE(mu.spacer_count == big.size() - big.reference_levels() * big.copies());
    }
  }
}

TEST_CASE("level measures") {
  const LevelMeasures chacon = level_measures(build_labels(Construction::chacon(), 1, 3));
  CHECK(chacon.counts == std::vector<std::uint64_t>{9});
  CHECK(chacon.total == 13);
  CHECK(chacon.value(0) == doctest::Approx(9.0 / 13.0));
  CHECK(chacon.spacer_value() == doctest::Approx(4.0 / 13.0));

  const LevelMeasures odo = level_measures(build_labels(Construction::odometer(2, 1), 1, 2));
  CHECK(odo.value(0) == 0.5);
  CHECK(odo.value(1) == 0.5);

  const LevelMeasures flat = level_measures(build_labels(Construction::flat3(), 4, 4));
  for (std::size_t a = 0; a < flat.counts.size(); ++a) CHECK(flat.value(a) * flat.total == doctest::Approx(1.0));
}

TEST_CASE("depth selection and tail mass") {
  const auto c = Construction::chacon();
  CHECK(depth_for_levels(c, 1, 10000) == 10);
  CHECK(depth_for_levels(c, 12, 10) == 12);
  CHECK(tail_mass(Construction::odometer(2), 5) == 0.0);
  const double t = tail_mass(c, 8);
  CHECK(t > 0.0);
  CHECK(t < 1.0);
  CHECK(tail_mass(c, 10) < t);
  // Exact value for chacon: 1 - prod_{m=K}^{K+4} (3 L_m / L_{m+1}).
  const auto L = oracle::levels(c, 14);
  double keep = 1.0;
  for (int m = 8; m < 13; ++m) {
    keep *= 3.0 * static_cast<double>(L[static_cast<std::size_t>(m - 1)]) / static_cast<double>(L[static_cast<std::size_t>(m)]);
  }
  CHECK(t == doctest::Approx(1.0 - keep).epsilon(1e-9));
}

TEST_CASE("correlation examples") {
  const auto chacon = Construction::chacon();
  const CorrelationMatrix c = correlation_matrix(chacon, 1, 3, 1);
  CHECK(c.count(0, 0) == 4);
  CHECK(c.value(0, 0) == doctest::Approx(4.0 / 13.0));
  CHECK(c.error_bound() >= 1.0 / 13.0);

  const CorrelationMatrix odo = correlation_matrix(Construction::odometer(2, 1), 1, 2, 1);
  CHECK(odo.value(0, 1) == 0.5);
  CHECK(odo.count(1, 0) == 1);

  const CorrelationMatrix zero = correlation_matrix(chacon, 2, 7, 0);
  const LevelMeasures mu = level_measures(build_labels(chacon, 2, 7));
  for (std::uint32_t a = 0; a < 4; ++a) {
    for (std::uint32_t bb = 0; bb < 4; ++bb) {
      CHECK(zero.value(a, bb) == doctest::Approx(a == bb ? mu.value(a) : 0.0));
    }
  }
  CHECK(zero.error_bound() == doctest::Approx(zero.tail()));

  CHECK_THROWS_AS(correlation_matrix(chacon, 1, 3, 13), DepthTooShallow);
  CHECK_THROWS_AS(correlation_matrix(chacon, 1, 3, -13), DepthTooShallow);
  CHECK_NOTHROW(correlation_matrix(chacon, 1, 3, -12));
  CHECK_THROWS_AS(c.count(5, 0), InvalidArgument);
}

TEST_CASE("correlation counts match brute force, dense and sparse") {
  for (const char* name : {"chacon", "class4", "flat3"}) {
    const auto c = Construction::preset(name);
    for (int j : {2, 5}) {
      const int K = j + 3;
      const auto w = oracle::word(c, j, K);
      const TowerModel model = build_labels(c, j, K);
      for (std::int64_t n : {-7, -1, 0, 2, 11}) {
        const CorrelationMatrix m = correlate(c, model, n);
        CHECK(m.is_dense() == (m.levels() < kDenseCorrelationLimit));
        for (std::uint32_t a = 0; a < m.levels(); a += 3) {
          for (std::uint32_t bb = 0; bb < m.levels(); bb += 2) {
            REQUIRE(m.count(a, bb) == oracle::pair_count(w, n, static_cast<int>(a), static_cast<int>(bb)));
          }
        }
      }
    }
  }
}

TEST_CASE("row sums lose at most |n| pairs") {
  for (const char* name : {"odometer2", "chacon", "flat3", "class4"}) {
    const auto c = Construction::preset(name);
    const TowerModel model = build_labels(c, 2, 9);
    const LevelMeasures mu = level_measures(model);
    for (std::int64_t n = -20; n <= 20; ++n) {
      const CorrelationMatrix m = correlate(c, model, n);
      for (std::uint32_t a = 0; a < m.levels(); ++a) {
        std::uint64_t row = 0;
        for (std::uint32_t bb = 0; bb <= m.levels(); ++bb) row += m.count(a, bb);
        REQUIRE(row <= mu.counts[a]);
        REQUIRE(mu.counts[a] - row <= static_cast<std::uint64_t>(std::llabs(n)));
      }
    }
  }
}

TEST_CASE("correlation csv") {
  const CorrelationMatrix m = correlation_matrix(Construction::odometer(2, 1), 1, 2, 1);
  std::ostringstream os;
  write_correlation_csv(os, m);
  const std::string text = os.str();
  CHECK(text.rfind("A,B,value,error\n", 0) == 0);
  CHECK(text.find("0,1,0.5,") != std::string::npos);
  CHECK(text.find("1,0,0.25,") != std::string::npos);
  CHECK(text.find('\r') == std::string::npos);
}

TEST_CASE("orbits") {
  const auto chacon = Construction::chacon();
  const auto o = orbit_labels(chacon, 1, 3, 0, 3);
  REQUIRE(o.size() == 3);
  CHECK(o[0] == LevelLabel::reference(0));
  CHECK(o[1] == LevelLabel::spacer(1));
  CHECK(o[2] == LevelLabel::reference(0));

  const auto odo = orbit_labels(Construction::odometer(2, 1), 1, 4, 0, 4);
  CHECK(odo == std::vector<LevelLabel>{LevelLabel::reference(1), LevelLabel::reference(0), LevelLabel::reference(1),
                                       LevelLabel::reference(0)});

  CHECK_THROWS_AS(orbit_labels(chacon, 1, 3, 0, 13), DepthTooShallow);
  CHECK_THROWS_AS(orbit_labels(chacon, 1, 3, 10, 3), DepthTooShallow);
  CHECK_NOTHROW(orbit_labels(chacon, 1, 3, 10, 2));

  const TowerModel model = build_labels(chacon, 2, 8);
  const auto whole = orbit_labels(model, 5, 40);
  const auto first = orbit_labels(model, 5, 17);
  const auto second = orbit_labels(model, 22, 23);
  std::vector<LevelLabel> joined(first);
  joined.insert(joined.end(), second.begin(), second.end());
  CHECK(joined == whole);
}
