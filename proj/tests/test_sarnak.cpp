#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rankone/error.hpp"
#include "rankone/sarnak.hpp"

using namespace rankone;

namespace {

// Return times L_j and L_j + d at every stage, so every level offset is a multiple of d.
Construction d_factor(int d) { return Construction::periodic(d - 1, {StageParams(2, {0, d})}); }

Observable ones_on_E(int stage, std::uint64_t levels, std::uint64_t d) {
  std::vector<std::uint64_t> support;
  for (std::uint64_t a = 0; a < levels; a += d) support.push_back(a);
  return Observable::indicator(stage, levels, support);
}

std::int64_t brute_sum(const std::vector<int>& word, const Observable& f, std::uint64_t start, std::uint64_t N) {
  std::int64_t s = 0;
  for (std::uint64_t i = 1; i <= N; ++i) {
    const int code = word[start + i];
    if (code >= 0) s += f.numerator(static_cast<std::uint64_t>(code)) * oracle::mobius(i);
  }
  return s;
}

}  // namespace

TEST_CASE("observables") {
  const Observable f(2, {1, -3, 0, 2}, 4);
  CHECK(f.levels() == 4);
  CHECK(f.coefficient(1) == Rational(-3, 4));
  CHECK(f.sup_norm() == Rational(3, 4));
  const auto ind = Observable::indicator(2, 4, {0, 3});
  CHECK(ind.numerators() == std::vector<std::int64_t>{1, 0, 0, 1});
  CHECK_THROWS_AS(Observable::indicator(2, 4, {4}), InvalidArgument);
  CHECK_THROWS_AS(Observable(0, {1}), InvalidArgument);
  CHECK_THROWS_AS(Observable(1, {1}, 0), InvalidArgument);
  CHECK_THROWS_AS(Observable(1, {}), InvalidArgument);
}

TEST_CASE("mobius weighted sums") {
  const auto chacon = Construction::chacon();
  const MobiusTable table(1000);
  const auto base = Observable::indicator(1, 1, {0});
  CHECK(mobius_weighted_sum(chacon, base, 0, 10, 3, table).total == Rational(-1));
  CHECK(mobius_weighted_sum(chacon, base, 0, 1, 3, table).total == Rational(1));  // level 1 is b
  CHECK(mobius_weighted_sum(chacon, base, 1, 1, 3, table).total == Rational(0));  // level 2 is a spacer

  // A constant on every stage-j level still vanishes on later spacers, so a
  // spacer-free construction is needed to reduce to the Mertens sum.
  const auto odo = Construction::odometer(3);
  const Observable kappa(2, {5, 5, 5}, 2);
  const auto s = mobius_weighted_sum(odo, kappa, 0, 500, 7, table);
  CHECK(s.total == Rational(5, 2) * table.mertens(500));

  CHECK_THROWS_AS(mobius_weighted_sum(chacon, base, 0, 13, 3, table), DepthTooShallow);
  CHECK_THROWS_AS(mobius_weighted_sum(chacon, base, 0, 2000, 9, table), InvalidArgument);
  const TowerModel stage1 = build_labels(chacon, 1, 5);
  CHECK_THROWS_AS(mobius_weighted_sum(stage1, Observable::indicator(2, 4, {0}), 0, 10, table), InvalidArgument);
  CHECK_THROWS_AS(mobius_weighted_sum(chacon, Observable::indicator(2, 5, {0}), 0, 10, 5, table), InvalidArgument);
}

TEST_CASE("mobius sums match brute force and are linear") {
  const auto c = Construction::random_bounded(1, 4, 3, 8);
  const int j = 2, K = 8;
  const TowerModel model = build_labels(c, j, K);
  const auto word = oracle::word(c, j, K);
  const MobiusTable table(3000);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> coef(-4, 4);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::int64_t> a(model.reference_levels()), b(a.size()), ab(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = coef(rng);
      b[i] = coef(rng);
      ab[i] = 2 * a[i] - 3 * b[i];
    }
    const std::uint64_t N = 1000 + 100 * static_cast<std::uint64_t>(t);
    const auto sa = mobius_weighted_sum(model, Observable(j, a), 7, N, table).total;
    const auto sb = mobius_weighted_sum(model, Observable(j, b), 7, N, table).total;
    const auto sab = mobius_weighted_sum(model, Observable(j, ab), 7, N, table).total;
    REQUIRE(sa == Rational(brute_sum(word, Observable(j, a), 7, N)));
    REQUIRE(sab == 2 * sa - 3 * sb);
  }
}

TEST_CASE("decay trace checkpoints and csv") {
  const MobiusTable table(20000);
  const auto sum = mobius_weighted_sum(Construction::chacon(), Observable::indicator(1, 1, {0}), 0, 12345, 10, table);
  REQUIRE(sum.checkpoints.size() == 4);
  CHECK(sum.checkpoints[0].n == 100);
  CHECK(sum.checkpoints[2].n == 10000);
  CHECK(sum.checkpoints[3].n == 12345);
  CHECK(sum.checkpoints[3].sum == sum.total);
  std::ostringstream os;
  write_decay_csv(os, sum);
  CHECK(os.str().rfind("N,S_N,S_N/N\n100,", 0) == 0);
}

TEST_CASE("compact factor") {
  const auto c4 = compact_factor(Construction::class4(), 20, 10);
  CHECK(c4.d == 2);
  CHECK(c4.consistent_from == 1);
  for (const auto& st : c4.stages) {
    CHECK(st.divisible);
    for (const auto& o : st.offsets) CHECK(o % 2 == 0);
  }
  CHECK(c4.stages[0].offsets == std::vector<BigInt>{0, 2});
  CHECK(c4.stages[1].offsets == std::vector<BigInt>{0, 6});
  CHECK(c4.stages[2].offsets == std::vector<BigInt>{0, 14});
  for (std::uint64_t l = 0; l < c4.classes.size(); ++l) REQUIRE(c4.class_of(l) == l % 2);

  const auto ch = compact_factor(Construction::chacon(), 20, 6);
  CHECK(ch.d == 1);
  CHECK(std::all_of(ch.classes.begin(), ch.classes.end(), [](auto c) { return c == 0; }));

  CHECK_THROWS_AS(compact_factor(Construction::odometer(2), 20, 6), OdometerCase);

  // Odd offsets early on are tolerated below the depth, rejected at or above it.
  const auto late = Construction::periodic(1, {StageParams(2, {0, 2})}, {StageParams(2, {1, 1})});
  CHECK(compact_factor(late, 20, 6).consistent_from == 2);
  const StageParams even(2, {0, 2});
  const auto broken = Construction::periodic(1, {even}, {even, even, even, even, StageParams(3, {1, 0, 1})});
  CHECK_THROWS_AS(compact_factor(broken, 4, 5), ConsistencyFailure);
  CHECK(compact_factor(broken, 4, 6).consistent_from == 6);
}

TEST_CASE("factor cyclicity on the label array") {
  for (int d : {2, 3, 5}) {
    const auto c = d == 2 ? Construction::class4() : d_factor(d);
    const int j = 2;
    const int K = depth_for_levels(c, j, 10000);
    const auto part = compact_factor(c, 20, K);
    REQUIRE(part.d == d);
    const auto check = verify_factor_cyclicity(part, build_labels(c, j, K));
    CHECK(check.ok());
    CHECK(check.transitions == part.classes.size() - 1);
  }
  const auto part = compact_factor(Construction::class4(), 20, 8);
  CHECK_THROWS_AS(verify_factor_cyclicity(part, build_labels(Construction::class4(), 1, 9)), InvalidArgument);
}

TEST_CASE("telescoping identity examples") {
  const auto c4 = Construction::class4();
  const int K = 6;
  const TowerModel model = build_labels(c4, 2, K);
  const auto part = compact_factor(c4, 20, K);
  const MobiusTable table(100);
  const auto f = ones_on_E(2, 6, 2);

  const auto t = telescope_identity_check(model, part, f, 2, 0, 4, table);
  CHECK(t.lhs == Rational(-1));
  CHECK(t.leading == Rational(0));
  CHECK(t.correction == Rational(1));
  CHECK(t.rhs == Rational(-1));
  CHECK(t.equal);

  const auto zero = telescope_identity_check(model, part, Observable(2, {0, 0, 0, 0, 0, 0}), 2, 0, 50, table);
  CHECK(zero.lhs == Rational(0));
  CHECK(zero.equal);

  const auto c3 = d_factor(3);
  const TowerModel m3 = build_labels(c3, 3, 6);
  const auto p3 = compact_factor(c3, 20, 6);
  const auto t3 = telescope_identity_check(m3, p3, ones_on_E(3, 21, 3), 3, 0, 9, table);
  CHECK(t3.lhs == Rational(0));
  CHECK(t3.leading == Rational(1));
  CHECK(t3.correction == Rational(1));
  CHECK(t3.equal);

  CHECK_THROWS_AS(telescope_identity_check(model, part, f, 4, 0, 4, table), InvalidArgument);
  CHECK_THROWS_AS(telescope_identity_check(model, part, f, 3, 0, 4, table), InvalidArgument);
  CHECK_THROWS_AS(telescope_identity_check(model, part, f, 2, 1, 4, table), InvalidArgument);
  CHECK_THROWS_AS(telescope_identity_check(model, part, Observable::indicator(2, 6, {1}), 2, 0, 4, table),
                  InvalidArgument);
  CHECK_THROWS_AS(telescope_identity_check(model, part, f, 2, 0, 200, table), DepthTooShallow);
}

TEST_CASE("telescoping identity on random observables") {
  std::mt19937_64 rng(77);
  for (int d : {2, 3, 5}) {
    const auto c = d == 2 ? Construction::class4() : d_factor(d);
    const int j = 3;
    const std::uint64_t N = 3000;
    const int K = depth_for_levels(c, j, N + 1000);
    const TowerModel model = build_labels(c, j, K);
    const auto part = compact_factor(c, 20, K);
    const MobiusTable table(N);
    std::uniform_int_distribution<std::int64_t> coef(-9, 9);
    for (int t = 0; t < 20; ++t) {
      std::vector<std::int64_t> num(model.reference_levels(), 0);
      for (std::size_t a = 0; a < num.size(); a += static_cast<std::size_t>(d)) num[a] = coef(rng);
      const std::uint64_t start = static_cast<std::uint64_t>(d) * (static_cast<std::uint64_t>(t) * 7);
      const auto r = telescope_identity_check(model, part, Observable(j, num, 3), d, start, N, table);
      REQUIRE(r.equal);
      REQUIRE(r.lhs == r.leading - r.correction);
    }
  }
}

TEST_CASE("composite orders chain prime extensions") {
  const auto c = d_factor(6);
  const int j = 2;
  const int K = depth_for_levels(c, j, 5000);
  const TowerModel model = build_labels(c, j, K);
  const auto part = compact_factor(c, 20, K);
  REQUIRE(part.d == 6);
  const MobiusTable table(4000);
  const auto f = ones_on_E(j, model.reference_levels(), 6);
  const auto chain = composite_extension_check(model, part, f, 6, 0, 4000, table);
  REQUIRE(chain.size() == 2);
  CHECK(chain[0].d == 2);
  CHECK(chain[0].stride == 1);
  CHECK(chain[1].d == 3);
  CHECK(chain[1].stride == 2);
  CHECK(chain[1].N == 2000);
  for (const auto& r : chain) CHECK(r.equal);
  CHECK_THROWS_AS(composite_extension_check(model, part, f, 4, 0, 4000, table), InvalidArgument);
}

TEST_CASE("prime extension report") {
  const auto c4 = Construction::class4();
  const TowerModel model = build_labels(c4, 3, 6);
  const auto part = compact_factor(c4, 20, 6);
  const MobiusTable table(100);
  const auto f = ones_on_E(3, 14, 2);

  const auto one = prime_extension_report(model, part, f, 2, 0, 16, 1, table);
  const auto tel = telescope_identity_check(model, part, f, 2, 0, 16, table);
  CHECK(one.total == tel.lhs);
  CHECK(one.unfoldings[0].term == tel.leading);
  CHECK(one.unfoldings[0].remainder * table(2) == tel.correction);
  CHECK(one.identity_holds);

  const auto two = prime_extension_report(model, part, f, 2, 0, 16, 2, table);
  REQUIRE(two.unfoldings.size() == 2);
  CHECK(two.unfoldings[1].crude_bound == 4.0);
  CHECK(two.identity_holds);
  CHECK(two.bound_holds);
  const Rational abs_total = two.total < 0 ? -two.total : two.total;
  Rational cover = 4;
  for (const auto& u : two.unfoldings) cover += u.term < 0 ? -u.term : u.term;
  CHECK(abs_total <= cover);

  const auto deep = prime_extension_report(model, part, f, 2, 0, 16, 6, table);
  CHECK(deep.unfoldings.back().crude_bound < 1.0);
  CHECK(deep.unfoldings.back().term == Rational(0));
  CHECK(deep.unfoldings.back().remainder == Rational(0));
  Rational sum = 0;
  for (const auto& u : deep.unfoldings) sum += u.term;
  CHECK(sum == deep.total);

  CHECK_THROWS_AS(prime_extension_report(model, part, f, 2, 0, 16, 0, table), InvalidArgument);
}

TEST_CASE("observable decomposition") {
  const auto c4 = Construction::class4();
  const auto part = compact_factor(c4, 20, 6);
  const Observable all(3, std::vector<std::int64_t>(14, 1));
  const auto parts = decompose_observable(all, part);
  REQUIRE(parts.size() == 2);
  for (std::uint64_t a = 0; a < 14; ++a) {
    CHECK(parts[0].numerator(a) == (a % 2 == 0 ? 1 : 0));
    CHECK(parts[1].numerator(a) == (a % 2 == 1 ? 1 : 0));
  }

  const auto base = decompose_observable(Observable::indicator(1, 2, {0}), part);
  CHECK(base[1].numerators() == std::vector<std::int64_t>{0, 0});

  const auto trivial = decompose_observable(all, compact_factor(Construction::chacon(), 20, 4));
  REQUIRE(trivial.size() == 1);
  CHECK(trivial[0].numerators() == all.numerators());

  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::int64_t> coef(-5, 5);
  std::vector<std::int64_t> num(14);
  for (auto& x : num) x = coef(rng);
  const Observable F(3, num, 7);
  const auto fs = decompose_observable(F, part);
  for (std::uint64_t a = 0; a < 14; ++a) CHECK(fs[0].coefficient(a) + fs[1].coefficient(a) == F.coefficient(a));

  const auto late = Construction::periodic(1, {StageParams(2, {0, 2})}, {StageParams(2, {1, 1})});
  CHECK_THROWS_AS(decompose_observable(Observable::indicator(1, 2, {0}), compact_factor(late, 20, 6)),
                  ConsistencyFailure);
}
