#include <doctest.h>

#include <cmath>

#include "schwarz/instances.hpp"
#include "schwarz/measures.hpp"
#include "schwarz/spectral.hpp"

using namespace schwarz;

TEST_CASE("measure construction validates weights") {
  Vector bad(2);
  bad << 0.5, 0.6;
  CHECK_THROWS_AS(DiscreteMeasure{bad}, std::invalid_argument);
  Vector nonpos(2);
  nonpos << 1.0, 0.0;
  CHECK_THROWS_AS(DiscreteMeasure{nonpos}, std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMeasure{Vector()}, std::invalid_argument);
}

TEST_CASE("point mass always samples index 0") {
  const DiscreteMeasure measure(Vector::Ones(1));
  RandomStream stream(1);
  for (int i = 0; i < 100; ++i) CHECK(sample(measure, stream) == 0);
}

TEST_CASE("empirical frequencies match the weights") {
  const int draws = 1000000;
  SUBCASE("uniform") {
    const DiscreteMeasure measure(Vector::Constant(2, 0.5));
    RandomStream stream(42);
    int count0 = 0;
    for (int i = 0; i < draws; ++i) count0 += sample(measure, stream) == 0;
    CHECK(std::abs(count0 / double(draws) - 0.5) <= 0.002);
  }
  SUBCASE("skewed, with a chi-square statistic") {
    Vector w(2);
    w << 0.3, 0.7;
    const DiscreteMeasure measure(w);
    RandomStream stream(42);
    int count0 = 0;
    for (int i = 0; i < draws; ++i) count0 += sample(measure, stream) == 0;
    const double f0 = count0 / double(draws);
    CHECK(std::abs(f0 - 0.3) <= 0.002);
    const double e0 = 0.3 * draws, e1 = 0.7 * draws;
    const double chi2 = (count0 - e0) * (count0 - e0) / e0 +
                        (draws - count0 - e1) * (draws - count0 - e1) / e1;
    CHECK(chi2 < 16.0); // df = 1; far beyond any reasonable quantile
  }
}

TEST_CASE("expect computes exact weighted sums") {
  Vector w(2);
  w << 0.5, 0.5;
  const DiscreteMeasure measure(w);
  CHECK(expect(measure, [](int) { return 1.0; }) == doctest::Approx(1.0));

  const Vector mean = expect(measure, [](int i) {
    Vector e = Vector::Zero(2);
    e(i) = 1.0;
    return e;
  });
  CHECK(mean(0) == doctest::Approx(0.5));
  CHECK(mean(1) == doctest::Approx(0.5));
}

TEST_CASE("expect of the rank-one updates assembles the covariance") {
  RandomStream stream(5);
  auto space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(3));
  const Matrix atoms = random_unit_atoms(*space, 5, stream);
  Vector w(5);
  w << 0.1, 0.2, 0.3, 0.25, 0.15;
  Instance inst = unit_dictionary_instance(space, atoms, w);
  const Matrix cov = inst.covariance();
  for (int t = 0; t < 20; ++t) {
    Vector v(3);
    for (int i = 0; i < 3; ++i) v(i) = stream.next_gaussian();
    const Vector direct = expect(inst.measure, [&](int i) {
      const Vector atom = atoms.col(i);
      return Vector(space->inner(v, atom) * atom);
    });
    CHECK((direct - cov * v).norm() <= 1e-12 * std::max(1.0, v.norm()));
  }
}

TEST_CASE("streams are reproducible and substreams independent") {
  RandomStream a(123);
  RandomStream b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RandomStream root(99);
  RandomStream s0 = root.derive(0);
  RandomStream s1 = root.derive(1);
  RandomStream s0_again = root.derive(0);
  bool all_equal = true;
  bool matches_sibling = true;
  for (int i = 0; i < 50; ++i) {
    const std::uint64_t x = s0.next_u64();
    matches_sibling = matches_sibling && (x == s0_again.next_u64());
    all_equal = all_equal && (x == s1.next_u64());
  }
  CHECK(matches_sibling);
  CHECK_FALSE(all_equal);
}

TEST_CASE("gaussian draws have sane moments") {
  RandomStream stream(2024);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = stream.next_gaussian();
    sum += g;
    sum_sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sum_sq / n - 1.0) < 0.02);
}
