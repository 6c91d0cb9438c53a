#include <doctest.h>

#include <cmath>

#include "schwarz/instances.hpp"
#include "schwarz/spectral.hpp"

using namespace schwarz;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Instance two_atom_instance() {
  auto space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(2));
  Matrix atoms(2, 2);
  atoms << 1.0, 1.0 / std::sqrt(2.0), 0.0, 1.0 / std::sqrt(2.0);
  return unit_dictionary_instance(space, atoms, Vector::Constant(2, 0.5));
}

} // namespace

TEST_CASE("covariance of an orthonormal dictionary is diagonal") {
  Vector w(3);
  w << 0.2, 0.3, 0.5;
  Instance inst = orthonormal_instance(3, w);
  const Matrix cov = inst.covariance();
  CHECK((cov - Matrix(w.asDiagonal())).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("covariance of a point mass is the rank-one projector") {
  auto space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(2));
  Matrix atom(2, 1);
  atom << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  Instance inst = unit_dictionary_instance(space, atom, Vector::Ones(1));
  const Matrix cov = inst.covariance();
  CHECK((cov * atom.col(0) - atom.col(0)).norm() <= 1e-12);
  CHECK(cov.trace() == doctest::Approx(1.0));
}

TEST_CASE("covariance of the two-atom dictionary, by hand") {
  const Matrix cov = two_atom_instance().covariance();
  CHECK(cov(0, 0) == doctest::Approx(0.75));
  CHECK(cov(0, 1) == doctest::Approx(0.25));
  CHECK(cov(1, 0) == doctest::Approx(0.25));
  CHECK(cov(1, 1) == doctest::Approx(0.25));
}

TEST_CASE("covariance rejects non-unit atoms") {
  auto space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(2));
  Matrix atoms(2, 1);
  atoms << 2.0, 0.0;
  const DiscreteMeasure rho(Vector::Ones(1));
  CHECK_THROWS_AS(covariance_operator(*space, atoms, rho), std::invalid_argument);
}

TEST_CASE("spectral decomposition basics") {
  auto space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(2));
  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 0.3;
  diag(1, 1) = 0.7;
  const SpectralDecomposition decomp = spectral_decomp(diag, space);
  REQUIRE(decomp.rank == 2);
  CHECK(decomp.eigenvalues(0) == doctest::Approx(0.7));
  CHECK(decomp.eigenvalues(1) == doctest::Approx(0.3));
  CHECK(std::abs(decomp.eigenvectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(decomp.eigenvectors(0, 1)) == doctest::Approx(1.0));

  Matrix projector(2, 2);
  projector << 0.5, 0.5, 0.5, 0.5;
  const SpectralDecomposition rank1 = spectral_decomp(projector, space);
  CHECK(rank1.rank == 1);
  CHECK(rank1.eigenvalues(0) == doctest::Approx(1.0));
}

TEST_CASE("decomposition of a general covariance reconstructs and is a-orthonormal") {
  Instance inst = two_atom_instance();
  auto space = std::make_shared<InnerProductSpace>(inst.family->space());
  const Matrix cov = inst.covariance();
  const SpectralDecomposition decomp = spectral_decomp(cov, space);
  CHECK(decomp.eigenvalues.sum() == doctest::Approx(1.0).epsilon(1e-10));

  // a-orthonormality and reconstruction.
  const Matrix cross =
      decomp.eigenvectors.transpose() * space->gram() * decomp.eigenvectors;
  CHECK((cross - Matrix::Identity(decomp.rank, decomp.rank)).cwiseAbs().maxCoeff() <= 1e-10);
  const Matrix rebuilt = decomp.eigenvectors * decomp.eigenvalues.asDiagonal() *
                         decomp.eigenvectors.transpose() * space->gram();
  CHECK((rebuilt - cov).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("unit trace for redundant frames") {
  RandomStream stream(6);
  auto space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(4));
  const Matrix atoms = random_unit_atoms(*space, 8, stream);
  Instance inst = unit_dictionary_instance(space, atoms, Vector::Constant(8, 0.125));
  auto sp = std::make_shared<InnerProductSpace>(inst.family->space());
  const SpectralDecomposition decomp = spectral_decomp(inst.covariance(), sp);
  CHECK(decomp.eigenvalues.sum() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("power-scale norms") {
  auto space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(2));
  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 0.3;
  diag(1, 1) = 0.7;
  const SpectralDecomposition decomp = spectral_decomp(diag, space);

  const Vector u = vec2(1, 1);
  CHECK(hs_norm(u, 0.0, decomp) == doctest::Approx(u.norm()));
  CHECK(hs_norm(u, 0.5, decomp) * hs_norm(u, 0.5, decomp) ==
        doctest::Approx(100.0 / 21.0).epsilon(1e-12));
  const Vector psi1 = decomp.eigenvectors.col(0);
  CHECK(hs_norm(psi1, 0.25, decomp) == doctest::Approx(std::pow(0.7, -0.25)));
}

TEST_CASE("kernel components are rejected") {
  auto space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(2));
  Matrix rank1(2, 2);
  rank1 << 1, 0, 0, 0;
  const SpectralDecomposition decomp = spectral_decomp(rank1, space);
  REQUIRE(decomp.rank == 1);
  CHECK_THROWS_AS(hs_norm(vec2(0.5, 1.0), 0.5, decomp), std::invalid_argument);
  CHECK_NOTHROW(hs_norm(vec2(1.0, 0.0), 0.5, decomp));
}

TEST_CASE("a2 norm on orthonormal and general dictionaries") {
  SUBCASE("orthonormal, uniform: sqrt(2) for a basis vector") {
    Instance inst = orthonormal_instance(2, Vector::Constant(2, 0.5));
    CHECK(a2_norm(*inst.family, inst.measure, vec2(1, 0)) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(a2_norm(*inst.family, inst.measure, Vector::Zero(2)) == doctest::Approx(0.0));
  }
  SUBCASE("two-atom: squared value 6, matching the inverse covariance") {
    Instance inst = two_atom_instance();
    const double a2 = a2_norm(*inst.family, inst.measure, vec2(0, 1));
    CHECK(a2 * a2 == doctest::Approx(6.0).epsilon(1e-10));
    auto sp = std::make_shared<InnerProductSpace>(inst.family->space());
    const SpectralDecomposition decomp = spectral_decomp(inst.covariance(), sp);
    CHECK(a2 == doctest::Approx(hs_norm(vec2(0, 1), 0.5, decomp)).epsilon(1e-10));
  }
  SUBCASE("unrepresentable vectors are rejected") {
    auto space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(2));
    Matrix atom(2, 1);
    atom << 1.0, 0.0;
    Instance inst = unit_dictionary_instance(space, atom, Vector::Ones(1));
    CHECK_THROWS_AS(a2_norm(*inst.family, inst.measure, vec2(0, 1)), std::invalid_argument);
  }
}

TEST_CASE("representation-norm identity against the spectral route, many trials") {
  RandomStream stream(14);
  // Random non-Euclidean geometry with a redundant dictionary.
  Matrix g(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) g(i, j) = stream.next_gaussian();
  auto space = std::make_shared<InnerProductSpace>(
      Matrix(g * g.transpose() + 5.0 * Matrix::Identity(5, 5)));
  const Matrix atoms = random_unit_atoms(*space, 11, stream);
  Vector w(11);
  for (int i = 0; i < 11; ++i) w(i) = 0.2 + stream.next_u01();
  w /= w.sum();
  Instance inst = unit_dictionary_instance(space, atoms, w);
  auto sp = std::make_shared<InnerProductSpace>(inst.family->space());
  const Matrix cov = inst.covariance();
  const SpectralDecomposition decomp = spectral_decomp(cov, sp);
  for (int t = 0; t < 200; ++t) {
    Vector gvec(5);
    for (int i = 0; i < 5; ++i) gvec(i) = stream.next_gaussian();
    const Vector u = cov * gvec;
    const double a2 = a2_norm(*inst.family, inst.measure, u);
    const double hs = hs_norm(u, 0.5, decomp);
    CHECK(std::abs(a2 * a2 - hs * hs) <= 1e-8 * hs * hs);
  }
}

TEST_CASE("representable vectors are a-orthogonal to the covariance kernel") {
  auto space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(3));
  Matrix atoms(3, 2); // rank-deficient dictionary spanning a plane
  atoms << 1.0, 0.0, 0.0, 1.0, 0.0, 0.0;
  Instance inst = unit_dictionary_instance(space, atoms, Vector::Constant(2, 0.5));
  auto sp = std::make_shared<InnerProductSpace>(inst.family->space());
  const SpectralDecomposition decomp = spectral_decomp(inst.covariance(), sp);
  REQUIRE(decomp.rank == 2);
  RandomStream stream(15);
  for (int t = 0; t < 50; ++t) {
    Vector c(2);
    c << stream.next_gaussian(), stream.next_gaussian();
    const Vector u = atoms * c;
    CHECK_NOTHROW(a2_norm(*inst.family, inst.measure, u));
    for (int k = 0; k < decomp.kernel_eigenvectors.cols(); ++k) {
      CHECK(std::abs(space->inner(u, decomp.kernel_eigenvectors.col(k))) <= 1e-10);
    }
  }
}

TEST_CASE("lq class norms on orthonormal systems") {
  Vector w(2);
  w << 0.5, 0.5;
  Instance inst = orthonormal_instance(2, w);
  const Vector u = vec2(1.0, 0.5);
  CHECK(aq_gamma_norm(*inst.family, u, LqExponent::one, Vector::Ones(2)) ==
        doctest::Approx(1.5));
  CHECK(aq_gamma_norm(*inst.family, vec2(1, 0), LqExponent::inf, w) == doctest::Approx(2.0));
  CHECK(aq_gamma_norm(*inst.family, u, LqExponent::two, Vector(w.array().sqrt())) ==
        doctest::Approx(a2_norm(*inst.family, inst.measure, u)).epsilon(1e-12));

  Instance frame = two_atom_instance();
  CHECK_THROWS_AS(aq_gamma_norm(*frame.family, u, LqExponent::one, Vector::Ones(2)),
                  std::invalid_argument);
}

TEST_CASE("class-norm chain on random data") {
  RandomStream stream(16);
  const int d = 6;
  for (int t = 0; t < 500; ++t) {
    Vector w(d);
    for (int i = 0; i < d; ++i) w(i) = 0.05 + stream.next_u01();
    w /= w.sum();
    Instance inst = orthonormal_instance(d, w);
    Vector u(d);
    for (int i = 0; i < d; ++i) u(i) = stream.next_gaussian();
    const double a1 = aq_gamma_norm(*inst.family, u, LqExponent::one, Vector::Ones(d));
    const double a2 = aq_gamma_norm(*inst.family, u, LqExponent::two, Vector(w.array().sqrt()));
    const double ainf = aq_gamma_norm(*inst.family, u, LqExponent::inf, w);
    CHECK(a1 <= a2 * (1 + 1e-12));
    CHECK(a2 <= ainf * (1 + 1e-12));
  }
}

TEST_CASE("a1 upper bounds from explicit representations") {
  Instance inst = two_atom_instance();
  SUBCASE("single atom") {
    Vector c(1);
    c << -2.5;
    const Vector u = -2.5 * inst.atoms.col(1);
    CHECK(a1_upper(*inst.family, {{1, c}}, u) == doctest::Approx(2.5));
  }
  SUBCASE("orthonormal case equals the l1 norm") {
    Instance ortho = orthonormal_instance(2, Vector::Constant(2, 0.5));
    const Vector u = vec2(1.0, 0.5);
    Vector c0(1), c1(1);
    c0 << 1.0;
    c1 << 0.5;
    CHECK(a1_upper(*ortho.family, {{0, c0}, {1, c1}}, u) ==
          doctest::Approx(aq_gamma_norm(*ortho.family, u, LqExponent::one, Vector::Ones(2))));
  }
  SUBCASE("splitting a coefficient across two copies changes nothing") {
    Vector half(1), half2(1);
    half << 0.6;
    half2 << 0.6;
    const Vector u = 1.2 * inst.atoms.col(0);
    Vector full(1);
    full << 1.2;
    CHECK(a1_upper(*inst.family, {{0, half}, {0, half2}}, u) ==
          doctest::Approx(a1_upper(*inst.family, {{0, full}}, u)));
  }
  SUBCASE("mismatched representations are rejected") {
    Vector c(1);
    c << 1.0;
    CHECK_THROWS_AS(a1_upper(*inst.family, {{0, c}}, vec2(0, 5)), std::invalid_argument);
  }
}

TEST_CASE("power-scale element construction") {
  Vector w(3);
  w << 0.5, 0.3, 0.2;
  Instance inst = orthonormal_instance(3, w);
  auto sp = std::make_shared<InnerProductSpace>(inst.family->space());
  const SpectralDecomposition decomp = spectral_decomp(inst.covariance(), sp);

  Vector c = Vector::Zero(3);
  c(0) = 1.0;
  const Vector u = make_hs_element(decomp, 0.25, c);
  CHECK((u - std::pow(decomp.eigenvalues(0), 0.25) * decomp.eigenvectors.col(0)).norm() <= 1e-14);

  RandomStream stream(21);
  const Vector random_u = make_hs_element(decomp, 0.5, stream);
  CHECK(hs_norm(random_u, 0.5, decomp) == doctest::Approx(1.0).epsilon(1e-10));

  const Vector flat = Vector::Constant(3, 1.0 / std::sqrt(3.0));
  const Vector u0 = make_hs_element(decomp, 0.0, flat);
  CHECK(inst.family->space().norm(u0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("interpolation monotonicity of the power-scale norms") {
  Vector w(4);
  w << 0.4, 0.3, 0.2, 0.1;
  Instance inst = orthonormal_instance(4, w);
  auto sp = std::make_shared<InnerProductSpace>(inst.family->space());
  const SpectralDecomposition decomp = spectral_decomp(inst.covariance(), sp);
  RandomStream stream(22);
  for (int t = 0; t < 50; ++t) {
    const Vector u = make_hs_element(decomp, 0.75, stream); // smooth enough for both sides
    CHECK(hs_norm(u, 0.25, decomp) <= hs_norm(u, 0.5, decomp) * (1 + 1e-12));
    CHECK(hs_norm(u, 0.5, decomp) <= hs_norm(u, 0.75, decomp) * (1 + 1e-12));
  }
}
