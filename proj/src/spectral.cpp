#include "schwarz/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace schwarz {

Vector SpectralDecomposition::coefficients(const Vector& u) const {
  return eigenvectors.transpose() * space->gram_times(u);
}

Matrix covariance_operator(const InnerProductSpace& space, const Matrix& atoms,
                           const DiscreteMeasure& measure) {
  if (atoms.rows() != space.dim()) {
    throw std::invalid_argument("covariance_operator: atom dimension mismatch");
  }
  if (static_cast<int>(atoms.cols()) != measure.size()) {
    throw std::invalid_argument("covariance_operator: atom count does not match the measure");
  }
  for (int j = 0; j < atoms.cols(); ++j) {
    const double n = space.norm(atoms.col(j));
    if (std::abs(n - 1.0) > 1e-10) {
      throw std::invalid_argument("covariance_operator: atom " + std::to_string(j) +
                                  " has a-norm " + std::to_string(n) + ", expected 1");
    }
  }
  // v -> sum_w rho_w (atom_w' G v) atom_w  ==  A diag(rho) A' G
  return atoms * measure.weights().asDiagonal() * atoms.transpose() * space.gram();
}

SpectralDecomposition spectral_decomp(const Matrix& op,
                                      std::shared_ptr<const InnerProductSpace> space) {
  if (!space || op.rows() != space->dim() || op.cols() != space->dim()) {
    throw std::invalid_argument("spectral_decomp: operator/space dimension mismatch");
  }
  const Matrix& gram = space->gram();
  Matrix gl = gram * op;
  const double scale = std::max(gl.cwiseAbs().maxCoeff(), 1e-300);
  if ((gl - gl.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw std::invalid_argument("spectral_decomp: operator is not a-self-adjoint");
  }
  gl = 0.5 * (gl + gl.transpose());

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(gl, gram);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("spectral_decomp: eigensolver failed");
  }

  // Ascending from Eigen; flip to descending and split at the drop tolerance.
  const int dim = space->dim();
  Vector values(dim);
  Matrix vectors(dim, dim);
  for (int i = 0; i < dim; ++i) {
    values(i) = std::max(0.0, es.eigenvalues()(dim - 1 - i));
    vectors.col(i) = es.eigenvectors().col(dim - 1 - i);
  }
  const double drop = 1e-12 * std::max(values(0), 0.0);
  int rank = 0;
  while (rank < dim && values(rank) > drop) ++rank;

  SpectralDecomposition decomp;
  decomp.eigenvalues = values.head(rank);
  decomp.eigenvectors = vectors.leftCols(rank);
  decomp.kernel_eigenvalues = values.tail(dim - rank);
  decomp.kernel_eigenvectors = vectors.rightCols(dim - rank);
  decomp.rank = rank;
  decomp.space = std::move(space);
  return decomp;
}

double hs_norm(const Vector& u, double s, const SpectralDecomposition& decomp) {
  const Vector c = decomp.coefficients(u);
  const Vector inside = decomp.eigenvectors * c;
  const double u_norm = decomp.space->norm(u);
  if (decomp.space->norm(u - inside) > 1e-10 * u_norm) {
    throw std::invalid_argument("hs_norm: vector has a component in the operator kernel");
  }
  double acc = 0.0;
  for (int k = 0; k < decomp.rank; ++k) {
    acc += std::pow(decomp.eigenvalues(k), -2.0 * s) * c(k) * c(k);
  }
  return std::sqrt(acc);
}

double a2_norm(const SubspaceFamily& family, const DiscreteMeasure& measure, const Vector& u) {
  if (measure.size() != family.size()) {
    throw std::invalid_argument("a2_norm: measure size does not match the family");
  }
  if (u.size() != family.space().dim()) {
    throw std::invalid_argument("a2_norm: vector dimension mismatch");
  }

  // Stack the weighted injections: substituting y_w = sqrt(rho_w) U_w v_w
  // (U_w the upper Cholesky factor of the local Gram) turns the weighted
  // least-norm problem into min ||y||_2 s.t. C y = u.
  int total = 0;
  for (int w = 0; w < family.size(); ++w) total += family.subspace(w).local_dim();
  Matrix stacked(family.space().dim(), total);
  int col = 0;
  for (int w = 0; w < family.size(); ++w) {
    const LocalSubspace& sub = family.subspace(w);
    const int k = sub.local_dim();
    Eigen::LLT<Matrix> llt(sub.local_gram());
    Matrix block = std::sqrt(measure.weight(w)) *
                   llt.matrixU().solve<Eigen::OnTheRight>(sub.basis());
    stacked.middleCols(col, k) = block;
    col += k;
  }

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(stacked);
  const Vector y = cod.solve(u);
  const Vector residual = u - stacked * y;
  const double u_norm = family.space().norm(u);
  if (family.space().norm(residual) > 1e-10 * u_norm) {
    throw std::invalid_argument("a2_norm: vector is not representable by the weighted family");
  }

  const int rank = static_cast<int>(cod.rank());
  if (rank > 0) {
    const Vector t_diag = cod.matrixT().topLeftCorner(rank, rank).diagonal().cwiseAbs();
    if (t_diag.minCoeff() < 1e-10 * t_diag.maxCoeff()) {
      std::cerr << "a2_norm: warning: representation operator is ill-conditioned\n";
    }
  }
  return y.norm();
}

namespace {

// The atoms of a one-dimensional-span family, or an error if any subspace
// has higher dimension.
Matrix family_atoms(const SubspaceFamily& family, const char* who) {
  Matrix atoms(family.space().dim(), family.size());
  for (int w = 0; w < family.size(); ++w) {
    const LocalSubspace& sub = family.subspace(w);
    if (sub.local_dim() != 1) {
      throw std::invalid_argument(std::string(who) + ": requires one-dimensional subspaces");
    }
    atoms.col(w) = sub.basis().col(0);
  }
  return atoms;
}

} // namespace

double aq_gamma_norm(const SubspaceFamily& family, const Vector& u, LqExponent q,
                     const Vector& gamma) {
  if (gamma.size() != family.size() || (gamma.array() <= 0.0).any()) {
    throw std::invalid_argument("aq_gamma_norm: gamma must be positive, one entry per subspace");
  }
  const Matrix atoms = family_atoms(family, "aq_gamma_norm");
  if (family.size() != family.space().dim()) {
    throw std::invalid_argument("aq_gamma_norm: atoms do not form a complete orthonormal system");
  }
  const Matrix cross = atoms.transpose() * family.space().gram() * atoms;
  if ((cross - Matrix::Identity(cross.rows(), cross.cols())).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("aq_gamma_norm: atoms do not form a complete orthonormal system");
  }

  const Vector c = atoms.transpose() * family.space().gram_times(u);
  const Eigen::ArrayXd scaled = c.array().abs() / gamma.array();
  switch (q) {
    case LqExponent::one:
      return scaled.sum();
    case LqExponent::two:
      return std::sqrt((scaled * scaled).sum());
    case LqExponent::inf:
      return scaled.maxCoeff();
  }
  throw std::invalid_argument("aq_gamma_norm: unknown exponent");
}

double a1_upper(const SubspaceFamily& family,
                const std::vector<std::pair<int, Vector>>& representation, const Vector& u) {
  Vector assembled = Vector::Zero(family.space().dim());
  double total = 0.0;
  double piece_norms = 0.0;
  for (const auto& [index, v_local] : representation) {
    const LocalSubspace& sub = family.subspace(index);
    if (v_local.size() != sub.local_dim()) {
      throw std::invalid_argument("a1_upper: local coefficient size mismatch");
    }
    const Vector piece = apply_R(family, index, v_local);
    assembled += piece;
    piece_norms += family.space().norm(piece);
    total += sub.local_norm(v_local);
  }
  const double scale = family.space().norm(u) + piece_norms;
  if (family.space().norm(assembled - u) > 1e-10 * std::max(scale, 1e-300)) {
    throw std::invalid_argument("a1_upper: representation does not reproduce the vector");
  }
  return total;
}

Vector make_hs_element(const SpectralDecomposition& decomp, double s, const Vector& coefficients) {
  if (s < 0.0) {
    throw std::invalid_argument("make_hs_element: s must be nonnegative");
  }
  if (coefficients.size() > decomp.rank) {
    throw std::invalid_argument("make_hs_element: more coefficients than retained eigenpairs");
  }
  Vector u = Vector::Zero(decomp.space->dim());
  for (int k = 0; k < coefficients.size(); ++k) {
    u += std::pow(decomp.eigenvalues(k), s) * coefficients(k) * decomp.eigenvectors.col(k);
  }
  return u;
}

Vector make_hs_element(const SpectralDecomposition& decomp, double s, RandomStream& stream) {
  Vector c(decomp.rank);
  for (int k = 0; k < decomp.rank; ++k) c(k) = stream.next_gaussian();
  c /= c.norm();
  return make_hs_element(decomp, s, c);
}

} // namespace schwarz
