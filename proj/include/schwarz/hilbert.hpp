#pragma once

#include <memory>
#include <vector>

#include <Eigen/Cholesky>

#include "schwarz/types.hpp"

namespace schwarz {

/// Finite-dimensional real Hilbert space whose scalar product a(u,v) is
/// realized by an SPD Gram matrix in the computational basis.
///
/// The Gram matrix is symmetrized on construction; construction fails if the
/// input is materially asymmetric or not positive definite (Cholesky pivots
/// must exceed 1e-12 times the largest diagonal entry).
class InnerProductSpace {
public:
  explicit InnerProductSpace(Matrix gram);

  static InnerProductSpace euclidean(int dim);

  int dim() const { return static_cast<int>(gram_.rows()); }
  const Matrix& gram() const { return gram_; }
  const Eigen::LLT<Matrix>& chol() const { return chol_; }

  /// a(u,v) = u' * gram * v; symmetric in its arguments.
  double inner(const Vector& u, const Vector& v) const;

  /// a-norm, computed as the Euclidean norm of the Cholesky image (never
  /// negative under round-off).
  double norm(const Vector& v) const;

  Vector gram_times(const Vector& v) const { return gram_ * v; }

private:
  Matrix gram_;
  Eigen::LLT<Matrix> chol_;
};

/// One correction subspace: a basis of its image in ambient coordinates and
/// the SPD matrix realizing the local scalar product. The basis must have
/// full column rank, which keeps the injection into the ambient space
/// kernel-free.
class LocalSubspace {
public:
  LocalSubspace(Matrix basis, Matrix local_gram);

  int local_dim() const { return static_cast<int>(basis_.cols()); }
  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  const Matrix& basis() const { return basis_; }
  const Matrix& local_gram() const { return local_gram_; }

  Vector solve_local(const Vector& rhs) const { return local_chol_.solve(rhs); }
  double local_norm(const Vector& v_local) const;

private:
  Matrix basis_;
  Matrix local_gram_;
  Eigen::LLT<Matrix> local_chol_;
};

/// The ambient space together with its indexed collection of correction
/// subspaces. Immutable after construction; the uniform injection bound is
/// computed once and cached.
class SubspaceFamily {
public:
  SubspaceFamily(InnerProductSpace space, std::vector<LocalSubspace> subspaces);

  const InnerProductSpace& space() const { return space_; }
  int size() const { return static_cast<int>(subspaces_.size()); }
  const LocalSubspace& subspace(int index) const;

  /// Cached uniform bound on the injection operator norms.
  double lambda() const { return lambda_; }

private:
  InnerProductSpace space_;
  std::vector<LocalSubspace> subspaces_;
  double lambda_;
};

/// Injects local coefficients into the ambient space: basis * v_local.
Vector apply_R(const SubspaceFamily& family, int index, const Vector& v_local);

/// Local residual solve: returns t with local_gram * t = basis' * gram * v,
/// i.e. the local coefficients t satisfy a_w(t, s) = a(v, R s) for all s.
Vector apply_T(const SubspaceFamily& family, int index, const Vector& v);

/// Largest generalized singular value of any injection, i.e.
/// max over subspaces of sqrt(lambda_max(local_gram^-1 basis' gram basis)).
double lambda_bound(const SubspaceFamily& family);

/// Normalized correction direction R T e / ||R T e||, or the zero vector when
/// the direction norm does not exceed 1e-14 * ||e||.
Vector psi_tilde(const SubspaceFamily& family, int index, const Vector& e);

} // namespace schwarz
