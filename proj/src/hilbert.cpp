#include "schwarz/hilbert.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace schwarz {

namespace {

void check_dim(const char* who, Eigen::Index expected, Eigen::Index got) {
  if (expected != got) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch (expected " +
                                std::to_string(expected) + ", got " + std::to_string(got) + ")");
  }
}

} // namespace

InnerProductSpace::InnerProductSpace(Matrix gram) {
  if (gram.rows() < 1 || gram.rows() != gram.cols()) {
    throw std::invalid_argument("InnerProductSpace: gram must be square and nonempty");
  }
  const double scale = gram.cwiseAbs().maxCoeff();
  const double asym = (gram - gram.transpose()).cwiseAbs().maxCoeff();
  if (scale > 0.0 && asym > 1e-12 * scale) {
    throw std::invalid_argument("InnerProductSpace: gram is not symmetric");
  }
  gram_ = 0.5 * (gram + gram.transpose());
  chol_.compute(gram_);
  const double max_diag = gram_.diagonal().maxCoeff();
  if (chol_.info() != Eigen::Success ||
      (chol_.matrixLLT().diagonal().array().square() <= 1e-12 * max_diag).any()) {
    throw std::invalid_argument("InnerProductSpace: gram is not positive definite");
  }
}

InnerProductSpace InnerProductSpace::euclidean(int dim) {
  return InnerProductSpace(Matrix::Identity(dim, dim));
}

double InnerProductSpace::inner(const Vector& u, const Vector& v) const {
  check_dim("inner", gram_.rows(), u.size());
  check_dim("inner", gram_.rows(), v.size());
  return u.dot(gram_ * v);
}

double InnerProductSpace::norm(const Vector& v) const {
  check_dim("norm", gram_.rows(), v.size());
  return (chol_.matrixU() * v).norm();
}

LocalSubspace::LocalSubspace(Matrix basis, Matrix local_gram)
    : basis_(std::move(basis)), local_gram_(std::move(local_gram)) {
  const Eigen::Index k = basis_.cols();
  if (k < 1) {
    throw std::invalid_argument("LocalSubspace: basis must have at least one column");
  }
  if (local_gram_.rows() != k || local_gram_.cols() != k) {
    throw std::invalid_argument("LocalSubspace: local_gram size must match basis columns");
  }
  Eigen::JacobiSVD<Matrix> svd(basis_);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-10 * sv(0)) {
    throw std::invalid_argument("LocalSubspace: basis is rank deficient");
  }
  const double scale = local_gram_.cwiseAbs().maxCoeff();
  const double asym = (local_gram_ - local_gram_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw std::invalid_argument("LocalSubspace: local_gram is not symmetric");
  }
  local_gram_ = 0.5 * (local_gram_ + local_gram_.transpose());
  local_chol_.compute(local_gram_);
  if (local_chol_.info() != Eigen::Success) {
    throw std::invalid_argument("LocalSubspace: local_gram is not positive definite");
  }
}

double LocalSubspace::local_norm(const Vector& v_local) const {
  check_dim("local_norm", local_gram_.rows(), v_local.size());
  return (local_chol_.matrixU() * v_local).norm();
}

SubspaceFamily::SubspaceFamily(InnerProductSpace space, std::vector<LocalSubspace> subspaces)
    : space_(std::move(space)), subspaces_(std::move(subspaces)), lambda_(0.0) {
  if (subspaces_.empty()) {
    throw std::invalid_argument("SubspaceFamily: needs at least one subspace");
  }
  for (const auto& sub : subspaces_) {
    check_dim("SubspaceFamily", space_.dim(), sub.ambient_dim());
  }
  lambda_ = lambda_bound(*this);
}

const LocalSubspace& SubspaceFamily::subspace(int index) const {
  if (index < 0 || index >= size()) {
    throw std::out_of_range("SubspaceFamily: unknown subspace index " + std::to_string(index));
  }
  return subspaces_[static_cast<std::size_t>(index)];
}

Vector apply_R(const SubspaceFamily& family, int index, const Vector& v_local) {
  const LocalSubspace& sub = family.subspace(index);
  check_dim("apply_R", sub.local_dim(), v_local.size());
  return sub.basis() * v_local;
}

Vector apply_T(const SubspaceFamily& family, int index, const Vector& v) {
  const LocalSubspace& sub = family.subspace(index);
  check_dim("apply_T", family.space().dim(), v.size());
  return sub.solve_local(sub.basis().transpose() * family.space().gram_times(v));
}

double lambda_bound(const SubspaceFamily& family) {
  double lambda = 0.0;
  const Matrix& gram = family.space().gram();
  for (int i = 0; i < family.size(); ++i) {
    const LocalSubspace& sub = family.subspace(i);
    Matrix pulled = sub.basis().transpose() * gram * sub.basis();
    pulled = 0.5 * (pulled + pulled.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(pulled, sub.local_gram());
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("lambda_bound: generalized eigensolver failed");
    }
    lambda = std::max(lambda, std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff())));
  }
  return lambda;
}

Vector psi_tilde(const SubspaceFamily& family, int index, const Vector& e) {
  Vector direction = apply_R(family, index, apply_T(family, index, e));
  const double dn = family.space().norm(direction);
  if (dn > 1e-14 * family.space().norm(e)) {
    return direction / dn;
  }
  return Vector::Zero(e.size());
}

} // namespace schwarz
