#include "schwarz/instances.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace schwarz {

namespace {

Instance one_dim_span_instance(std::shared_ptr<const InnerProductSpace> space, Matrix atoms,
                               Vector weights, bool orthonormal) {
  std::vector<LocalSubspace> subspaces;
  subspaces.reserve(static_cast<std::size_t>(atoms.cols()));
  for (int j = 0; j < atoms.cols(); ++j) {
    // Local product is the restriction of a: a 1x1 Gram with the atom's
    // squared norm, i.e. exactly 1 for unit atoms.
    Matrix local(1, 1);
    const double n = space->norm(atoms.col(j));
    local(0, 0) = n * n;
    subspaces.emplace_back(atoms.col(j), local);
  }
  auto family = std::make_shared<SubspaceFamily>(*space, std::move(subspaces));
  return Instance{std::move(family), DiscreteMeasure(std::move(weights)), std::move(atoms),
                  orthonormal};
}

} // namespace

Instance orthonormal_instance(int dim, Vector weights) {
  if (dim < 1) {
    throw std::invalid_argument("orthonormal_instance: dim must be positive");
  }
  if (weights.size() != dim) {
    throw std::invalid_argument("orthonormal_instance: need one weight per basis vector");
  }
  auto space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(dim));
  return one_dim_span_instance(space, Matrix::Identity(dim, dim), std::move(weights), true);
}

Instance unit_dictionary_instance(std::shared_ptr<const InnerProductSpace> space, Matrix atoms,
                                  Vector weights) {
  if (!space || atoms.rows() != space->dim() || atoms.cols() < 1) {
    throw std::invalid_argument("unit_dictionary_instance: bad atom matrix");
  }
  if (weights.size() != atoms.cols()) {
    throw std::invalid_argument("unit_dictionary_instance: need one weight per atom");
  }
  for (int j = 0; j < atoms.cols(); ++j) {
    if (std::abs(space->norm(atoms.col(j)) - 1.0) > 1e-10) {
      throw std::invalid_argument("unit_dictionary_instance: atom " + std::to_string(j) +
                                  " is not a-normalized");
    }
  }
  // Orthonormality detection enables the exact representation-class norms.
  const Matrix cross = atoms.transpose() * space->gram() * atoms;
  bool orthonormal = atoms.cols() == space->dim() &&
                     (cross - Matrix::Identity(cross.rows(), cross.cols())).cwiseAbs().maxCoeff() <=
                         1e-10;
  return one_dim_span_instance(std::move(space), std::move(atoms), std::move(weights),
                               orthonormal);
}

Matrix random_unit_atoms(const InnerProductSpace& space, int count, RandomStream& stream) {
  if (count < 1) {
    throw std::invalid_argument("random_unit_atoms: count must be positive");
  }
  Matrix atoms(space.dim(), count);
  for (int j = 0; j < count; ++j) {
    for (int i = 0; i < space.dim(); ++i) atoms(i, j) = stream.next_gaussian();
    atoms.col(j) /= space.norm(atoms.col(j));
  }
  return atoms;
}

RkhsRealization::RkhsRealization(RkhsSpec spec, Vector weights) : spec_(std::move(spec)) {
  const int n = static_cast<int>(spec_.nodes.size());
  if (n < 1) {
    throw std::invalid_argument("RkhsRealization: need at least one node");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (spec_.nodes(i) == spec_.nodes(j)) {
        throw std::invalid_argument("RkhsRealization: nodes must be distinct");
      }
    }
  }

  kernel_.resize(n, n);
  switch (spec_.kernel) {
    case KernelKind::gaussian: {
      if (!(spec_.width > 0.0)) {
        throw std::invalid_argument("RkhsRealization: gaussian width must be positive");
      }
      const double inv2w2 = 1.0 / (2.0 * spec_.width * spec_.width);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double dx = spec_.nodes(i) - spec_.nodes(j);
          kernel_(i, j) = std::exp(-dx * dx * inv2w2);
        }
      }
      break;
    }
    case KernelKind::min_plus_one: {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          kernel_(i, j) = 1.0 + std::min(spec_.nodes(i), spec_.nodes(j));
        }
      }
      break;
    }
    case KernelKind::grid: {
      if (spec_.grid_values.rows() != n || spec_.grid_values.cols() != n) {
        throw std::invalid_argument("RkhsRealization: grid kernel size mismatch");
      }
      kernel_ = spec_.grid_values;
      break;
    }
  }

  jitter_ = spec_.jitter_rel * kernel_.diagonal().maxCoeff();
  Matrix gram = kernel_ + jitter_ * Matrix::Identity(n, n);
  auto space = std::make_shared<InnerProductSpace>(std::move(gram)); // throws if indefinite

  // Atoms are the normalized kernel sections: coordinate vector e_i / ||K_{x_i}||.
  Matrix atoms = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    atoms(i, i) = 1.0 / std::sqrt(space->gram()(i, i));
  }
  instance_ = one_dim_span_instance(std::move(space), std::move(atoms), std::move(weights), false);
}

double RkhsRealization::evaluate(const Vector& coeffs, int node_index) const {
  if (node_index < 0 || node_index >= kernel_.rows()) {
    throw std::out_of_range("RkhsRealization::evaluate: node index out of range");
  }
  return kernel_.row(node_index).dot(coeffs);
}

Vector RkhsRealization::apply_kernel_integral(const Vector& coeffs) const {
  Vector values = kernel_ * coeffs;
  return instance_.measure.weights().cwiseProduct(values);
}

CollectiveRealization::CollectiveRealization(CollectiveSpec spec, Vector weights,
                                             std::shared_ptr<const InnerProductSpace> h_space)
    : spec_(std::move(spec)), h_space_(std::move(h_space)) {
  const int d = spec_.ambient_dim;
  const int n = spec_.n;
  if (d < 1 || n < 1) {
    throw std::invalid_argument("CollectiveRealization: bad dimensions");
  }
  if (!h_space_) {
    h_space_ = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(d));
  }
  if (h_space_->dim() != d) {
    throw std::invalid_argument("CollectiveRealization: H-space dimension mismatch");
  }
  if (spec_.phi.rows() != d || spec_.phi.cols() != n) {
    throw std::invalid_argument("CollectiveRealization: phi must be ambient_dim x n");
  }
  const Matrix cross = spec_.phi.transpose() * h_space_->gram() * spec_.phi;
  if ((cross - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("CollectiveRealization: phi columns are not a-orthonormal");
  }
  const int atom_count = static_cast<int>(spec_.dictionary.cols());
  if (spec_.dictionary.rows() != d || atom_count < 1) {
    throw std::invalid_argument("CollectiveRealization: bad dictionary");
  }
  for (int j = 0; j < atom_count; ++j) {
    if (std::abs(h_space_->norm(spec_.dictionary.col(j)) - 1.0) > 1e-10) {
      throw std::invalid_argument("CollectiveRealization: dictionary atom " + std::to_string(j) +
                                  " is not unit norm");
    }
  }
  if (weights.size() != atom_count) {
    throw std::invalid_argument("CollectiveRealization: need one weight per atom");
  }

  // Product-space Gram: block diagonal with one H-Gram per component.
  Matrix product_gram = Matrix::Zero(n * d, n * d);
  for (int i = 0; i < n; ++i) {
    product_gram.block(i * d, i * d, d, d) = h_space_->gram();
  }
  auto product_space = std::make_shared<InnerProductSpace>(std::move(product_gram));

  // Subspace of atom w: all componentwise multiples (c_1 w, ..., c_n w).
  std::vector<LocalSubspace> subspaces;
  subspaces.reserve(static_cast<std::size_t>(atom_count));
  for (int j = 0; j < atom_count; ++j) {
    Matrix basis = Matrix::Zero(n * d, n);
    for (int i = 0; i < n; ++i) {
      basis.block(i * d, i, d, 1) = spec_.dictionary.col(j);
    }
    subspaces.emplace_back(std::move(basis), Matrix::Identity(n, n));
  }
  auto family = std::make_shared<SubspaceFamily>(*product_space, std::move(subspaces));

  // Stacked copies of the dictionary atoms are not unit vectors of the
  // product space, so the instance keeps no atom matrix of its own.
  instance_ = Instance{std::move(family), DiscreteMeasure(std::move(weights)), Matrix(), false};
}

Vector CollectiveRealization::target() const {
  const int d = spec_.ambient_dim;
  Vector stacked(d * spec_.n);
  for (int i = 0; i < spec_.n; ++i) {
    stacked.segment(i * d, d) = spec_.phi.col(i);
  }
  return stacked;
}

Matrix CollectiveRealization::components(const Vector& stacked) const {
  const int d = spec_.ambient_dim;
  if (stacked.size() != d * spec_.n) {
    throw std::invalid_argument("CollectiveRealization::components: size mismatch");
  }
  Matrix out(d, spec_.n);
  for (int i = 0; i < spec_.n; ++i) {
    out.col(i) = stacked.segment(i * d, d);
  }
  return out;
}

Matrix CollectiveRealization::h_covariance() const {
  return covariance_operator(*h_space_, spec_.dictionary, instance_.measure);
}

std::pair<double, double> sigma_eps(const CollectiveRealization& realization,
                                    const std::vector<Vector>& w_basis) {
  const InnerProductSpace& h = realization.h_space();
  const Matrix& phi = realization.spec().phi;

  // a-orthonormalize the spanning set of W (near-dependent vectors dropped).
  std::vector<Vector> ortho;
  for (const Vector& w : w_basis) {
    Vector q = w;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& b : ortho) {
        q -= h.inner(q, b) * b;
      }
    }
    const double qn = h.norm(q);
    if (qn > 1e-12 * std::max(1.0, h.norm(w))) {
      ortho.push_back(q / qn);
    }
  }

  Matrix deflected = phi;
  for (const Vector& b : ortho) {
    for (int i = 0; i < phi.cols(); ++i) {
      deflected.col(i) -= h.inner(phi.col(i), b) * b;
    }
  }

  double eps_sq = 0.0;
  for (int i = 0; i < phi.cols(); ++i) {
    const double rn = h.norm(deflected.col(i));
    eps_sq += rn * rn;
  }

  // Worst direction inside the target span: with orthonormal phi, any unit
  // v = phi c has ||c||_2 = 1, so sigma^2 is the top eigenvalue of the
  // deflected block's a-Gram.
  Matrix small = deflected.transpose() * h.gram() * deflected;
  small = 0.5 * (small + small.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(small);
  const double sigma = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  return {sigma, std::sqrt(eps_sq)};
}

} // namespace schwarz
