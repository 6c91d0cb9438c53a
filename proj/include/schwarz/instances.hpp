#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "schwarz/hilbert.hpp"
#include "schwarz/measures.hpp"
#include "schwarz/solvers.hpp"
#include "schwarz/spectral.hpp"
#include "schwarz/types.hpp"

namespace schwarz {

/// A ready-to-run problem setting: the subspace family, the sampling measure,
/// and (for one-dimensional-span settings) the unit atoms spanning the
/// correction subspaces. Problems are attached to a concrete target on demand.
struct Instance {
  std::shared_ptr<const SubspaceFamily> family;
  DiscreteMeasure measure;
  Matrix atoms;                  // ambient coordinates, one column per subspace
  bool orthonormal_atoms = false;

  Problem problem(Vector target, RhsMode mode = RhsMode::direct) const {
    return make_problem(family, std::move(target), mode);
  }

  /// Covariance operator of the atom dictionary under the sampling measure.
  Matrix covariance() const {
    return covariance_operator(family->space(), atoms, measure);
  }
};

/// Euclidean space with the canonical basis vectors as atoms, one-dimensional
/// spans, and natural injections (lambda = 1).
Instance orthonormal_instance(int dim, Vector weights);

/// One-dimensional spans of arbitrary unit-norm atoms with natural injections.
/// Atoms must be a-normalized within 1e-10.
Instance unit_dictionary_instance(std::shared_ptr<const InnerProductSpace> space, Matrix atoms,
                                  Vector weights);

/// i.i.d. standard normal vectors, a-normalized; a convenient random
/// dictionary generator.
Matrix random_unit_atoms(const InnerProductSpace& space, int count, RandomStream& stream);

enum class KernelKind { gaussian, min_plus_one, grid };

struct RkhsSpec {
  KernelKind kernel = KernelKind::gaussian;
  double width = 0.2;      // gaussian length scale
  Vector nodes;            // distinct sample points (1-D domain)
  Matrix grid_values;      // kernel matrix for KernelKind::grid
  double jitter_rel = 1e-10; // added to the kernel Gram diagonal, relative to max entry
};

/// Kernel-space realization on a finite node set: the ambient space is the
/// span of the kernel sections at the nodes, with the kernel matrix as Gram
/// matrix; atoms are the normalized kernel sections.
///
/// Coordinates are coefficient vectors with respect to the kernel sections,
/// so evaluation at node i is the i-th entry of kernel_matrix * coeffs.
class RkhsRealization {
public:
  RkhsRealization(RkhsSpec spec, Vector weights);

  const Instance& instance() const { return instance_; }
  const Vector& nodes() const { return spec_.nodes; }
  const Matrix& kernel_matrix() const { return kernel_; } // without jitter
  double jitter() const { return jitter_; }

  /// Pointwise evaluation f(x_i) of f = sum_j coeffs_j K_{x_j} from the
  /// kernel values alone (independent of the Gram machinery).
  double evaluate(const Vector& coeffs, int node_index) const;

  /// Coefficients of the kernel integral operator image of f = coeffs:
  /// (L f) = sum_i rho_i f(x_i) K_{x_i}.
  Vector apply_kernel_integral(const Vector& coeffs) const;

private:
  RkhsSpec spec_;
  Matrix kernel_;
  double jitter_ = 0.0;
  Instance instance_;
};

struct CollectiveSpec {
  int ambient_dim = 0;  // dimension of H
  int n = 0;            // number of target components
  Matrix phi;           // ambient_dim x n, a-orthonormal columns
  Matrix dictionary;    // ambient_dim x K, unit-norm atoms in H
};

/// Simultaneous approximation of n orthonormal directions: the ambient space
/// is the n-fold product of H (stacked coordinates, component i occupying
/// rows [i*d, (i+1)*d)), and each dictionary atom spans the n-dimensional
/// subspace of its scalar multiples per component.
class CollectiveRealization {
public:
  CollectiveRealization(CollectiveSpec spec, Vector weights,
                        std::shared_ptr<const InnerProductSpace> h_space = nullptr);

  const Instance& instance() const { return instance_; }
  const CollectiveSpec& spec() const { return spec_; }
  const InnerProductSpace& h_space() const { return *h_space_; }

  /// The stacked target, components phi_1 .. phi_n.
  Vector target() const;

  /// Splits a stacked ambient vector into its H-components (one column each).
  Matrix components(const Vector& stacked) const;

  /// Covariance operator of the dictionary on H (not on the product space).
  Matrix h_covariance() const;

private:
  CollectiveSpec spec_;
  std::shared_ptr<const InnerProductSpace> h_space_;
  Instance instance_;
};

/// Approximation quality of a subspace W of H against the orthonormal target
/// block: returns (sigma, eps) with sigma the largest singular value of the
/// deflected block (worst direction) and eps its Frobenius norm; always
/// sigma <= eps <= sqrt(n) sigma.
std::pair<double, double> sigma_eps(const CollectiveRealization& realization,
                                    const std::vector<Vector>& w_basis);

} // namespace schwarz
