#pragma once

#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "schwarz/hilbert.hpp"
#include "schwarz/measures.hpp"
#include "schwarz/types.hpp"

namespace schwarz {

/// Eigenpairs of an a-self-adjoint positive semi-definite operator, retained
/// above a relative drop tolerance. Eigenvectors are a-orthonormal and
/// eigenvalues are sorted in descending order; everything below the drop
/// tolerance belongs to the numerical kernel.
struct SpectralDecomposition {
  Vector eigenvalues;  // descending, size = rank
  Matrix eigenvectors; // dim x rank, a-orthonormal columns
  Vector kernel_eigenvalues;
  Matrix kernel_eigenvectors;
  int rank = 0;
  std::shared_ptr<const InnerProductSpace> space;

  /// a(u, psi_k) for the retained eigenvectors.
  Vector coefficients(const Vector& u) const;
};

/// Norms of the smoothness classes attached to one target vector. Entries
/// are absent when the instance does not define them (e.g. the exact l1-type
/// norm on a non-orthonormal dictionary).
struct SmoothnessClassReport {
  std::optional<double> a2;
  std::optional<double> a1_upper;
  std::optional<double> ainf_rho;
  std::map<double, double> hs; // s -> ||u||_{H^s}
};

/// Matrix of the covariance operator v -> sum_w rho_w a(v, atom_w) atom_w in
/// the computational basis. Atoms are the columns of `atoms` and must have
/// unit a-norm (within 1e-10). The result is a-self-adjoint, positive
/// semi-definite, and has a-trace one.
Matrix covariance_operator(const InnerProductSpace& space, const Matrix& atoms,
                           const DiscreteMeasure& measure);

/// Eigendecomposition of an a-self-adjoint PSD operator matrix in the
/// a-inner product. Eigenvalues below 1e-12 * mu_max are dropped into the
/// kernel; small negative round-off values are clamped to zero.
SpectralDecomposition spectral_decomp(const Matrix& op,
                                      std::shared_ptr<const InnerProductSpace> space);

/// Norm of the power-scale space at exponent s:
/// (sum_k mu_k^(-2s) a(u, psi_k)^2)^(1/2).
/// Throws if u has a component in the numerical kernel above 1e-10 * ||u||.
double hs_norm(const Vector& u, double s, const SpectralDecomposition& decomp);

/// Minimal weighted representation norm
///   min (sum_w rho_w ||v_w||_w^2)^(1/2)  s.t.  sum_w rho_w R_w v_w = u,
/// computed through the rank-revealing decomposition of the stacked,
/// weighted representation operator. Throws if u is not representable
/// within 1e-10 relative.
double a2_norm(const SubspaceFamily& family, const DiscreteMeasure& measure, const Vector& u);

enum class LqExponent { one, two, inf };

/// Representation-class norm ||{gamma_i^-1 |c_i|}||_{l_q} with c_i = a(u, atom_i),
/// defined for families whose atoms form a complete a-orthonormal system
/// (the representation is then unique). gamma must be strictly positive.
double aq_gamma_norm(const SubspaceFamily& family, const Vector& u, LqExponent q,
                     const Vector& gamma);

/// Sum of local norms of a concrete representation u = sum_j R_{w_j} v_j;
/// an upper bound for the l1-type class norm (exact when the representation
/// is optimal). Throws if the representation does not reproduce u within
/// 1e-10 relative.
double a1_upper(const SubspaceFamily& family,
                const std::vector<std::pair<int, Vector>>& representation, const Vector& u);

/// Builds u = sum_k mu_k^s c_k psi_k over the retained eigenpairs, so that
/// hs_norm(u, s) = ||c||_2 by construction.
Vector make_hs_element(const SpectralDecomposition& decomp, double s, const Vector& coefficients);

/// Same with random coefficients, drawn standard normal and normalized to
/// unit Euclidean length.
Vector make_hs_element(const SpectralDecomposition& decomp, double s, RandomStream& stream);

} // namespace schwarz
