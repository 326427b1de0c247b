#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "dualflow/field.hpp"

namespace dualflow {

// Dense trigonometric differentiation machinery for one torus dimension.
// Everything is built from circulants sharing the discrete Fourier basis, so
// the first-derivative matrix is exactly antisymmetric and gradient /
// divergence are exact negative adjoints of each other on the grid.
class SpectralOps {
 public:
  explicit SpectralOps(int nx);

  int nx() const { return nx_; }
  // first derivative, aliased Nyquist mode annihilated
  const Eigen::MatrixXd& deriv() const { return deriv_; }
  // orthonormal real Fourier basis, column c has integer frequency freq(c)
  const Eigen::MatrixXd& basis() const { return basis_; }
  int freq(int column) const { return freq_[column]; }

  // circulant applying the multiplier g(|k|) in Fourier space
  Eigen::MatrixXd multiplier(const std::function<double(int)>& g) const;

  // shared per-nx cache
  static const SpectralOps& get(int nx);

 private:
  int nx_;
  Eigen::MatrixXd deriv_;
  Eigen::MatrixXd basis_;
  std::vector<int> freq_;
};

// PlayerField -> VectorField: component (i,(j,l)) = d/dx_{jl} of player i
Field spatial_gradient(const Field& f);

// VectorField -> PlayerField: player i gets sum over (j,l) of d/dx_{jl} a_{i,(j,l)}
Field spatial_divergence(const Field& a);

// SymMatrixField -> VectorField: -grad(U Psi)
Field apply_L(const Field& psi);

// VectorField -> SymMatrixField: U*(div a)
Field apply_L_adjoint(const Field& a);

// pointwise U applied to a matrix field
Field apply_U_field(const Field& psi);

// pointwise U* applied to a player field
Field apply_U_adjoint_field(const Field& y);

// Per player, solves the periodic Poisson problem (Laplacian psi = div v)
// with zero mean; optionally reports the H-norm of grad(psi) - v.
Field recover_potential(const Field& v, double* residual = nullptr);

// periodic Gaussian mollification with width sigma, every component
Field mollify(const Field& f, double sigma);

// max over low-mode space-time test fields Psi (|freq| <= 2 per dimension,
// time factors {t, t^2}) of the weak transport pairing of (E, B), normalized
// by the test-field H-norm.
double constraint_residual(const Field& e, const Field& b, int max_freq = 2);

}  // namespace dualflow
