#pragma once

#include <unsupported/Eigen/FFT>

#include "ivlab/core.hpp"

namespace ivlab {

/// Forward DFT along every axis of a flattened complex grid field (in place).
void fft_forward(const TorusDomain& dom, ArrayXcd& f);
void fft_inverse(const TorusDomain& dom, ArrayXcd& f);

/// Symbol of the (2n+1)-point periodic Laplacian at lattice mode k.
Real laplace_symbol(const TorusDomain& dom, const std::array<int, 3>& k);

/// Solve (-Laplace_h + sigma) z = r on the grid, r real, sigma >= 0.
/// For sigma == 0 the mean of r must vanish; the mean of z is set to zero.
ArrayXd helmholtz_inverse(const TorusDomain& dom, const ArrayXd& r, Real sigma);

/// Complex-field version of the same solve (acts on both real parts).
ArrayXcd helmholtz_inverse(const TorusDomain& dom, const ArrayXcd& r, Real sigma);

}  // namespace ivlab
