#pragma once

#include "sybilreg/model.hpp"
#include "sybilreg/weights.hpp"

namespace sybilreg {

/// beta = (X'WX)^-1 X'Wy, sigma2_hat = r'Wr / (N - p),
/// cov_beta = sigma2_hat (X'WX)^-1.
///
/// Block weights are never materialized: X'WX, X'Wy and r'Wr are accumulated
/// per network in O(N p^2). Throws DimensionMismatch when W is not N x N and
/// RankDeficientDesign when the reciprocal condition estimate of X'WX drops
/// below 1e-12. With N == p the fit interpolates and sigma2_hat is reported
/// as 0 with zero residual degrees of freedom.
FitResult weighted_fit(const Dataset& ds, const WeightMatrix& w);

/// Identity-weight fit, sharing the block path of weighted_fit.
FitResult ols_fit(const Dataset& ds);

}  // namespace sybilreg
