#pragma once

#include "mtsb/types.hpp"

namespace mtsb {

enum class Orientation { column, row };

// Sample lag-l cross-covariance between column (or row) i and column (row) j:
//   column: (T-l)^{-1} sum_t x_{t,.i} x_{t+l,.j}^T   (p x p)
//   row:    (T-l)^{-1} sum_t x_{t,i.} x_{t+l,j.}^T   (q x q)
// No mean subtraction; demeaning, when wanted, happens upstream.
Matrix lag_cross_cov(const MatrixSeries& series, Index i, Index j, Index l,
                     Orientation orientation);

// M0 aggregate: sum over lags 1..l0 and all index pairs (i,j) of
// Sigma_ij(l) Sigma_ij(l)^T. Column orientation gives the p x p matrix whose
// leading eigenvectors estimate the row loading space; row orientation the
// q x q counterpart.
Matrix aggregate_M0(const MatrixSeries& series, Index l0, Orientation orientation);

// Same aggregate on the projected series Z_t = X_t P (column orientation,
// P is q x r0) or W_t = X_t^T P (row orientation, P is p x k0); the inner
// double sum then runs over the projected dimension.
Matrix aggregate_M_projected(const MatrixSeries& series, const LoadingMatrix& proj,
                             Index l0, Orientation orientation);

// Y_t = (I - R R^T) X_t (I - C C^T). Empty loadings leave that side alone.
MatrixSeries residual_series(const MatrixSeries& series, const LoadingMatrix& R,
                             const LoadingMatrix& C);

// The starred aggregates are the same computations applied to residuals;
// separate entry points keep call sites readable.
Matrix aggregate_Mstar0(const MatrixSeries& residuals, Index l0, Orientation orientation);
Matrix aggregate_Mstar_projected(const MatrixSeries& residuals, const LoadingMatrix& proj,
                                 Index l0, Orientation orientation);

// Lag-range partial of the M0 aggregate (lags l_lo..l_hi inclusive); the full
// aggregate is the partial over 1..l0. Lets multi-l0 sweeps reuse work.
Matrix aggregate_M0_partial(const MatrixSeries& series, Index l_lo, Index l_hi,
                            Orientation orientation);

}  // namespace mtsb
