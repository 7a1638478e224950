#pragma once

#include "mtsb/spectral.hpp"
#include "mtsb/types.hpp"

namespace mtsb {

// Consecutive-eigenvalue ratios lambda_j / lambda_{j+1} for j = 1..J0-1.
// The sequence stops early at the first j whose denominator drops below
// 1e-12 * lambda_1, which keeps near-0/0 tails out of the peak search.
RatioDiagnostics eigen_ratios(const Vector& eigenvalues, int J0);

// Picks the two local maxima with the largest ratio values (ties toward the
// smaller index). With fewer than two local maxima the two largest ratio
// values overall are used instead; `diag.fallback_used` records this. Fills
// diag.local_max_indices / mu1 / mu2 and returns (mu1, mu2), mu1 being the
// peak with the larger value.
std::pair<int, int> two_largest_local_maxima(RatioDiagnostics& diag);

// The two base aggregates everything downstream keys off: M0 in column
// orientation (p x p) and row orientation (q x q). Exposed so callers running
// several stages on one series can compute them once.
struct BaseAggregates {
    Matrix row;  // p x p, estimates the row loading space
    Matrix col;  // q x q, estimates the column loading space
};
BaseAggregates compute_base_aggregates(const MatrixSeries& series, Index l0);

// One-pass estimation of (k0, k, r0, r): per direction, the strong count is
// the smaller and strong+weak the larger of the two chosen ratio peaks.
// J0 of 0 means the default ceil(dim/2).
FactorNumbers estimate_factor_numbers(const MatrixSeries& series, Index l0,
                                      int J0_row = 0, int J0_col = 0);
FactorNumbers factor_numbers_from_aggregates(const BaseAggregates& agg,
                                             int J0_row = 0, int J0_col = 0);

// Global loading estimation: initial estimates from the base aggregates,
// then one projection refinement (Z_t = X_t C0, W_t = X_t^T R0) by default.
std::pair<LoadingMatrix, LoadingMatrix> estimate_global_loadings(
    const MatrixSeries& series, int k0, int r0, Index l0, int refine_iters = 1);
std::pair<LoadingMatrix, LoadingMatrix> global_loadings_from_aggregates(
    const MatrixSeries& series, const BaseAggregates& agg, int k0, int r0, Index l0,
    int refine_iters = 1);

// Cluster-specific loading estimation on the residual series
// Y_t = (I - R R^T) X_t (I - C C^T); initial estimates from the starred base
// aggregates, then one projection step (U_t = Y_t Lambda0, H_t = Y_t^T Gamma0).
// The estimands are the projected spaces (I - R R^T) Gamma and
// (I - C C^T) Lambda.
std::pair<LoadingMatrix, LoadingMatrix> estimate_cluster_loadings(
    const MatrixSeries& series, const LoadingMatrix& R, const LoadingMatrix& C,
    int k, int r, Index l0);

}  // namespace mtsb
