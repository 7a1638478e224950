#include "mtsb/estimate.hpp"

#include <algorithm>
#include <cmath>

#include "mtsb/eig.hpp"

namespace mtsb {

RatioDiagnostics eigen_ratios(const Vector& eigenvalues, int J0) {
    const Index n = eigenvalues.size();
    if (J0 < 2 || J0 > n)
        throw InsufficientDataError("J0 = " + std::to_string(J0) + " outside 2.." +
                                    std::to_string(n));
    const double lead = eigenvalues(0);
    for (Index i = 0; i < n; ++i) {
        if (eigenvalues(i) < -1e-12 * std::max(lead, 0.0) - 1e-300)
            throw OrderError("eigenvalue " + std::to_string(i + 1) + " is negative");
        if (i + 1 < n && eigenvalues(i + 1) > eigenvalues(i) + 1e-12 * std::abs(lead))
            throw OrderError("eigenvalues not sorted descending at position " +
                             std::to_string(i + 1));
    }
    RatioDiagnostics diag;
    diag.eigenvalues = eigenvalues.cwiseMax(0.0);
    std::vector<double> ratios;
    if (lead > 0) {
        const double floor = 1e-12 * lead;
        for (int j = 1; j <= J0 - 1; ++j) {
            const double denom = diag.eigenvalues(j);  // lambda_{j+1}
            if (denom < floor) break;                  // 0/0 guard: truncate here
            ratios.push_back(diag.eigenvalues(j - 1) / denom);
        }
    }
    diag.ratios = Vector(static_cast<Index>(ratios.size()));
    for (size_t j = 0; j < ratios.size(); ++j) diag.ratios(static_cast<Index>(j)) = ratios[j];
    return diag;
}

std::pair<int, int> two_largest_local_maxima(RatioDiagnostics& diag) {
    const Index n = diag.ratios.size();
    if (n < 2)
        throw InsufficientDataError("need at least two ratios, have " + std::to_string(n));
    const auto& r = diag.ratios;
    diag.local_max_indices.clear();
    for (Index j = 0; j < n; ++j) {
        const bool left_ok = (j == 0) || r(j) >= r(j - 1);
        const bool right_ok = (j == n - 1) || r(j) >= r(j + 1);
        if (left_ok && right_ok) diag.local_max_indices.push_back(static_cast<int>(j) + 1);
    }
    std::vector<int> pool = diag.local_max_indices;
    diag.fallback_used = pool.size() < 2;
    if (diag.fallback_used) {
        pool.resize(static_cast<size_t>(n));
        for (Index j = 0; j < n; ++j) pool[static_cast<size_t>(j)] = static_cast<int>(j) + 1;
    }
    // order by (value desc, index asc); the top two are the chosen peaks
    std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) {
        if (r(a - 1) != r(b - 1)) return r(a - 1) > r(b - 1);
        return a < b;
    });
    diag.mu1 = pool[0];
    diag.mu2 = pool[1];
    diag.coincided = diag.mu1 == diag.mu2;
    return {diag.mu1, diag.mu2};
}

BaseAggregates compute_base_aggregates(const MatrixSeries& series, Index l0) {
    return {aggregate_M0(series, l0, Orientation::column),
            aggregate_M0(series, l0, Orientation::row)};
}

namespace {

int default_J0(Index dim) {
    const Index j = (dim + 1) / 2;  // ceil(dim/2)
    return static_cast<int>(std::clamp<Index>(j, 2, dim));
}

// Shared per-direction logic: ratios, peaks, strong = min, strong+weak = max.
void direction_counts(const Vector& eigenvalues, int J0, RatioDiagnostics& diag,
                      int& strong, int& weak, std::vector<std::string>& warnings,
                      const char* label) {
    diag = eigen_ratios(eigenvalues, J0);
    two_largest_local_maxima(diag);
    strong = std::min(diag.mu1, diag.mu2);
    const int total = std::max(diag.mu1, diag.mu2);
    if (total == strong) {
        weak = 1;  // degenerate single-peak case; documented fallback
        warnings.push_back(std::string(label) +
                           ": chosen ratio peaks coincide; weak count defaulted to 1");
    } else {
        weak = total - strong;
    }
    if (diag.fallback_used)
        warnings.push_back(std::string(label) +
                           ": fewer than two local maxima; used largest ratio values");
}

}  // namespace

FactorNumbers factor_numbers_from_aggregates(const BaseAggregates& agg, int J0_row,
                                             int J0_col) {
    const Index p = agg.row.rows(), q = agg.col.rows();
    if (J0_row == 0) J0_row = default_J0(p);
    if (J0_col == 0) J0_col = default_J0(q);
    FactorNumbers out;
    auto [row_vals, row_vecs] = sym_eig_all(agg.row);
    auto [col_vals, col_vecs] = sym_eig_all(agg.col);
    direction_counts(row_vals, J0_row, out.row_diag, out.k0, out.k, out.warnings, "rows");
    direction_counts(col_vals, J0_col, out.col_diag, out.r0, out.r, out.warnings, "columns");
    return out;
}

FactorNumbers estimate_factor_numbers(const MatrixSeries& series, Index l0, int J0_row,
                                      int J0_col) {
    return factor_numbers_from_aggregates(compute_base_aggregates(series, l0), J0_row,
                                          J0_col);
}

namespace {

void check_strong_counts(const MatrixSeries& series, int k0, int r0, Index l0) {
    if (k0 < 1 || k0 > series.rows())
        throw OrderError("k0 = " + std::to_string(k0) + " outside 1..p");
    if (r0 < 1 || r0 > series.cols())
        throw OrderError("r0 = " + std::to_string(r0) + " outside 1..q");
    if (l0 < 1) throw LagError("l0 must be >= 1");
}

}  // namespace

std::pair<LoadingMatrix, LoadingMatrix> global_loadings_from_aggregates(
    const MatrixSeries& series, const BaseAggregates& agg, int k0, int r0, Index l0,
    int refine_iters) {
    check_strong_counts(series, k0, r0, l0);
    if (refine_iters < 0) throw ConfigError("refine_iters must be >= 0");
    Matrix R = sym_eig_top(agg.row, k0).second;
    Matrix C = sym_eig_top(agg.col, r0).second;
    for (int it = 0; it < refine_iters; ++it) {
        // Both refinements project with the previous round's estimates.
        const LoadingMatrix R_prev(LoadingKind::global_row, R);
        const LoadingMatrix C_prev(LoadingKind::global_col, C);
        const Matrix M1 = aggregate_M_projected(series, C_prev, l0, Orientation::column);
        const Matrix M2 = aggregate_M_projected(series, R_prev, l0, Orientation::row);
        R = sym_eig_top(M1, k0).second;
        C = sym_eig_top(M2, r0).second;
    }
    return {LoadingMatrix(LoadingKind::global_row, std::move(R)),
            LoadingMatrix(LoadingKind::global_col, std::move(C))};
}

std::pair<LoadingMatrix, LoadingMatrix> estimate_global_loadings(const MatrixSeries& series,
                                                                int k0, int r0, Index l0,
                                                                int refine_iters) {
    check_strong_counts(series, k0, r0, l0);
    return global_loadings_from_aggregates(series, compute_base_aggregates(series, l0), k0,
                                           r0, l0, refine_iters);
}

std::pair<LoadingMatrix, LoadingMatrix> estimate_cluster_loadings(
    const MatrixSeries& series, const LoadingMatrix& R, const LoadingMatrix& C, int k,
    int r, Index l0) {
    const Index p = series.rows(), q = series.cols();
    if (k < 1 || k > p - R.n_factors())
        throw OrderError("k = " + std::to_string(k) + " outside 1..p-k0");
    if (r < 1 || r > q - C.n_factors())
        throw OrderError("r = " + std::to_string(r) + " outside 1..q-r0");
    if (l0 < 1) throw LagError("l0 must be >= 1");
    const MatrixSeries Y = residual_series(series, R, C);
    const Matrix Ms01 = aggregate_Mstar0(Y, l0, Orientation::column);
    const Matrix Ms02 = aggregate_Mstar0(Y, l0, Orientation::row);
    const LoadingMatrix Gamma0(LoadingKind::local_row, sym_eig_top(Ms01, k).second);
    const LoadingMatrix Lambda0(LoadingKind::local_col, sym_eig_top(Ms02, r).second);
    const Matrix Ms1 = aggregate_Mstar_projected(Y, Lambda0, l0, Orientation::column);
    const Matrix Ms2 = aggregate_Mstar_projected(Y, Gamma0, l0, Orientation::row);
    return {LoadingMatrix(LoadingKind::local_row, sym_eig_top(Ms1, k).second),
            LoadingMatrix(LoadingKind::local_col, sym_eig_top(Ms2, r).second)};
}

}  // namespace mtsb
