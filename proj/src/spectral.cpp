#include "mtsb/spectral.hpp"

#include "mtsb/eig.hpp"

namespace mtsb {

namespace {

void check_lag_range(Index l_lo, Index l_hi, Index T) {
    if (l_lo < 1 || l_hi < l_lo)
        throw LagError("invalid lag range " + std::to_string(l_lo) + ".." + std::to_string(l_hi));
    if (l_hi >= T)
        throw LagError("lag " + std::to_string(l_hi) + " needs T > " + std::to_string(l_hi) +
                       " observations, have " + std::to_string(T));
}

// Shared fast path. `flat` is T x (d*inner) with row t = concatenation of the
// `inner` d-vectors of frame t (columns for column orientation, rows for row
// orientation). For each lag and each fiber index i, one GEMM forms all
// cross-covariances S_i = [Sigma_i1 ... Sigma_i,inner] at once and
// S_i S_i^T accumulates their outer products; this never materializes the
// (d*inner)^2 cross-moment.
Matrix aggregate_flat(const Matrix& flat, Index d, Index inner, Index l_lo, Index l_hi) {
    const Index T = flat.rows();
    check_lag_range(l_lo, l_hi, T);
    Matrix M = Matrix::Zero(d, d);
    Matrix S(d, d * inner);
    for (Index l = l_lo; l <= l_hi; ++l) {
        const double scale = 1.0 / static_cast<double>(T - l);
        const auto lead = flat.topRows(T - l);      // t = 1 .. T-l
        const auto lagged = flat.bottomRows(T - l); // t = l+1 .. T
        for (Index i = 0; i < inner; ++i) {
            S.noalias() = scale * (lead.middleCols(i * d, d).transpose() * lagged);
            M.noalias() += S * S.transpose();
        }
    }
    return 0.5 * (M + M.transpose());
}

Matrix flatten(const MatrixSeries& series, Orientation orientation) {
    return orientation == Orientation::column ? series.flattened()
                                              : series.flattened_transposed();
}

Matrix flatten_projected(const MatrixSeries& series, const Matrix& P,
                         Orientation orientation) {
    const Index T = series.length();
    const Index d = orientation == Orientation::column ? series.rows() : series.cols();
    const Index inner = P.cols();
    Matrix flat(T, d * inner);
    for (Index t = 0; t < T; ++t) {
        const Matrix Zt = orientation == Orientation::column
                              ? Matrix(series.frame(t) * P)
                              : Matrix(series.frame(t).transpose() * P);
        flat.row(t) = Eigen::Map<const Vector>(Zt.data(), d * inner);
    }
    return flat;
}

}  // namespace

Matrix lag_cross_cov(const MatrixSeries& series, Index i, Index j, Index l,
                     Orientation orientation) {
    const Index T = series.length();
    check_lag_range(l, l, T);
    const Index inner = orientation == Orientation::column ? series.cols() : series.rows();
    if (i < 0 || i >= inner || j < 0 || j >= inner)
        throw DimensionError("fiber index out of range");
    const Index d = orientation == Orientation::column ? series.rows() : series.cols();
    Matrix sum = Matrix::Zero(d, d);
    for (Index t = 0; t + l < T; ++t) {
        const auto& a = series.frame(t);
        const auto& b = series.frame(t + l);
        if (orientation == Orientation::column)
            sum.noalias() += a.col(i) * b.col(j).transpose();
        else
            sum.noalias() += a.row(i).transpose() * b.row(j);
    }
    return sum / static_cast<double>(T - l);
}

Matrix aggregate_M0_partial(const MatrixSeries& series, Index l_lo, Index l_hi,
                            Orientation orientation) {
    const Index d = orientation == Orientation::column ? series.rows() : series.cols();
    const Index inner = orientation == Orientation::column ? series.cols() : series.rows();
    return aggregate_flat(flatten(series, orientation), d, inner, l_lo, l_hi);
}

Matrix aggregate_M0(const MatrixSeries& series, Index l0, Orientation orientation) {
    return aggregate_M0_partial(series, 1, l0, orientation);
}

Matrix aggregate_M_projected(const MatrixSeries& series, const LoadingMatrix& proj,
                             Index l0, Orientation orientation) {
    const Index d = orientation == Orientation::column ? series.rows() : series.cols();
    const Index opposite = orientation == Orientation::column ? series.cols() : series.rows();
    if (proj.dim() != opposite)
        throw DimensionError("projection matrix has " + std::to_string(proj.dim()) +
                             " rows, expected " + std::to_string(opposite));
    if (proj.n_factors() < 1) throw DimensionError("projection matrix needs columns");
    return aggregate_flat(flatten_projected(series, proj.values(), orientation), d,
                          proj.n_factors(), 1, l0);
}

MatrixSeries residual_series(const MatrixSeries& series, const LoadingMatrix& R,
                             const LoadingMatrix& C) {
    if (R.n_factors() > 0 && R.dim() != series.rows())
        throw DimensionError("row loading dimension mismatch");
    if (C.n_factors() > 0 && C.dim() != series.cols())
        throw DimensionError("column loading dimension mismatch");
    const Matrix Pr = R.n_factors() > 0 ? residual_projector(R.values())
                                        : Matrix::Identity(series.rows(), series.rows());
    const Matrix Pc = C.n_factors() > 0 ? residual_projector(C.values())
                                        : Matrix::Identity(series.cols(), series.cols());
    std::vector<Matrix> out;
    out.reserve(static_cast<size_t>(series.length()));
    for (Index t = 0; t < series.length(); ++t) out.push_back(Pr * series.frame(t) * Pc);
    return MatrixSeries(std::move(out), series.row_labels(), series.col_labels());
}

Matrix aggregate_Mstar0(const MatrixSeries& residuals, Index l0, Orientation orientation) {
    return aggregate_M0(residuals, l0, orientation);
}

Matrix aggregate_Mstar_projected(const MatrixSeries& residuals, const LoadingMatrix& proj,
                                 Index l0, Orientation orientation) {
    return aggregate_M_projected(residuals, proj, l0, orientation);
}

}  // namespace mtsb
