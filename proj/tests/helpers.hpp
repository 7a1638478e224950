#pragma once

// Shared utilities for the unit and acceptance suites: deterministic RNG
// helpers, random inputs, and independent naive oracles for the aggregation
// matrices. Oracles here deliberately avoid library code paths: they sum
// outer products term by term so the fast blocked implementations are
// checked against a straightforward transcription of the definitions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mtsb/types.hpp"

namespace testutil {

using mtsb::Index;
using mtsb::IntVector;
using mtsb::Matrix;
using mtsb::MatrixSeries;
using mtsb::Vector;

using TestRng = std::mt19937_64;

inline double unif(TestRng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int unif_int(TestRng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double gauss(TestRng& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline Matrix random_matrix(TestRng& rng, Index rows, Index cols, double scale = 1.0) {
    Matrix M(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r) M(r, c) = scale * gauss(rng);
    return M;
}

inline Vector random_vector(TestRng& rng, Index n, double scale = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = scale * gauss(rng);
    return v;
}

// Column-orthonormal d x k matrix from the QR of a Gaussian draw.
inline Matrix random_orthonormal(TestRng& rng, Index d, Index k) {
    const Matrix A = random_matrix(rng, d, k);
    Eigen::HouseholderQR<Matrix> qr(A);
    return qr.householderQ() * Matrix::Identity(d, k);
}

// Well-conditioned random invertible k x k matrix (singular values in [0.5, 2]).
inline Matrix random_invertible(TestRng& rng, Index k) {
    const Matrix U = random_orthonormal(rng, k, k);
    const Matrix V = random_orthonormal(rng, k, k);
    Vector s(k);
    for (Index i = 0; i < k; ++i) s(i) = unif(rng, 0.5, 2.0);
    return U * s.asDiagonal() * V.transpose();
}

inline std::vector<Matrix> random_frames(TestRng& rng, Index T, Index p, Index q,
                                         double scale = 1.0) {
    std::vector<Matrix> frames;
    frames.reserve(static_cast<size_t>(T));
    for (Index t = 0; t < T; ++t) frames.push_back(random_matrix(rng, p, q, scale));
    return frames;
}

inline MatrixSeries random_series(TestRng& rng, Index T, Index p, Index q,
                                  double scale = 1.0) {
    return MatrixSeries(random_frames(rng, T, p, q, scale));
}

// Max-abs relative error against a reference matrix.
inline double rel_err(const Matrix& got, const Matrix& want) {
    const double denom = std::max(want.cwiseAbs().maxCoeff(), 1e-300);
    return (got - want).cwiseAbs().maxCoeff() / denom;
}

inline double max_abs(const Matrix& M) { return M.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------------------
// Naive oracles for the aggregation matrices (direct triple sums).
// ---------------------------------------------------------------------------

// Sample lag-l cross-covariance of columns i and j, summed outer product by
// outer product: (T-l)^{-1} sum_t x_{t,.i} x_{t+l,.j}^T.
inline Matrix naive_lag_cov(const std::vector<Matrix>& frames, Index i, Index j, Index l) {
    const Index T = static_cast<Index>(frames.size());
    const Index p = frames.front().rows();
    Matrix sum = Matrix::Zero(p, p);
    for (Index t = 0; t + l < T; ++t)
        sum += frames[static_cast<size_t>(t)].col(i) *
               frames[static_cast<size_t>(t + l)].col(j).transpose();
    return sum / static_cast<double>(T - l);
}

// Naive column-orientation aggregate: sum over lags 1..l0 and all column
// pairs (i,j) of Sigma_ij(l) Sigma_ij(l)^T.
inline Matrix naive_M0_columns(const std::vector<Matrix>& frames, Index l0) {
    const Index p = frames.front().rows();
    const Index q = frames.front().cols();
    Matrix M = Matrix::Zero(p, p);
    for (Index l = 1; l <= l0; ++l)
        for (Index i = 0; i < q; ++i)
            for (Index j = 0; j < q; ++j) {
                const Matrix S = naive_lag_cov(frames, i, j, l);
                M += S * S.transpose();
            }
    return M;
}

inline std::vector<Matrix> transpose_frames(const std::vector<Matrix>& frames) {
    std::vector<Matrix> out;
    out.reserve(frames.size());
    for (const auto& X : frames) out.push_back(X.transpose());
    return out;
}

// Row orientation = the same computation on transposed frames.
inline Matrix naive_M0_rows(const std::vector<Matrix>& frames, Index l0) {
    return naive_M0_columns(transpose_frames(frames), l0);
}

inline std::vector<Matrix> right_multiplied_frames(const std::vector<Matrix>& frames,
                                                   const Matrix& P) {
    std::vector<Matrix> out;
    out.reserve(frames.size());
    for (const auto& X : frames) out.push_back(X * P);
    return out;
}

// Y_t = (I - R R^T) X_t (I - C C^T), formed with explicit projector matrices.
inline std::vector<Matrix> naive_residual_frames(const std::vector<Matrix>& frames,
                                                 const Matrix& R, const Matrix& C) {
    const Index p = frames.front().rows();
    const Index q = frames.front().cols();
    const Matrix Pr = Matrix::Identity(p, p) - R * R.transpose();
    const Matrix Pc = Matrix::Identity(q, q) - C * C.transpose();
    std::vector<Matrix> out;
    out.reserve(frames.size());
    for (const auto& X : frames) out.push_back(Pr * X * Pc);
    return out;
}

// ---------------------------------------------------------------------------
// Membership / assignment oracles.
// ---------------------------------------------------------------------------

// Exhaustive best-matching agreement between two label vectors: tries every
// injective map from one label set into the other (via permutations of the
// larger set) and returns the maximum number of agreeing positions.
inline long long exhaustive_best_agreement(const IntVector& found, const IntVector& truth) {
    std::vector<int> fl, tl;
    auto index_of = [](std::vector<int>& pool, int v) {
        for (size_t i = 0; i < pool.size(); ++i)
            if (pool[i] == v) return static_cast<int>(i);
        pool.push_back(v);
        return static_cast<int>(pool.size() - 1);
    };
    const Index n = found.size();
    std::vector<int> f(static_cast<size_t>(n)), t(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) {
        f[static_cast<size_t>(i)] = index_of(fl, found(i));
        t[static_cast<size_t>(i)] = index_of(tl, truth(i));
    }
    const int m = static_cast<int>(std::max(fl.size(), tl.size()));
    std::vector<int> perm(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) perm[static_cast<size_t>(i)] = i;
    long long best = 0;
    do {
        long long agree = 0;
        for (Index i = 0; i < n; ++i)
            if (perm[static_cast<size_t>(f[static_cast<size_t>(i)])] ==
                t[static_cast<size_t>(i)])
                ++agree;
        best = std::max(best, agree);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Exhaustive K-means optimum over all assignments of d points to K clusters,
// with each cluster center at the mean of its members; empty clusters allowed
// (they contribute nothing). Feasible for K^d up to a few thousand.
inline double exhaustive_kmeans_objective(const Matrix& pts, int K) {
    const Index d = pts.rows();
    std::vector<int> assign(static_cast<size_t>(d), 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        Matrix centers = Matrix::Zero(K, pts.cols());
        std::vector<int> sizes(static_cast<size_t>(K), 0);
        for (Index i = 0; i < d; ++i) {
            centers.row(assign[static_cast<size_t>(i)]) += pts.row(i);
            ++sizes[static_cast<size_t>(assign[static_cast<size_t>(i)])];
        }
        for (int c = 0; c < K; ++c)
            if (sizes[static_cast<size_t>(c)] > 0)
                centers.row(c) /= static_cast<double>(sizes[static_cast<size_t>(c)]);
        double obj = 0;
        for (Index i = 0; i < d; ++i)
            obj += (pts.row(i) - centers.row(assign[static_cast<size_t>(i)])).squaredNorm();
        best = std::min(best, obj);
        Index pos = 0;
        while (pos < d && assign[static_cast<size_t>(pos)] == K - 1) {
            assign[static_cast<size_t>(pos)] = 0;
            ++pos;
        }
        if (pos == d) break;
        ++assign[static_cast<size_t>(pos)];
    }
    return best;
}

// Sample autocorrelation at a given lag (mean-corrected, biased denominator).
inline double sample_autocorr(const Vector& x, Index lag) {
    const Index T = x.size();
    const double mean = x.mean();
    double num = 0, den = 0;
    for (Index t = 0; t < T; ++t) den += (x(t) - mean) * (x(t) - mean);
    for (Index t = 0; t + lag < T; ++t) num += (x(t) - mean) * (x(t + lag) - mean);
    return num / den;
}

inline double sample_sd(const Vector& x) {
    const Index T = x.size();
    const double mean = x.mean();
    double ss = 0;
    for (Index t = 0; t < T; ++t) ss += (x(t) - mean) * (x(t) - mean);
    return std::sqrt(ss / static_cast<double>(T - 1));
}

}  // namespace testutil
