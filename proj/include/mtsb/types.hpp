#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "mtsb/errors.hpp"

namespace mtsb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;
using Index = Eigen::Index;

// A length-T sequence of p x q observation matrices with optional axis labels.
class MatrixSeries {
public:
    explicit MatrixSeries(std::vector<Matrix> frames,
                          std::vector<std::string> row_labels = {},
                          std::vector<std::string> col_labels = {});

    Index length() const { return static_cast<Index>(frames_.size()); }
    Index rows() const { return frames_.front().rows(); }
    Index cols() const { return frames_.front().cols(); }
    const Matrix& frame(Index t) const { return frames_[static_cast<size_t>(t)]; }
    const std::vector<Matrix>& frames() const { return frames_; }
    const std::vector<std::string>& row_labels() const { return row_labels_; }
    const std::vector<std::string>& col_labels() const { return col_labels_; }

    // First t frames (labels kept). Used by the rolling fit.
    MatrixSeries head(Index t) const;

    // T x (p*q) matrix whose row t is vec(X_t)^T (columns stacked).
    Matrix flattened() const;
    // T x (q*p) matrix whose row t is vec(X_t^T)^T (rows of X_t stacked).
    Matrix flattened_transposed() const;

private:
    std::vector<Matrix> frames_;
    std::vector<std::string> row_labels_, col_labels_;
};

enum class LoadingKind { global_row, global_col, local_row, local_col };

// Orthonormal-column loading matrix (estimate or truth basis).
// n_factors == 0 is permitted as a test/baseline hook ("no factors on this side");
// every estimation routine returns at least one column.
class LoadingMatrix {
public:
    LoadingMatrix() : kind_(LoadingKind::global_row), values_(Matrix::Zero(1, 0)) {}
    LoadingMatrix(LoadingKind kind, Matrix values);

    LoadingKind kind() const { return kind_; }
    const Matrix& values() const { return values_; }
    Index dim() const { return values_.rows(); }
    Index n_factors() const { return values_.cols(); }

private:
    LoadingKind kind_;
    Matrix values_;
};

// The four estimated loading matrices of the two-way model.
struct LoadingSet {
    LoadingMatrix R;       // p x k0, global row
    LoadingMatrix C;       // q x r0, global col
    LoadingMatrix Gamma;   // p x k, cluster-specific row (may be empty for baselines)
    LoadingMatrix Lambda;  // q x r, cluster-specific col
};

// Eigenvalue-ratio bookkeeping for one direction (rows or columns).
struct RatioDiagnostics {
    Vector eigenvalues;                   // descending, full spectrum of the aggregate
    Vector ratios;                        // ratios[j-1] = lambda_j / lambda_{j+1}, truncated
    std::vector<int> local_max_indices;   // 1-based positions in `ratios`
    int mu1 = 0;                          // peak with the larger ratio value (1-based)
    int mu2 = 0;                          // second peak
    bool fallback_used = false;           // fewer than two local maxima -> largest values
    bool coincided = false;               // degenerate: both chosen indices equal
};

struct FactorNumbers {
    int k0 = 0, k = 0;  // strong / weak row factor counts
    int r0 = 0, r = 0;  // strong / weak column factor counts
    RatioDiagnostics row_diag, col_diag;
    std::vector<std::string> warnings;
};

struct BiclusterResult {
    IntVector row_membership;  // length p, values in 1..m_hat
    IntVector col_membership;  // length q, values in 1..n_hat
    int m_hat = 0, n_hat = 0;
    Matrix D_row;              // p x p similarity matrix
    Matrix D_col;              // q x q similarity matrix
    Vector absgram_eigs_row;   // eigenvalues of |Gamma Gamma^T|, descending
    Vector absgram_eigs_col;   // eigenvalues of |Lambda Lambda^T|, descending
    double eig_threshold = 0;  // 1 - 1/log(T)
    std::vector<std::string> warnings;
};

}  // namespace mtsb
