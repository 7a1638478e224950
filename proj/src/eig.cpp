#include "mtsb/eig.hpp"

#include <cmath>

namespace mtsb {

namespace {

// Flip each column so the entry of largest absolute value is positive.
// Ties go to the earliest such entry, making the convention deterministic.
void fix_signs(Matrix& vecs) {
    for (Index c = 0; c < vecs.cols(); ++c) {
        Index arg = 0;
        double best = -1.0;
        for (Index i = 0; i < vecs.rows(); ++i) {
            const double a = std::abs(vecs(i, c));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (vecs(arg, c) < 0) vecs.col(c) = -vecs.col(c);
    }
}

Matrix check_and_symmetrize(const Matrix& M) {
    if (M.rows() != M.cols())
        throw DimensionError("eigendecomposition input is " + std::to_string(M.rows()) + "x" +
                             std::to_string(M.cols()) + ", expected square");
    const double max_abs = M.cwiseAbs().maxCoeff();
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-8 * max_abs)
        throw SymmetryError("matrix not symmetric: max |M - M^T| = " + std::to_string(asym));
    return 0.5 * (M + M.transpose());
}

}  // namespace

std::pair<Vector, Matrix> sym_eig_top(const Matrix& M, Index k) {
    const Matrix B = check_and_symmetrize(M);
    const Index d = B.rows();
    if (k < 1 || k > d)
        throw DimensionError("requested " + std::to_string(k) + " eigenpairs of a " +
                             std::to_string(d) + "x" + std::to_string(d) + " matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(B);
    if (solver.info() != Eigen::Success)
        throw Error("symmetric eigendecomposition failed to converge");
    // Eigen returns ascending order; take the top k reversed.
    Vector vals(k);
    Matrix vecs(d, k);
    for (Index i = 0; i < k; ++i) {
        vals(i) = solver.eigenvalues()(d - 1 - i);
        vecs.col(i) = solver.eigenvectors().col(d - 1 - i);
    }
    fix_signs(vecs);
    return {vals, vecs};
}

std::pair<Vector, Matrix> sym_eig_all(const Matrix& M) {
    return sym_eig_top(M, M.rows());
}

Matrix residual_projector(const Matrix& V) {
    const Index d = V.rows(), k = V.cols();
    if (d < 1) throw DimensionError("projector input needs at least one row");
    if (k > 0) {
        const double dev =
            (V.transpose() * V - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
        if (dev >= 1e-8)
            throw OrthonormalityError("projector input not orthonormal (max deviation " +
                                      std::to_string(dev) + ")");
    }
    return Matrix::Identity(d, d) - V * V.transpose();
}

Matrix orthonormal_basis(const Matrix& S) {
    const Index d = S.rows(), k = S.cols();
    if (k < 1 || k > d)
        throw DimensionError("basis input must have 1..d columns, got " + std::to_string(k));
    Eigen::ColPivHouseholderQR<Matrix> qr(S);
    const auto& qrR = qr.matrixR();
    const double lead = std::abs(qrR(0, 0));
    const double tail = std::abs(qrR(k - 1, k - 1));
    if (lead <= 0.0 || tail <= 1e-10 * lead)
        throw RankError("matrix is rank deficient (diag ratio " +
                        std::to_string(lead > 0 ? tail / lead : 0.0) + ")");
    return qr.householderQ() * Matrix::Identity(d, k);
}

double space_distance(const Matrix& S1, const Matrix& S2) {
    if (S1.rows() != S2.rows())
        throw DimensionError("space_distance inputs have different row counts: " +
                             std::to_string(S1.rows()) + " vs " + std::to_string(S2.rows()));
    const Index k1 = S1.cols(), k2 = S2.cols();
    if (k1 < 1 || k2 < 1) throw DimensionError("space_distance inputs need at least one column");
    if (k1 > S1.rows() || k2 > S2.rows())
        throw RankError("more columns than rows cannot have full column rank");
    const Matrix O1 = orthonormal_basis(S1);
    const Matrix O2 = orthonormal_basis(S2);
    const double trace = (O1.transpose() * O2).squaredNorm();
    const double inside = 1.0 - trace / static_cast<double>(std::min(k1, k2));
    return std::sqrt(std::min(1.0, std::max(0.0, inside)));
}

}  // namespace mtsb
