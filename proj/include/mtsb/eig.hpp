#pragma once

#include "mtsb/types.hpp"

namespace mtsb {

// Top-k eigenpairs of a symmetric matrix, eigenvalues descending.
// Each eigenvector is sign-fixed so its largest-|entry| component is positive,
// which keeps repeated runs bit-identical. Input is symmetrized (averaged with
// its transpose) after a tolerance check, since accumulation noise is expected.
std::pair<Vector, Matrix> sym_eig_top(const Matrix& M, Index k);

// Full spectrum variant (descending); used for eigenvalue-ratio diagnostics.
std::pair<Vector, Matrix> sym_eig_all(const Matrix& M);

// P = I - V V^T for column-orthonormal V.
Matrix residual_projector(const Matrix& V);

// Orthonormal basis of span(S) via rank-revealing QR; RankError when S is
// not numerically of full column rank.
Matrix orthonormal_basis(const Matrix& S);

// Distance between the column spaces of S1 (d x k1) and S2 (d x k2):
//   D(S1,S2) = (1 - tr(O1 O1^T O2 O2^T)/min(k1,k2))^(1/2),
// where O_i is an orthonormal basis of span(S_i). 0 when one space contains
// the other, 1 when the spaces are orthogonal.
double space_distance(const Matrix& S1, const Matrix& S2);

}  // namespace mtsb
