#pragma once

// Randomized property suites shared by the unit tests and the acceptance
// gate. Each suite runs `trials` independent randomized cases and returns an
// empty string on success, or a message describing the first failure. Seeds
// are fixed inside each suite so results are reproducible.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "mtsb/bicluster.hpp"
#include "mtsb/eig.hpp"
#include "mtsb/io.hpp"
#include "mtsb/simulate.hpp"
#include "mtsb/spectral.hpp"

namespace testprops {

using namespace testutil;

inline std::string trial_msg(const char* suite, int trial, const std::string& what) {
    return std::string(suite) + " trial " + std::to_string(trial + 1) + ": " + what;
}

// Eigenvector orthonormality, descending eigenvalues, and the deterministic
// sign convention, on random symmetric matrices.
inline std::string prop_orthonormality(int trials) {
    TestRng rng(991001);
    for (int trial = 0; trial < trials; ++trial) {
        const Index d = unif_int(rng, 2, 8);
        const Index k = unif_int(rng, 1, static_cast<int>(d));
        const Matrix A = random_matrix(rng, d, d, unif(rng, 0.5, 3.0));
        const Matrix M = A + A.transpose();
        auto [vals, vecs] = mtsb::sym_eig_top(M, k);
        const double dev =
            (vecs.transpose() * vecs - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
        if (dev > 1e-10)
            return trial_msg("orthonormality", trial,
                             "eigenvectors deviate from orthonormal by " + std::to_string(dev));
        for (Index c = 0; c < k; ++c) {
            if (c + 1 < k && vals(c) < vals(c + 1) - 1e-12)
                return trial_msg("orthonormality", trial, "eigenvalues not descending");
            Index arg = 0;
            double best = -1.0;
            for (Index i = 0; i < d; ++i)
                if (std::abs(vecs(i, c)) > best) {
                    best = std::abs(vecs(i, c));
                    arg = i;
                }
            if (vecs(arg, c) < 0)
                return trial_msg("orthonormality", trial, "sign convention violated");
        }
        try {
            mtsb::LoadingMatrix probe(mtsb::LoadingKind::global_row, vecs);
        } catch (const mtsb::Error& e) {
            return trial_msg("orthonormality", trial,
                             std::string("LoadingMatrix rejected eigenvectors: ") + e.what());
        }
    }
    return {};
}

// Symmetry and positive semidefiniteness of the base aggregates on random
// series, both orientations.
inline std::string prop_psd(int trials) {
    TestRng rng(991002);
    for (int trial = 0; trial < trials; ++trial) {
        const Index T = unif_int(rng, 3, 10);
        const Index p = unif_int(rng, 1, 4);
        const Index q = unif_int(rng, 1, 4);
        const Index l0 = unif_int(rng, 1, static_cast<int>(std::min<Index>(3, T - 1)));
        const MatrixSeries series = random_series(rng, T, p, q, unif(rng, 0.2, 2.0));
        for (const auto orientation : {mtsb::Orientation::column, mtsb::Orientation::row}) {
            const Matrix M = mtsb::aggregate_M0(series, l0, orientation);
            const double scale = std::max(M.cwiseAbs().maxCoeff(), 1e-300);
            if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
                return trial_msg("psd", trial, "aggregate not symmetric");
            const Vector eigs = Eigen::SelfAdjointEigenSolver<Matrix>(M).eigenvalues();
            if (eigs.minCoeff() < -1e-8 * scale)
                return trial_msg("psd", trial,
                                 "negative eigenvalue " + std::to_string(eigs.minCoeff()));
        }
    }
    return {};
}

// space_distance axioms: range, symmetry, zero for identical spans, one for
// orthogonal spans, invariance to right-multiplication by invertible maps.
inline std::string prop_distance_axioms(int trials) {
    TestRng rng(991003);
    for (int trial = 0; trial < trials; ++trial) {
        const Index d = unif_int(rng, 2, 8);
        const Index k1 = unif_int(rng, 1, static_cast<int>(d) - 1);
        const Index k2 = unif_int(rng, 1, static_cast<int>(d - k1));
        const Matrix S1 = random_orthonormal(rng, d, k1) * random_invertible(rng, k1);
        const Matrix S2 = random_orthonormal(rng, d, k2) * random_invertible(rng, k2);
        const double d12 = mtsb::space_distance(S1, S2);
        const double d21 = mtsb::space_distance(S2, S1);
        if (d12 < 0.0 || d12 > 1.0)
            return trial_msg("distance", trial, "value outside [0,1]");
        if (std::abs(d12 - d21) > 1e-12)
            return trial_msg("distance", trial, "not symmetric in its arguments");
        if (mtsb::space_distance(S1, S1 * random_invertible(rng, k1)) > 1e-6)
            return trial_msg("distance", trial, "identical spans not at distance 0");
        const Matrix Q = random_orthonormal(rng, d, d);
        const Matrix O1 = Q.leftCols(k1) * random_invertible(rng, k1);
        const Matrix O2 = Q.middleCols(k1, k2) * random_invertible(rng, k2);
        if (mtsb::space_distance(O1, O2) < 1.0 - 1e-8)
            return trial_msg("distance", trial, "orthogonal spans not at distance 1");
        if (std::abs(mtsb::space_distance(S1 * random_invertible(rng, k1), S2) - d12) > 1e-8)
            return trial_msg("distance", trial, "not invariant to right-multiplication");
    }
    return {};
}

// Similarity-matrix axioms: symmetry, unit diagonal, entries in [0,1],
// agreement with the direct cosine formula, invariance to orthogonal
// right-multiplication, and the degenerate-row contract on zero rows.
inline std::string prop_similarity_axioms(int trials) {
    TestRng rng(991004);
    for (int trial = 0; trial < trials; ++trial) {
        const Index d = unif_int(rng, 2, 8);
        const Index k = unif_int(rng, 1, static_cast<int>(d));
        Matrix V;
        bool expect_degenerate = false;
        if (trial % 5 == 0 && k < d) {
            // Columns of a permuted identity: unpicked rows are exactly zero.
            std::vector<Index> perm(static_cast<size_t>(d));
            for (Index i = 0; i < d; ++i) perm[static_cast<size_t>(i)] = i;
            std::shuffle(perm.begin(), perm.end(), rng);
            V = Matrix::Zero(d, k);
            for (Index c = 0; c < k; ++c) V(perm[static_cast<size_t>(c)], c) = 1.0;
            expect_degenerate = true;
        } else {
            V = random_orthonormal(rng, d, k);
        }
        const mtsb::LoadingMatrix L(mtsb::LoadingKind::local_row, V);
        std::vector<std::string> warnings;
        std::vector<Index> degenerate;
        const Matrix D = mtsb::similarity_matrix(L, &warnings, &degenerate);
        for (Index i = 0; i < d; ++i) {
            if (D(i, i) != 1.0) return trial_msg("similarity", trial, "diagonal not 1");
            for (Index j = 0; j < d; ++j) {
                if (D(i, j) != D(j, i))
                    return trial_msg("similarity", trial, "not symmetric");
                if (D(i, j) < 0.0 || D(i, j) > 1.0)
                    return trial_msg("similarity", trial, "entry outside [0,1]");
            }
        }
        // Direct formula on non-degenerate pairs.
        for (Index i = 0; i < d; ++i) {
            if (V.row(i).norm() < 1e-12) continue;
            for (Index j = i + 1; j < d; ++j) {
                if (V.row(j).norm() < 1e-12) {
                    if (D(i, j) != 0.0)
                        return trial_msg("similarity", trial, "degenerate pair not 0");
                    continue;
                }
                const double want = std::min(
                    1.0, std::abs(V.row(i).dot(V.row(j))) / (V.row(i).norm() * V.row(j).norm()));
                if (std::abs(D(i, j) - want) > 1e-12)
                    return trial_msg("similarity", trial, "cosine formula mismatch");
            }
        }
        if (expect_degenerate) {
            if (degenerate.size() != static_cast<size_t>(d - k) || warnings.empty())
                return trial_msg("similarity", trial, "degenerate rows not flagged");
        } else {
            const Matrix O = random_orthonormal(rng, k, k);
            const mtsb::LoadingMatrix L2(mtsb::LoadingKind::local_row, Matrix(V * O));
            const Matrix D2 = mtsb::similarity_matrix(L2, nullptr, nullptr);
            if ((D - D2).cwiseAbs().maxCoeff() > 1e-10)
                return trial_msg("similarity", trial,
                                 "not invariant to orthogonal right-multiplication");
        }
    }
    return {};
}

// Lloyd objective is non-increasing within every restart, and the winning
// restart's final objective is minimal.
inline std::string prop_kmeans_monotonicity(int trials) {
    TestRng rng(991005);
    for (int trial = 0; trial < trials; ++trial) {
        const Index d = unif_int(rng, 3, 12);
        const Index dim = unif_int(rng, 1, 4);
        mtsb::KMeansConfig cfg;
        cfg.n_clusters = unif_int(rng, 1, static_cast<int>(std::min<Index>(4, d)));
        cfg.restarts = 3;
        cfg.max_iter = 25;
        cfg.tol = 0.0;
        cfg.seed = rng();
        const Matrix pts = random_matrix(rng, d, dim);
        mtsb::KMeansTrace trace;
        mtsb::kmeans_rows(pts, cfg, &trace);
        for (size_t s = 0; s < trace.objectives.size(); ++s) {
            const auto& seq = trace.objectives[s];
            for (size_t i = 1; i < seq.size(); ++i)
                if (seq[i] > seq[i - 1] + 1e-9 * (1.0 + seq[i - 1]))
                    return trial_msg("kmeans", trial,
                                     "objective increased across Lloyd iterations");
        }
        for (double final_obj : trace.final_objectives)
            if (trace.winner_objective > final_obj + 1e-12)
                return trial_msg("kmeans", trial, "winner objective not minimal");
        if (trace.final_objectives[static_cast<size_t>(trace.winner)] !=
            trace.winner_objective)
            return trial_msg("kmeans", trial, "winner bookkeeping inconsistent");
    }
    return {};
}

// misclustering_rate: zero on equal partitions, invariant under bijective
// relabeling of either argument, and symmetric.
inline std::string prop_label_symmetry(int trials) {
    TestRng rng(991006);
    for (int trial = 0; trial < trials; ++trial) {
        const Index n = unif_int(rng, 1, 12);
        IntVector a(n), b(n);
        for (Index i = 0; i < n; ++i) {
            a(i) = unif_int(rng, 1, 4);
            b(i) = unif_int(rng, 1, 4);
        }
        if (mtsb::misclustering_rate(a, a) != 0.0)
            return trial_msg("labels", trial, "rate(a,a) != 0");
        const double rab = mtsb::misclustering_rate(a, b);
        if (mtsb::misclustering_rate(b, a) != rab)
            return trial_msg("labels", trial, "rate not symmetric");
        // Random bijective relabeling of a's label ids.
        std::vector<int> map = {1, 2, 3, 4};
        std::shuffle(map.begin(), map.end(), rng);
        IntVector a2(n), b2(n);
        for (Index i = 0; i < n; ++i) {
            a2(i) = map[static_cast<size_t>(a(i) - 1)];
            b2(i) = map[static_cast<size_t>(b(i) - 1)];
        }
        if (mtsb::misclustering_rate(a2, b) != rab)
            return trial_msg("labels", trial, "rate changed under relabeling of found");
        if (mtsb::misclustering_rate(a, b2) != rab)
            return trial_msg("labels", trial, "rate changed under relabeling of truth");
    }
    return {};
}

// Tensor and matrix CSVs round-trip bit-exactly, including the gzip variant.
inline std::string prop_csv_roundtrip(int trials) {
    namespace fs = std::filesystem;
    TestRng rng(991007);
    char tmpl[] = "/tmp/mtsb_propXXXXXX";
    const char* dir = mkdtemp(tmpl);
    if (!dir) return "csv: could not create temp dir";
    const std::string tensor_path = std::string(dir) + "/tensor.csv";
    const std::string tensor_gz_path = std::string(dir) + "/tensor.csv.gz";
    const std::string matrix_path = std::string(dir) + "/matrix.csv";
    std::string fail;
    for (int trial = 0; trial < trials && fail.empty(); ++trial) {
        const Index T = unif_int(rng, 2, 5);
        const Index p = unif_int(rng, 1, 4);
        const Index q = unif_int(rng, 1, 4);
        const double scale = std::pow(10.0, unif(rng, -6.0, 6.0));
        const MatrixSeries series = random_series(rng, T, p, q, scale);
        const std::string& path = (trial % 7 == 0) ? tensor_gz_path : tensor_path;
        mtsb::save_tensor_csv(series, path);
        const MatrixSeries back = mtsb::load_tensor_csv(path);
        if (back.length() != T || back.rows() != p || back.cols() != q) {
            fail = trial_msg("csv", trial, "tensor shape changed");
            break;
        }
        for (Index t = 0; t < T; ++t)
            if (!(back.frame(t).array() == series.frame(t).array()).all()) {
                fail = trial_msg("csv", trial, "tensor values not bit-identical");
                break;
            }
        const Matrix M = random_matrix(rng, unif_int(rng, 1, 5), unif_int(rng, 1, 5), scale);
        mtsb::write_matrix_csv(M, matrix_path);
        const Matrix Mb = mtsb::read_matrix_csv(matrix_path);
        if (Mb.rows() != M.rows() || Mb.cols() != M.cols() ||
            !(Mb.array() == M.array()).all())
            fail = trial_msg("csv", trial, "matrix values not bit-identical");
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
    return fail;
}

// generate() is a pure function of the spec: identical seeds give bitwise
// identical output, different seeds give different output; seeded k-means is
// deterministic as well.
inline std::string prop_determinism(int trials) {
    TestRng rng(991008);
    for (int trial = 0; trial < trials; ++trial) {
        mtsb::ScenarioSpec spec;
        spec.T = unif_int(rng, 3, 8);
        spec.m = unif_int(rng, 1, 2);
        spec.n = unif_int(rng, 1, 2);
        spec.k0 = unif_int(rng, 1, 2);
        spec.r0 = unif_int(rng, 1, 2);
        spec.k_blocks.assign(static_cast<size_t>(spec.m), 0);
        spec.p_blocks.assign(static_cast<size_t>(spec.m), 0);
        spec.r_blocks.assign(static_cast<size_t>(spec.n), 0);
        spec.q_blocks.assign(static_cast<size_t>(spec.n), 0);
        for (int i = 0; i < spec.m; ++i) {
            spec.k_blocks[static_cast<size_t>(i)] = unif_int(rng, 1, 2);
            spec.p_blocks[static_cast<size_t>(i)] =
                spec.k_blocks[static_cast<size_t>(i)] + unif_int(rng, 1, 2);
        }
        for (int j = 0; j < spec.n; ++j) {
            spec.r_blocks[static_cast<size_t>(j)] = unif_int(rng, 1, 2);
            spec.q_blocks[static_cast<size_t>(j)] =
                spec.r_blocks[static_cast<size_t>(j)] + unif_int(rng, 1, 2);
        }
        if (spec.p() < spec.k0) spec.p_blocks[0] += spec.k0;
        if (spec.q() < spec.r0) spec.q_blocks[0] += spec.r0;
        spec.seed = rng();
        auto [s1, t1] = mtsb::generate(spec);
        auto [s2, t2] = mtsb::generate(spec);
        for (Index t = 0; t < s1.length(); ++t)
            if (!(s1.frame(t).array() == s2.frame(t).array()).all())
                return trial_msg("determinism", trial, "same seed, different frames");
        if (!(t1.R.array() == t2.R.array()).all() ||
            !(t1.Gamma.array() == t2.Gamma.array()).all())
            return trial_msg("determinism", trial, "same seed, different truth");
        mtsb::ScenarioSpec other = spec;
        other.seed = spec.seed + 1;
        auto [s3, t3] = mtsb::generate(other);
        bool any_diff = false;
        for (Index t = 0; t < s1.length() && !any_diff; ++t)
            any_diff = !(s1.frame(t).array() == s3.frame(t).array()).all();
        if (!any_diff)
            return trial_msg("determinism", trial, "different seed, identical frames");

        mtsb::KMeansConfig cfg;
        cfg.n_clusters = 2;
        cfg.restarts = 3;
        cfg.seed = rng();
        const Matrix pts = random_matrix(rng, 6, 2);
        const IntVector l1 = mtsb::kmeans_rows(pts, cfg);
        const IntVector l2 = mtsb::kmeans_rows(pts, cfg);
        if (!(l1.array() == l2.array()).all())
            return trial_msg("determinism", trial, "seeded kmeans not deterministic");
    }
    return {};
}

struct PropertyCase {
    const char* name;
    std::string (*run)(int trials);
};

inline const std::vector<PropertyCase>& all_property_cases() {
    static const std::vector<PropertyCase> cases = {
        {"orthonormality", prop_orthonormality},
        {"psd", prop_psd},
        {"distance-axioms", prop_distance_axioms},
        {"similarity-axioms", prop_similarity_axioms},
        {"kmeans-monotonicity", prop_kmeans_monotonicity},
        {"label-matching-symmetry", prop_label_symmetry},
        {"csv-round-trip", prop_csv_roundtrip},
        {"determinism", prop_determinism},
    };
    return cases;
}

}  // namespace testprops
