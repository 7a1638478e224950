#pragma once

#include <cstdint>
#include <optional>
#include <tuple>

#include "mtsb/types.hpp"

namespace mtsb {

struct KMeansConfig {
    int n_clusters = 1;
    int restarts = 20;
    int max_iter = 100;
    double tol = 1e-8;  // relative change in objective
    std::uint64_t seed = 0;
    int threads = 1;  // restarts may run in parallel; winner choice stays deterministic
};

// Per-restart objective traces, for tests that check Lloyd monotonicity.
struct KMeansTrace {
    std::vector<std::vector<double>> objectives;  // [restart][iteration]
    std::vector<double> final_objectives;
    int winner = -1;
    double winner_objective = 0;
};

// Eigenvalues of the entrywise-absolute Gram |V V^T|, descending.
Vector absgram_eigenvalues(const LoadingMatrix& L);

// Number of eigenvalues of |V V^T| above 1 - 1/log(T): the cluster-count
// upper bound fed to K-means.
int cluster_count_upper_bound(const LoadingMatrix& L, Index T);

// Entrywise absolute cosine similarity between the rows of L. Rows with
// near-zero norm get off-diagonal similarity 0; their indices and a warning
// can be collected through the optional out-parameters.
Matrix similarity_matrix(const LoadingMatrix& L, std::vector<std::string>* warnings = nullptr,
                         std::vector<Index>* degenerate_rows = nullptr);

// Lloyd's K-means on the rows of M: k-means++ seeding, best of cfg.restarts
// by within-cluster sum of squares (ties to the earlier restart), labels
// canonicalized by order of first appearance. Deterministic given cfg.seed.
IntVector kmeans_rows(const Matrix& M, const KMeansConfig& cfg, KMeansTrace* trace = nullptr);

// 1 - (best fraction of agreeing positions over injective label matchings),
// computed by optimal assignment on the confusion matrix.
double misclustering_rate(const IntVector& found, const IntVector& truth);

struct PipelineOptions {
    Index l0 = 5;
    std::optional<FactorNumbers> factor_numbers;  // estimated when absent
    int J0_row = 0, J0_col = 0;                   // 0 = default ceil(dim/2)
    KMeansConfig kmeans;                          // n_clusters is taken from m_hat / n_hat
    std::optional<int> override_m, override_n;    // bypass the eigenvalue count
};

// Everything downstream of the estimated weak loadings: cluster counts,
// similarity matrices, K-means memberships, degenerate-row handling. Shared
// by the pipeline and the replication harness so both take the same path.
BiclusterResult cluster_from_loadings(const LoadingMatrix& Gamma, const LoadingMatrix& Lambda,
                                      Index T, const PipelineOptions& opts);

// Full chain: factor numbers (unless given), global loadings, cluster
// loadings, cluster counts, K-means on both similarity matrices. Errors from
// any stage are rethrown with a [stage] tag prefixed to the message.
std::tuple<BiclusterResult, LoadingSet, FactorNumbers> bicluster_pipeline(
    const MatrixSeries& series, const PipelineOptions& opts);
std::tuple<BiclusterResult, LoadingSet, FactorNumbers> bicluster_pipeline(
    const MatrixSeries& series, Index l0, std::optional<FactorNumbers> factor_numbers,
    const KMeansConfig& kmeans);

}  // namespace mtsb
