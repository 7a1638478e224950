#pragma once

#include <optional>
#include <string>

#include "mtsb/bicluster.hpp"
#include "mtsb/simulate.hpp"
#include "mtsb/types.hpp"

namespace mtsb {

// One replication at one l0. Failures are recorded, never dropped.
struct ReplicationRow {
    int rep = 0;  // 1-based
    Index l0 = 0;
    bool ok = false;
    std::string error;
    // estimated factor numbers (recorded whether or not they are used)
    int k0_est = 0, k_est = 0, r0_est = 0, r_est = 0;
    // counts actually fed to the loading/clustering chain
    int k0_used = 0, k_used = 0, r0_used = 0, r_used = 0;
    double dist_R = 0, dist_C = 0;          // D(R_hat, R), D(C_hat, C)
    double dist_Gamma = 0, dist_Lambda = 0; // vs the projected true weak loadings
    int m_hat = 0, n_hat = 0;
    double acc_row = 0, acc_col = 0;        // 1 - misclustering vs truth
};

struct MeanSd {
    double mean = 0, sd = 0;
};

// Aggregates for one l0 across replications. Frequencies divide by the total
// replication count (failed replications cannot score a hit).
struct ReplicationAggregate {
    Index l0 = 0;
    int n_ok = 0, n_failed = 0;
    double freq_k0 = 0, freq_k = 0, freq_r0 = 0, freq_r = 0;
    double freq_strong_both = 0;  // k0 and r0 both correct
    double freq_weak_both = 0;    // k and r both correct
    MeanSd dist_R, dist_C, dist_Gamma, dist_Lambda;
    MeanSd m_hat, n_hat, acc_row, acc_col;
};

struct ReplicationReport {
    ScenarioSpec scenario;
    int n_reps = 0;
    std::vector<Index> l0_set;
    bool known_factor_numbers = false;
    std::vector<ReplicationRow> rows;  // rep-major, then l0 ascending
    std::vector<ReplicationAggregate> aggregates;
};

// Monte Carlo harness: per replication, a fresh seed substream, data
// generation, factor-number estimation (always recorded), the two loading
// algorithms and the clustering tail; metrics aggregated per l0.
// `known_factor_numbers` feeds the true counts instead of the estimates.
ReplicationReport run_replications(const ScenarioSpec& spec, int n_reps,
                                   const std::vector<Index>& l0_set,
                                   bool known_factor_numbers, int threads = 1);

// X_hat_t = R R^T X_t C C^T + Gamma Gamma^T Y_t Lambda Lambda^T with
// Y_t the strong-residual series. Empty weak loadings drop the second term.
MatrixSeries reconstruct(const MatrixSeries& series, const LoadingSet& loadings);

enum class RollingMethod { ours, acce_baseline, pca_baseline };

struct RollingReport {
    RollingMethod method = RollingMethod::ours;
    int k0 = 0, k = 0, r0 = 0, r = 0;
    Index l0 = 0;
    Index start_index = 0;            // 1-based first evaluated time point
    Index n_eval = 0;
    double mse = 0;                   // sum of squared errors / (n_eval * p * q)
    double mse_literal_T = 0;         // same sum / (T * p * q), for comparison
    std::vector<double> per_t_sse;    // squared Frobenius error per evaluated t
};

// Strong-only loading sets: acce_baseline takes the leading eigenvectors of
// the base aggregates (the initial step of the global algorithm);
// pca_baseline takes leading eigenvectors of the lag-0 second-moment
// matrices. Weak parts come back empty.
LoadingSet baseline_loadings(const MatrixSeries& series, RollingMethod method, int k0,
                             int r0, Index l0);

// For each t from start_index to T: fit on observations 1..t-1, reconstruct
// X_t, accumulate the squared error.
RollingReport rolling_validation(const MatrixSeries& series, RollingMethod method,
                                 int k0, int k, int r0, int r, Index start_index,
                                 Index l0, Index min_train = 40);

// Report emission (CSV rows are (l0, metric, value); JSON mirrors the types).
void write_replication_report_csv(const ReplicationReport& report, const std::string& path);
void write_replication_log_csv(const ReplicationReport& report, const std::string& path);
void write_replication_report_json(const ReplicationReport& report, const std::string& path);
void write_scenario_json(const ScenarioSpec& spec, const std::string& path);
void write_rolling_report_csv(const RollingReport& report, const std::string& path);
void write_rolling_report_json(const RollingReport& report, const std::string& path);

const char* rolling_method_name(RollingMethod method);
RollingMethod parse_rolling_method(const std::string& name);

}  // namespace mtsb
