#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mtsb/types.hpp"

namespace mtsb {

// Whole-file text helpers. Reads are gzip-transparent (plain files pass
// through untouched); writes compress when the path ends in ".gz".
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// "r1".."rn" style placeholder labels, used whenever a series carries none.
std::vector<std::string> default_labels(Index n, const std::string& prefix);

// Long-format tensor CSV with header t,row,col,value: t is 1-based, the
// (t,row,col) key set must form a complete grid with no duplicates, and the
// row/column order of the loaded series follows first appearance in the file.
MatrixSeries load_tensor_csv(const std::string& path);
void save_tensor_csv(const MatrixSeries& series, const std::string& path);

// Dense numeric CSV with a one-line generated header; full double precision.
void write_matrix_csv(const Matrix& M, const std::string& path,
                      const std::string& col_prefix = "c");
Matrix read_matrix_csv(const std::string& path);
void write_vector_csv(const Vector& v, const std::string& path,
                      const std::string& name = "value");
Vector read_vector_csv(const std::string& path);

// label,cluster pairs; membership labels are 1-based.
void write_membership_csv(const std::vector<std::string>& labels,
                          const IntVector& membership, const std::string& path);
std::pair<std::vector<std::string>, IntVector> read_membership_csv(const std::string& path);

// Per-cell temporal demeaning and/or division by the sample sd. Cells with
// sd below 1e-12 are left unscaled and reported through `warnings`.
MatrixSeries preprocess(const MatrixSeries& series, bool demean, bool standardize,
                        std::vector<std::string>* warnings = nullptr);

struct RunConfig {
    int l0 = 5;
    int J0_row = 0;  // 0 = the ceil(dim/2) default
    int J0_col = 0;
    bool demean = false;
    bool standardize = false;
    int kmeans_restarts = 20;
    int kmeans_max_iter = 100;
    double kmeans_tol = 1e-8;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    int threads = 1;

    void validate() const;  // ConfigError on violation
};

// Flat key=value text, one pair per line, '#' comments, unknown keys
// rejected. `base` supplies the values for keys the file omits; callers
// layer explicit command-line flags on top of the result.
RunConfig load_run_config(const std::string& path, RunConfig base = {});
void set_run_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

}  // namespace mtsb
