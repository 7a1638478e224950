#include "mtsb/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "mtsb/eig.hpp"
#include "mtsb/estimate.hpp"
#include "mtsb/parallel.hpp"
#include "mtsb/spectral.hpp"

namespace mtsb {

namespace {

// Metrics for one (replication, l0) given precomputed base aggregates.
void analyze_one(const MatrixSeries& series, const GroundTruth& truth,
                 const ScenarioSpec& spec, const BaseAggregates& base, Index l0,
                 bool known_counts, std::uint64_t kmeans_seed, ReplicationRow& row) {
    const FactorNumbers est = factor_numbers_from_aggregates(base);
    row.k0_est = est.k0;
    row.k_est = est.k;
    row.r0_est = est.r0;
    row.r_est = est.r;

    row.k0_used = known_counts ? spec.k0 : est.k0;
    row.r0_used = known_counts ? spec.r0 : est.r0;
    row.k_used = known_counts ? spec.k() : est.k;
    row.r_used = known_counts ? spec.r() : est.r;

    auto [R, C] = global_loadings_from_aggregates(series, base, row.k0_used, row.r0_used, l0);
    auto [Gamma, Lambda] =
        estimate_cluster_loadings(series, R, C, row.k_used, row.r_used, l0);

    row.dist_R = space_distance(R.values(), truth.R);
    row.dist_C = space_distance(C.values(), truth.C);
    // the weak estimands are the projections of the true weak loadings onto
    // the complement of the true strong spaces
    const Matrix Qr = orthonormal_basis(truth.R);
    const Matrix Qc = orthonormal_basis(truth.C);
    const Matrix gamma_target = truth.Gamma - Qr * (Qr.transpose() * truth.Gamma);
    const Matrix lambda_target = truth.Lambda - Qc * (Qc.transpose() * truth.Lambda);
    row.dist_Gamma = space_distance(Gamma.values(), gamma_target);
    row.dist_Lambda = space_distance(Lambda.values(), lambda_target);

    PipelineOptions opts;
    opts.l0 = l0;
    opts.kmeans.seed = kmeans_seed;
    const BiclusterResult clu = cluster_from_loadings(Gamma, Lambda, series.length(), opts);
    row.m_hat = clu.m_hat;
    row.n_hat = clu.n_hat;
    row.acc_row = 1.0 - misclustering_rate(clu.row_membership, truth.row_truth);
    row.acc_col = 1.0 - misclustering_rate(clu.col_membership, truth.col_truth);
    row.ok = true;
}

MeanSd mean_sd(const std::vector<double>& xs) {
    MeanSd out;
    const size_t n = xs.size();
    if (n == 0) return out;
    double sum = 0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(n);
    if (n > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.sd = std::sqrt(ss / static_cast<double>(n - 1));
    }
    return out;
}

}  // namespace

ReplicationReport run_replications(const ScenarioSpec& spec, int n_reps,
                                   const std::vector<Index>& l0_set,
                                   bool known_factor_numbers, int threads) {
    spec.validate();
    if (n_reps < 1) throw ConfigError("n_reps must be >= 1");
    if (l0_set.empty()) throw ConfigError("l0_set must not be empty");
    std::vector<Index> l0s = l0_set;
    std::sort(l0s.begin(), l0s.end());
    l0s.erase(std::unique(l0s.begin(), l0s.end()), l0s.end());
    if (l0s.front() < 1 || l0s.back() >= spec.T)
        throw ConfigError("every l0 must lie in 1..T-1");

    ReplicationReport report;
    report.scenario = spec;
    report.n_reps = n_reps;
    report.l0_set = l0s;
    report.known_factor_numbers = known_factor_numbers;
    const size_t n_l0 = l0s.size();
    report.rows.assign(static_cast<size_t>(n_reps) * n_l0, ReplicationRow{});

    parallel_for(n_reps, threads, [&](int rep) {
        const std::uint64_t rep_seed = mix_seed(spec.seed, static_cast<std::uint64_t>(rep));
        ScenarioSpec rep_spec = spec;
        rep_spec.seed = rep_seed;

        std::optional<std::string> generation_error;
        std::optional<std::pair<MatrixSeries, GroundTruth>> sample;
        try {
            sample = generate(rep_spec);
        } catch (const std::exception& e) {
            generation_error = e.what();
        }

        BaseAggregates running;
        Index prev_l0 = 0;
        for (size_t li = 0; li < n_l0; ++li) {
            ReplicationRow& row = report.rows[static_cast<size_t>(rep) * n_l0 + li];
            row.rep = rep + 1;
            row.l0 = l0s[li];
            if (generation_error) {
                row.error = "generate: " + *generation_error;
                continue;
            }
            try {
                const MatrixSeries& series = sample->first;
                if (prev_l0 == 0) {
                    running.row = aggregate_M0_partial(series, 1, row.l0, Orientation::column);
                    running.col = aggregate_M0_partial(series, 1, row.l0, Orientation::row);
                } else {
                    running.row += aggregate_M0_partial(series, prev_l0 + 1, row.l0,
                                                        Orientation::column);
                    running.col += aggregate_M0_partial(series, prev_l0 + 1, row.l0,
                                                        Orientation::row);
                }
                prev_l0 = row.l0;
                analyze_one(series, sample->second, spec, running, row.l0,
                            known_factor_numbers, mix_seed(rep_seed, 7), row);
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
            }
        }
    });

    // aggregate per l0 (rows are rep-major, so stride over the l0 slot)
    for (size_t li = 0; li < n_l0; ++li) {
        ReplicationAggregate agg;
        agg.l0 = l0s[li];
        std::vector<double> dr, dc, dg, dl, mh, nh, ar, ac;
        int hit_k0 = 0, hit_k = 0, hit_r0 = 0, hit_r = 0, hit_strong = 0, hit_weak = 0;
        for (int rep = 0; rep < n_reps; ++rep) {
            const ReplicationRow& row = report.rows[static_cast<size_t>(rep) * n_l0 + li];
            if (!row.ok) {
                ++agg.n_failed;
                continue;
            }
            ++agg.n_ok;
            const bool k0_ok = row.k0_est == spec.k0;
            const bool r0_ok = row.r0_est == spec.r0;
            const bool k_ok = row.k_est == spec.k();
            const bool r_ok = row.r_est == spec.r();
            hit_k0 += k0_ok;
            hit_r0 += r0_ok;
            hit_k += k_ok;
            hit_r += r_ok;
            hit_strong += k0_ok && r0_ok;
            hit_weak += k_ok && r_ok;
            dr.push_back(row.dist_R);
            dc.push_back(row.dist_C);
            dg.push_back(row.dist_Gamma);
            dl.push_back(row.dist_Lambda);
            mh.push_back(row.m_hat);
            nh.push_back(row.n_hat);
            ar.push_back(row.acc_row);
            ac.push_back(row.acc_col);
        }
        const double denom = static_cast<double>(n_reps);
        agg.freq_k0 = hit_k0 / denom;
        agg.freq_k = hit_k / denom;
        agg.freq_r0 = hit_r0 / denom;
        agg.freq_r = hit_r / denom;
        agg.freq_strong_both = hit_strong / denom;
        agg.freq_weak_both = hit_weak / denom;
        agg.dist_R = mean_sd(dr);
        agg.dist_C = mean_sd(dc);
        agg.dist_Gamma = mean_sd(dg);
        agg.dist_Lambda = mean_sd(dl);
        agg.m_hat = mean_sd(mh);
        agg.n_hat = mean_sd(nh);
        agg.acc_row = mean_sd(ar);
        agg.acc_col = mean_sd(ac);
        report.aggregates.push_back(std::move(agg));
    }
    return report;
}

namespace {

struct Projectors {
    Matrix strong_row, strong_col;  // R R^T, C C^T
    Matrix resid_row, resid_col;    // I - R R^T, I - C C^T
    Matrix weak_row, weak_col;      // Gamma Gamma^T, Lambda Lambda^T
    bool has_weak = false;
};

Projectors build_projectors(Index p, Index q, const LoadingSet& loadings) {
    const auto check = [](const LoadingMatrix& L, Index dim, const char* name) {
        if (L.n_factors() > 0 && L.dim() != dim)
            throw DimensionError(std::string(name) + " loading has dimension " +
                                 std::to_string(L.dim()) + ", expected " +
                                 std::to_string(dim));
    };
    check(loadings.R, p, "R");
    check(loadings.C, q, "C");
    check(loadings.Gamma, p, "Gamma");
    check(loadings.Lambda, q, "Lambda");
    const auto proj = [](const LoadingMatrix& L, Index dim) {
        return L.n_factors() > 0 ? Matrix(L.values() * L.values().transpose())
                                 : Matrix(Matrix::Zero(dim, dim));
    };
    Projectors P;
    P.strong_row = proj(loadings.R, p);
    P.strong_col = proj(loadings.C, q);
    P.resid_row = Matrix::Identity(p, p) - P.strong_row;
    P.resid_col = Matrix::Identity(q, q) - P.strong_col;
    P.has_weak = loadings.Gamma.n_factors() > 0 && loadings.Lambda.n_factors() > 0;
    if (P.has_weak) {
        P.weak_row = proj(loadings.Gamma, p);
        P.weak_col = proj(loadings.Lambda, q);
    }
    return P;
}

Matrix reconstruct_frame(const Matrix& X, const Projectors& P) {
    Matrix out = P.strong_row * X * P.strong_col;
    if (P.has_weak) out += P.weak_row * (P.resid_row * X * P.resid_col) * P.weak_col;
    return out;
}

}  // namespace

MatrixSeries reconstruct(const MatrixSeries& series, const LoadingSet& loadings) {
    const Projectors P = build_projectors(series.rows(), series.cols(), loadings);
    std::vector<Matrix> frames;
    frames.reserve(static_cast<size_t>(series.length()));
    for (Index t = 0; t < series.length(); ++t)
        frames.push_back(reconstruct_frame(series.frame(t), P));
    return MatrixSeries(std::move(frames), series.row_labels(), series.col_labels());
}

LoadingSet baseline_loadings(const MatrixSeries& series, RollingMethod method, int k0,
                             int r0, Index l0) {
    const Index p = series.rows(), q = series.cols();
    if (k0 < 1 || k0 > p || r0 < 1 || r0 > q)
        throw OrderError("baseline factor counts outside 1..dimension");
    Matrix R, C;
    if (method == RollingMethod::acce_baseline) {
        const BaseAggregates base = compute_base_aggregates(series, l0);
        R = sym_eig_top(base.row, k0).second;
        C = sym_eig_top(base.col, r0).second;
    } else if (method == RollingMethod::pca_baseline) {
        const Index T = series.length();
        Matrix Sr = Matrix::Zero(p, p), Sc = Matrix::Zero(q, q);
        for (Index t = 0; t < T; ++t) {
            const Matrix& X = series.frame(t);
            Sr.noalias() += X * X.transpose();
            Sc.noalias() += X.transpose() * X;
        }
        Sr /= static_cast<double>(T);
        Sc /= static_cast<double>(T);
        R = sym_eig_top(Sr, k0).second;
        C = sym_eig_top(Sc, r0).second;
    } else {
        throw ConfigError("baseline_loadings expects a baseline method");
    }
    return LoadingSet{LoadingMatrix(LoadingKind::global_row, std::move(R)),
                      LoadingMatrix(LoadingKind::global_col, std::move(C)),
                      LoadingMatrix(LoadingKind::local_row, Matrix::Zero(p, 0)),
                      LoadingMatrix(LoadingKind::local_col, Matrix::Zero(q, 0))};
}

RollingReport rolling_validation(const MatrixSeries& series, RollingMethod method, int k0,
                                 int k, int r0, int r, Index start_index, Index l0,
                                 Index min_train) {
    const Index T = series.length(), p = series.rows(), q = series.cols();
    if (start_index < 3 || start_index < min_train || start_index > T)
        throw ConfigError("start_index " + std::to_string(start_index) +
                          " outside max(3, min_train).." + std::to_string(T));
    if (l0 < 1 || l0 > start_index - 2)
        throw LagError("l0 must lie in 1..start_index-2 so the first fit has enough lags");

    RollingReport report;
    report.method = method;
    report.k0 = k0;
    report.k = k;
    report.r0 = r0;
    report.r = r;
    report.l0 = l0;
    report.start_index = start_index;

    double total = 0;
    for (Index t = start_index; t <= T; ++t) {
        const MatrixSeries sub = series.head(t - 1);
        LoadingSet fit;
        if (method == RollingMethod::ours) {
            auto [R, C] = estimate_global_loadings(sub, k0, r0, l0);
            auto [Gamma, Lambda] = estimate_cluster_loadings(sub, R, C, k, r, l0);
            fit = LoadingSet{std::move(R), std::move(C), std::move(Gamma), std::move(Lambda)};
        } else {
            fit = baseline_loadings(sub, method, k0, r0, l0);
        }
        const Projectors P = build_projectors(p, q, fit);
        const double sse = (reconstruct_frame(series.frame(t - 1), P) - series.frame(t - 1))
                               .squaredNorm();
        report.per_t_sse.push_back(sse);
        total += sse;
    }
    report.n_eval = T - start_index + 1;
    report.mse = total / (static_cast<double>(report.n_eval) * static_cast<double>(p * q));
    report.mse_literal_T = total / (static_cast<double>(T) * static_cast<double>(p * q));
    return report;
}

const char* rolling_method_name(RollingMethod method) {
    switch (method) {
        case RollingMethod::ours: return "ours";
        case RollingMethod::acce_baseline: return "acce_baseline";
        case RollingMethod::pca_baseline: return "pca_baseline";
    }
    return "unknown";
}

RollingMethod parse_rolling_method(const std::string& name) {
    if (name == "ours") return RollingMethod::ours;
    if (name == "acce_baseline" || name == "acce") return RollingMethod::acce_baseline;
    if (name == "pca_baseline" || name == "pca") return RollingMethod::pca_baseline;
    throw ConfigError("unknown method '" + name +
                      "' (expected ours, acce_baseline, or pca_baseline)");
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << std::setprecision(17);
    return out;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    quoted += "\"";
    return quoted;
}

nlohmann::json scenario_to_json(const ScenarioSpec& s) {
    return {{"T", s.T},
            {"m", s.m},
            {"n", s.n},
            {"k0", s.k0},
            {"r0", s.r0},
            {"k_blocks", s.k_blocks},
            {"r_blocks", s.r_blocks},
            {"p_blocks", s.p_blocks},
            {"q_blocks", s.q_blocks},
            {"coeff_range",
             {{"neg_lo", s.coeff_range.neg_lo},
              {"neg_hi", s.coeff_range.neg_hi},
              {"pos_lo", s.coeff_range.pos_lo},
              {"pos_hi", s.coeff_range.pos_hi}}},
            {"factor_sd_lo", s.factor_sd_lo},
            {"factor_sd_hi", s.factor_sd_hi},
            {"noise_innovation_variance", s.noise_innovation_variance},
            {"seed", s.seed},
            {"weak_scale", s.weak_scale},
            {"orthogonal_loadings", s.orthogonal_loadings}};
}

void emit_metrics(std::ostream& out, const ReplicationAggregate& a) {
    const auto row = [&](const char* metric, double value) {
        out << a.l0 << "," << metric << "," << value << "\n";
    };
    row("n_ok", a.n_ok);
    row("n_failed", a.n_failed);
    row("freq_k0", a.freq_k0);
    row("freq_k", a.freq_k);
    row("freq_r0", a.freq_r0);
    row("freq_r", a.freq_r);
    row("freq_strong_both", a.freq_strong_both);
    row("freq_weak_both", a.freq_weak_both);
    row("dist_R_mean", a.dist_R.mean);
    row("dist_R_sd", a.dist_R.sd);
    row("dist_C_mean", a.dist_C.mean);
    row("dist_C_sd", a.dist_C.sd);
    row("dist_Gamma_mean", a.dist_Gamma.mean);
    row("dist_Gamma_sd", a.dist_Gamma.sd);
    row("dist_Lambda_mean", a.dist_Lambda.mean);
    row("dist_Lambda_sd", a.dist_Lambda.sd);
    row("m_hat_mean", a.m_hat.mean);
    row("m_hat_sd", a.m_hat.sd);
    row("n_hat_mean", a.n_hat.mean);
    row("n_hat_sd", a.n_hat.sd);
    row("acc_row_mean", a.acc_row.mean);
    row("acc_row_sd", a.acc_row.sd);
    row("acc_col_mean", a.acc_col.mean);
    row("acc_col_sd", a.acc_col.sd);
}

nlohmann::json aggregate_to_json(const ReplicationAggregate& a) {
    const auto ms = [](const MeanSd& x) {
        return nlohmann::json{{"mean", x.mean}, {"sd", x.sd}};
    };
    return {{"l0", a.l0},
            {"n_ok", a.n_ok},
            {"n_failed", a.n_failed},
            {"freq_k0", a.freq_k0},
            {"freq_k", a.freq_k},
            {"freq_r0", a.freq_r0},
            {"freq_r", a.freq_r},
            {"freq_strong_both", a.freq_strong_both},
            {"freq_weak_both", a.freq_weak_both},
            {"dist_R", ms(a.dist_R)},
            {"dist_C", ms(a.dist_C)},
            {"dist_Gamma", ms(a.dist_Gamma)},
            {"dist_Lambda", ms(a.dist_Lambda)},
            {"m_hat", ms(a.m_hat)},
            {"n_hat", ms(a.n_hat)},
            {"acc_row", ms(a.acc_row)},
            {"acc_col", ms(a.acc_col)}};
}

}  // namespace

void write_replication_report_csv(const ReplicationReport& report, const std::string& path) {
    auto out = open_out(path);
    out << "l0,metric,value\n";
    for (const auto& agg : report.aggregates) emit_metrics(out, agg);
}

void write_replication_log_csv(const ReplicationReport& report, const std::string& path) {
    auto out = open_out(path);
    out << "rep,l0,ok,error,k0_est,k_est,r0_est,r_est,k0_used,k_used,r0_used,r_used,"
           "dist_R,dist_C,dist_Gamma,dist_Lambda,m_hat,n_hat,acc_row,acc_col\n";
    for (const auto& r : report.rows) {
        out << r.rep << "," << r.l0 << "," << (r.ok ? 1 : 0) << "," << csv_escape(r.error)
            << "," << r.k0_est << "," << r.k_est << "," << r.r0_est << "," << r.r_est << ","
            << r.k0_used << "," << r.k_used << "," << r.r0_used << "," << r.r_used << ","
            << r.dist_R << "," << r.dist_C << "," << r.dist_Gamma << "," << r.dist_Lambda
            << "," << r.m_hat << "," << r.n_hat << "," << r.acc_row << "," << r.acc_col
            << "\n";
    }
}

void write_replication_report_json(const ReplicationReport& report, const std::string& path) {
    nlohmann::json j;
    j["scenario"] = scenario_to_json(report.scenario);
    j["n_reps"] = report.n_reps;
    j["l0_set"] = report.l0_set;
    j["known_factor_numbers"] = report.known_factor_numbers;
    j["aggregates"] = nlohmann::json::array();
    for (const auto& agg : report.aggregates) j["aggregates"].push_back(aggregate_to_json(agg));
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_rolling_report_csv(const RollingReport& report, const std::string& path) {
    auto out = open_out(path);
    out << "l0,metric,value\n";
    out << report.l0 << ",method," << rolling_method_name(report.method) << "\n";
    out << report.l0 << ",k0," << report.k0 << "\n";
    out << report.l0 << ",k," << report.k << "\n";
    out << report.l0 << ",r0," << report.r0 << "\n";
    out << report.l0 << ",r," << report.r << "\n";
    out << report.l0 << ",start_index," << report.start_index << "\n";
    out << report.l0 << ",n_eval," << report.n_eval << "\n";
    out << report.l0 << ",mse," << report.mse << "\n";
    out << report.l0 << ",mse_literal_T," << report.mse_literal_T << "\n";
}

void write_scenario_json(const ScenarioSpec& spec, const std::string& path) {
    auto out = open_out(path);
    out << scenario_to_json(spec).dump(2) << "\n";
}

void write_rolling_report_json(const RollingReport& report, const std::string& path) {
    nlohmann::json j;
    j["method"] = rolling_method_name(report.method);
    j["k0"] = report.k0;
    j["k"] = report.k;
    j["r0"] = report.r0;
    j["r"] = report.r;
    j["l0"] = report.l0;
    j["start_index"] = report.start_index;
    j["n_eval"] = report.n_eval;
    j["mse"] = report.mse;
    j["mse_literal_T"] = report.mse_literal_T;
    j["per_t_sse"] = report.per_t_sse;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

}  // namespace mtsb
