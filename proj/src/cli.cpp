#include "mtsb/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "mtsb/bicluster.hpp"
#include "mtsb/errors.hpp"
#include "mtsb/estimate.hpp"
#include "mtsb/evaluate.hpp"
#include "mtsb/io.hpp"
#include "mtsb/simulate.hpp"

namespace mtsb {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

bool flag_given(const CLI::App* cmd, const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

// ---- scenario flags (simulate / replicate) --------------------------------

struct ScenarioFlags {
    std::string preset = "I";
    Index p1 = 20, q1 = 20;
    Index T = 0;  // 0 = keep the preset value
    std::uint64_t seed = 0;
    double weak_scale = 1.0;
    double noise_var = 0.25;
    bool orthogonal = false;
    int k0 = 0, r0 = 0;
    std::vector<int> k_blocks, r_blocks;
    std::vector<Index> p_blocks, q_blocks;
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& sf) {
    cmd->add_option("--scenario", sf.preset, "preset name, I or II")->capture_default_str();
    cmd->add_option("--p1", sf.p1, "rows per cluster in the preset")->capture_default_str();
    cmd->add_option("--q1", sf.q1, "columns per cluster in the preset")->capture_default_str();
    cmd->add_option("--T", sf.T, "series length override");
    cmd->add_option("--seed", sf.seed, "generator seed")->capture_default_str();
    cmd->add_option("--weak-scale", sf.weak_scale, "weak-factor amplitude multiplier");
    cmd->add_option("--noise-var", sf.noise_var, "noise innovation variance");
    cmd->add_flag("--orthogonal-loadings", sf.orthogonal,
                  "project global loadings off the cluster-specific blocks");
    cmd->add_option("--k0", sf.k0, "global row factor count (custom scenario)");
    cmd->add_option("--r0", sf.r0, "global column factor count (custom scenario)");
    cmd->add_option("--k-blocks", sf.k_blocks, "per-cluster weak row factor counts")
        ->delimiter(',');
    cmd->add_option("--r-blocks", sf.r_blocks, "per-cluster weak column factor counts")
        ->delimiter(',');
    cmd->add_option("--p-blocks", sf.p_blocks, "row-cluster sizes")->delimiter(',');
    cmd->add_option("--q-blocks", sf.q_blocks, "column-cluster sizes")->delimiter(',');
}

ScenarioSpec build_spec(const CLI::App* cmd, const ScenarioFlags& sf) {
    const bool custom = !sf.p_blocks.empty() || !sf.q_blocks.empty() || !sf.k_blocks.empty() ||
                        !sf.r_blocks.empty();
    ScenarioSpec spec;
    if (custom) {
        if (sf.p_blocks.empty() || sf.q_blocks.empty() || sf.k_blocks.empty() ||
            sf.r_blocks.empty() || !flag_given(cmd, "--k0") || !flag_given(cmd, "--r0"))
            throw ConfigError(
                "custom scenarios need --k-blocks, --r-blocks, --p-blocks, --q-blocks, "
                "--k0 and --r0");
        spec.T = sf.T > 0 ? sf.T : 400;
        spec.m = static_cast<int>(sf.p_blocks.size());
        spec.n = static_cast<int>(sf.q_blocks.size());
        spec.k0 = sf.k0;
        spec.r0 = sf.r0;
        spec.k_blocks = sf.k_blocks;
        spec.r_blocks = sf.r_blocks;
        spec.p_blocks = sf.p_blocks;
        spec.q_blocks = sf.q_blocks;
    } else {
        spec = make_scenario_preset(sf.preset, sf.p1, sf.q1);
        if (sf.T > 0) spec.T = sf.T;
    }
    spec.seed = sf.seed;
    if (flag_given(cmd, "--weak-scale")) spec.weak_scale = sf.weak_scale;
    if (flag_given(cmd, "--noise-var")) spec.noise_innovation_variance = sf.noise_var;
    if (sf.orthogonal) spec.orthogonal_loadings = true;
    spec.validate();
    return spec;
}

// ---- analysis flags shared by factors/loadings/bicluster/rolling ----------

struct AnalysisOpts {
    std::string input;
    std::string config_path;
    int l0 = 5;
    int J0_row = 0, J0_col = 0;
    bool demean = false, standardize = false;
    int restarts = 20, max_iter = 100;
    double tol = 1e-8;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out = ".";
};

void add_input_flags(CLI::App* cmd, AnalysisOpts& o) {
    cmd->add_option("input", o.input, "long-format tensor csv (gzip accepted)")->required();
    cmd->add_option("--config", o.config_path, "key=value config file");
    cmd->add_option("--l0", o.l0, "number of aggregated lags")->capture_default_str();
    cmd->add_flag("--demean", o.demean, "subtract per-cell temporal means");
    cmd->add_flag("--standardize", o.standardize, "divide by per-cell sample sd");
    cmd->add_option("--out", o.out, "output directory")->capture_default_str();
    cmd->add_option("--threads", o.threads, "worker thread cap (env MTSB_THREADS)");
}

void add_j0_flags(CLI::App* cmd, AnalysisOpts& o) {
    cmd->add_option("--J0-row", o.J0_row, "ratio search depth, row direction (0 = auto)");
    cmd->add_option("--J0-col", o.J0_col, "ratio search depth, column direction (0 = auto)");
}

void add_kmeans_flags(CLI::App* cmd, AnalysisOpts& o) {
    cmd->add_option("--restarts", o.restarts, "k-means restarts")->capture_default_str();
    cmd->add_option("--max-iter", o.max_iter, "k-means iteration cap")->capture_default_str();
    cmd->add_option("--tol", o.tol, "k-means relative convergence tolerance")
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "k-means seed")->capture_default_str();
}

int resolve_threads(const CLI::App* cmd, const AnalysisOpts& o, int config_value) {
    if (flag_given(cmd, "--threads")) return o.threads;
    if (const char* env = std::getenv("MTSB_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ConfigError(std::string("cannot parse MTSB_THREADS='") + env + "'");
        return static_cast<int>(v);
    }
    return config_value;
}

RunConfig merge_config(const CLI::App* cmd, const AnalysisOpts& o) {
    RunConfig cfg;
    if (!o.config_path.empty()) cfg = load_run_config(o.config_path, cfg);
    if (flag_given(cmd, "--l0")) cfg.l0 = o.l0;
    if (flag_given(cmd, "--J0-row")) cfg.J0_row = o.J0_row;
    if (flag_given(cmd, "--J0-col")) cfg.J0_col = o.J0_col;
    if (o.demean) cfg.demean = true;
    if (o.standardize) cfg.standardize = true;
    if (flag_given(cmd, "--restarts")) cfg.kmeans_restarts = o.restarts;
    if (flag_given(cmd, "--max-iter")) cfg.kmeans_max_iter = o.max_iter;
    if (flag_given(cmd, "--tol")) cfg.kmeans_tol = o.tol;
    if (flag_given(cmd, "--seed")) cfg.seed = o.seed;
    if (flag_given(cmd, "--out")) cfg.out_dir = o.out;
    cfg.threads = resolve_threads(cmd, o, cfg.threads);
    cfg.validate();
    return cfg;
}

MatrixSeries load_input(const AnalysisOpts& o, const RunConfig& cfg) {
    std::vector<std::string> warnings;
    MatrixSeries series =
        preprocess(load_tensor_csv(o.input), cfg.demean, cfg.standardize, &warnings);
    print_warnings(warnings);
    return series;
}

void write_ratio_csv(const RatioDiagnostics& d, const std::string& path) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "j,eigenvalue,ratio,local_max\n";
    for (Index j = 0; j < d.eigenvalues.size(); ++j) {
        out << (j + 1) << "," << d.eigenvalues(j) << ",";
        if (j < d.ratios.size()) out << d.ratios(j);
        const bool is_max =
            std::find(d.local_max_indices.begin(), d.local_max_indices.end(),
                      static_cast<int>(j + 1)) != d.local_max_indices.end();
        out << "," << (is_max ? 1 : 0) << "\n";
    }
    write_text_file(path, out.str());
}

std::optional<FactorNumbers> factor_numbers_from_flag(const std::vector<int>& values) {
    if (values.empty()) return std::nullopt;
    if (values.size() != 4)
        throw ConfigError("--factor-numbers needs exactly four values k0,k,r0,r");
    FactorNumbers fn;
    fn.k0 = values[0];
    fn.k = values[1];
    fn.r0 = values[2];
    fn.r = values[3];
    return fn;
}

std::vector<std::string> series_row_labels(const MatrixSeries& series) {
    return series.row_labels().empty() ? default_labels(series.rows(), "r")
                                       : series.row_labels();
}

std::vector<std::string> series_col_labels(const MatrixSeries& series) {
    return series.col_labels().empty() ? default_labels(series.cols(), "c")
                                       : series.col_labels();
}

// ---- subcommand bodies ----------------------------------------------------

void run_simulate(const CLI::App* cmd, const ScenarioFlags& sf, const std::string& out) {
    const ScenarioSpec spec = build_spec(cmd, sf);
    const auto [series, truth] = generate(spec);
    ensure_dir(out);
    save_tensor_csv(series, join(out, "series.csv"));
    write_scenario_json(spec, join(out, "scenario.json"));
    write_membership_csv(series_row_labels(series), truth.row_truth,
                         join(out, "truth_row_membership.csv"));
    write_membership_csv(series_col_labels(series), truth.col_truth,
                         join(out, "truth_col_membership.csv"));
    write_matrix_csv(truth.R, join(out, "truth_R.csv"), "f");
    write_matrix_csv(truth.C, join(out, "truth_C.csv"), "f");
    write_matrix_csv(truth.Gamma, join(out, "truth_Gamma.csv"), "f");
    write_matrix_csv(truth.Lambda, join(out, "truth_Lambda.csv"), "f");
    std::cout << "wrote " << join(out, "series.csv") << " (T=" << series.length()
              << " p=" << series.rows() << " q=" << series.cols() << ")\n";
}

void run_factors(const CLI::App* cmd, const AnalysisOpts& o) {
    const RunConfig cfg = merge_config(cmd, o);
    const MatrixSeries series = load_input(o, cfg);
    const FactorNumbers fn = estimate_factor_numbers(series, cfg.l0, cfg.J0_row, cfg.J0_col);
    ensure_dir(cfg.out_dir);
    write_ratio_csv(fn.row_diag, join(cfg.out_dir, "factors_row_diagnostics.csv"));
    write_ratio_csv(fn.col_diag, join(cfg.out_dir, "factors_col_diagnostics.csv"));
    print_warnings(fn.warnings);
    std::cout << fn.k0 << " " << fn.k << " " << fn.r0 << " " << fn.r << "\n";
}

void run_loadings(const CLI::App* cmd, const AnalysisOpts& o,
                  const std::vector<int>& fn_flag, int refine_iters) {
    const RunConfig cfg = merge_config(cmd, o);
    const MatrixSeries series = load_input(o, cfg);
    const BaseAggregates agg = compute_base_aggregates(series, cfg.l0);
    int k0 = 0, k = 0, r0 = 0, r = 0;
    if (const auto fn = factor_numbers_from_flag(fn_flag)) {
        k0 = fn->k0;
        k = fn->k;
        r0 = fn->r0;
        r = fn->r;
    } else {
        const FactorNumbers est = factor_numbers_from_aggregates(agg, cfg.J0_row, cfg.J0_col);
        print_warnings(est.warnings);
        k0 = est.k0;
        k = est.k;
        r0 = est.r0;
        r = est.r;
    }
    const auto [R, C] = global_loadings_from_aggregates(series, agg, k0, r0, cfg.l0,
                                                        refine_iters);
    const auto [Gamma, Lambda] = estimate_cluster_loadings(series, R, C, k, r, cfg.l0);
    ensure_dir(cfg.out_dir);
    write_matrix_csv(R.values(), join(cfg.out_dir, "R.csv"), "f");
    write_matrix_csv(C.values(), join(cfg.out_dir, "C.csv"), "f");
    write_matrix_csv(Gamma.values(), join(cfg.out_dir, "Gamma.csv"), "f");
    write_matrix_csv(Lambda.values(), join(cfg.out_dir, "Lambda.csv"), "f");
    std::cout << k0 << " " << k << " " << r0 << " " << r << "\n";
}

void run_bicluster(const CLI::App* cmd, const AnalysisOpts& o, const std::vector<int>& fn_flag,
                   int override_m, int override_n) {
    const RunConfig cfg = merge_config(cmd, o);
    const MatrixSeries series = load_input(o, cfg);
    PipelineOptions opts;
    opts.l0 = cfg.l0;
    opts.J0_row = cfg.J0_row;
    opts.J0_col = cfg.J0_col;
    opts.factor_numbers = factor_numbers_from_flag(fn_flag);
    opts.kmeans.restarts = cfg.kmeans_restarts;
    opts.kmeans.max_iter = cfg.kmeans_max_iter;
    opts.kmeans.tol = cfg.kmeans_tol;
    opts.kmeans.seed = cfg.seed;
    opts.kmeans.threads = cfg.threads;
    if (flag_given(cmd, "--m")) opts.override_m = override_m;
    if (flag_given(cmd, "--n")) opts.override_n = override_n;
    const auto [result, loadings, fn] = bicluster_pipeline(series, opts);
    (void)loadings;
    ensure_dir(cfg.out_dir);
    write_membership_csv(series_row_labels(series), result.row_membership,
                         join(cfg.out_dir, "row_membership.csv"));
    write_membership_csv(series_col_labels(series), result.col_membership,
                         join(cfg.out_dir, "col_membership.csv"));
    write_matrix_csv(result.D_row, join(cfg.out_dir, "similarity_row.csv"), "s");
    write_matrix_csv(result.D_col, join(cfg.out_dir, "similarity_col.csv"), "s");
    write_vector_csv(result.absgram_eigs_row, join(cfg.out_dir, "absgram_eigs_row.csv"),
                     "eigenvalue");
    write_vector_csv(result.absgram_eigs_col, join(cfg.out_dir, "absgram_eigs_col.csv"),
                     "eigenvalue");
    print_warnings(fn.warnings);
    print_warnings(result.warnings);
    std::cout << "k0=" << fn.k0 << " k=" << fn.k << " r0=" << fn.r0 << " r=" << fn.r
              << " m=" << result.m_hat << " n=" << result.n_hat << "\n";
}

void run_replicate(const CLI::App* cmd, const ScenarioFlags& sf, int reps,
                   const std::vector<Index>& l0_set, bool known, const AnalysisOpts& o) {
    const ScenarioSpec spec = build_spec(cmd, sf);
    const int threads = resolve_threads(cmd, o, 1);
    const ReplicationReport report = run_replications(spec, reps, l0_set, known, threads);
    ensure_dir(o.out);
    write_replication_report_csv(report, join(o.out, "report.csv"));
    write_replication_report_json(report, join(o.out, "report.json"));
    write_replication_log_csv(report, join(o.out, "replication_log.csv"));
    for (const auto& agg : report.aggregates)
        std::cout << "l0=" << agg.l0 << " n_ok=" << agg.n_ok << " freq_k0=" << agg.freq_k0
                  << " freq_r0=" << agg.freq_r0 << " dist_R=" << agg.dist_R.mean
                  << " acc_row=" << agg.acc_row.mean << " acc_col=" << agg.acc_col.mean
                  << "\n";
}

void run_rolling(const CLI::App* cmd, const AnalysisOpts& o, const std::string& method_name,
                 int k0, int k, int r0, int r, Index start, Index min_train) {
    const RunConfig cfg = merge_config(cmd, o);
    const MatrixSeries series = load_input(o, cfg);
    const RollingMethod method = parse_rolling_method(method_name);
    const RollingReport report =
        rolling_validation(series, method, k0, k, r0, r, start, cfg.l0, min_train);
    ensure_dir(cfg.out_dir);
    write_rolling_report_csv(report, join(cfg.out_dir, "rolling_report.csv"));
    write_rolling_report_json(report, join(cfg.out_dir, "rolling_report.json"));
    std::cout << "mse=" << std::setprecision(17) << report.mse
              << " n_eval=" << report.n_eval << "\n";
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{"two-way factor model estimation and biclustering for matrix time series"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic series plus ground truth");
    ScenarioFlags sim_sf;
    std::string sim_out = ".";
    add_scenario_flags(sim, sim_sf);
    sim->add_option("--out", sim_out, "output directory")->capture_default_str();
    sim->callback([&] { run_simulate(sim, sim_sf, sim_out); });

    // factors
    auto* fac = app.add_subcommand("factors", "estimate the four factor counts");
    AnalysisOpts fac_o;
    add_input_flags(fac, fac_o);
    add_j0_flags(fac, fac_o);
    fac->callback([&] { run_factors(fac, fac_o); });

    // loadings
    auto* loa = app.add_subcommand("loadings", "estimate global and cluster-specific loadings");
    AnalysisOpts loa_o;
    std::vector<int> loa_fn;
    int loa_refine = 1;
    add_input_flags(loa, loa_o);
    add_j0_flags(loa, loa_o);
    loa->add_option("--factor-numbers", loa_fn, "fixed counts k0,k,r0,r")->delimiter(',');
    loa->add_option("--refine-iters", loa_refine, "projection refinement rounds")
        ->capture_default_str();
    loa->callback([&] { run_loadings(loa, loa_o, loa_fn, loa_refine); });

    // bicluster
    auto* bic = app.add_subcommand("bicluster", "full pipeline: loadings, counts, k-means");
    AnalysisOpts bic_o;
    std::vector<int> bic_fn;
    int bic_m = 0, bic_n = 0;
    add_input_flags(bic, bic_o);
    add_j0_flags(bic, bic_o);
    add_kmeans_flags(bic, bic_o);
    bic->add_option("--factor-numbers", bic_fn, "fixed counts k0,k,r0,r")->delimiter(',');
    bic->add_option("--m", bic_m, "override the row cluster count");
    bic->add_option("--n", bic_n, "override the column cluster count");
    bic->callback([&] { run_bicluster(bic, bic_o, bic_fn, bic_m, bic_n); });

    // replicate
    auto* rep = app.add_subcommand("replicate", "Monte Carlo replication study");
    ScenarioFlags rep_sf;
    AnalysisOpts rep_o;
    int rep_reps = 100;
    std::vector<Index> rep_l0 = {5};
    bool rep_known = false;
    add_scenario_flags(rep, rep_sf);
    rep->add_option("--reps", rep_reps, "number of replications")->capture_default_str();
    rep->add_option("--l0-set", rep_l0, "lag settings to evaluate")->delimiter(',');
    rep->add_flag("--known-factor-numbers", rep_known,
                  "use the true factor counts instead of the estimates");
    rep->add_option("--threads", rep_o.threads, "worker thread cap (env MTSB_THREADS)");
    rep->add_option("--out", rep_o.out, "output directory")->capture_default_str();
    rep->callback([&] { run_replicate(rep, rep_sf, rep_reps, rep_l0, rep_known, rep_o); });

    // rolling
    auto* rol = app.add_subcommand("rolling", "rolling one-step reconstruction validation");
    AnalysisOpts rol_o;
    std::string rol_method = "ours";
    int rol_k0 = 1, rol_k = 1, rol_r0 = 1, rol_r = 1;
    Index rol_start = 0, rol_min_train = 40;
    add_input_flags(rol, rol_o);
    rol->add_option("--method", rol_method, "ours | acce_baseline | pca_baseline")
        ->capture_default_str();
    rol->add_option("--k0", rol_k0, "global row factor count")->required();
    rol->add_option("--k", rol_k, "weak row factor count (ours)");
    rol->add_option("--r0", rol_r0, "global column factor count")->required();
    rol->add_option("--r", rol_r, "weak column factor count (ours)");
    rol->add_option("--start", rol_start, "first evaluated time point (1-based)")->required();
    rol->add_option("--min-train", rol_min_train, "minimum training length")
        ->capture_default_str();
    rol->callback([&] {
        run_rolling(rol, rol_o, rol_method, rol_k0, rol_k, rol_r0, rol_r, rol_start,
                    rol_min_train);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cli_dispatch(const std::vector<std::string>& argv) {
    std::vector<const char*> ptrs;
    ptrs.reserve(argv.size());
    for (const auto& a : argv) ptrs.push_back(a.c_str());
    return cli_dispatch(static_cast<int>(ptrs.size()), ptrs.data());
}

}  // namespace mtsb
