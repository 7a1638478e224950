#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mtsb/bicluster.hpp"
#include "mtsb/eig.hpp"
#include "mtsb/errors.hpp"
#include "mtsb/estimate.hpp"
#include "mtsb/evaluate.hpp"
#include "mtsb/io.hpp"
#include "mtsb/simulate.hpp"
#include "mtsb/spectral.hpp"

namespace py = pybind11;
using namespace mtsb;

PYBIND11_MODULE(_mtsb, m) {
    m.doc() = "Two-way matrix factor model estimation and biclustering";

    py::register_exception<Error>(m, "MtsbError");

    py::class_<MatrixSeries>(m, "MatrixSeries")
        .def(py::init<std::vector<Matrix>, std::vector<std::string>,
                      std::vector<std::string>>(),
             py::arg("frames"), py::arg("row_labels") = std::vector<std::string>{},
             py::arg("col_labels") = std::vector<std::string>{})
        .def_property_readonly("length", &MatrixSeries::length)
        .def_property_readonly("rows", &MatrixSeries::rows)
        .def_property_readonly("cols", &MatrixSeries::cols)
        .def("frame", &MatrixSeries::frame, py::arg("t"))
        .def("frames", &MatrixSeries::frames)
        .def("row_labels", &MatrixSeries::row_labels)
        .def("col_labels", &MatrixSeries::col_labels)
        .def("head", &MatrixSeries::head, py::arg("t"))
        .def("flattened", &MatrixSeries::flattened);

    py::enum_<LoadingKind>(m, "LoadingKind")
        .value("global_row", LoadingKind::global_row)
        .value("global_col", LoadingKind::global_col)
        .value("local_row", LoadingKind::local_row)
        .value("local_col", LoadingKind::local_col);

    py::class_<LoadingMatrix>(m, "LoadingMatrix")
        .def(py::init<LoadingKind, Matrix>(), py::arg("kind"), py::arg("values"))
        .def_property_readonly("kind", &LoadingMatrix::kind)
        .def_property_readonly("values", &LoadingMatrix::values)
        .def_property_readonly("dim", &LoadingMatrix::dim)
        .def_property_readonly("n_factors", &LoadingMatrix::n_factors);

    py::class_<LoadingSet>(m, "LoadingSet")
        .def(py::init<>())
        .def_readwrite("R", &LoadingSet::R)
        .def_readwrite("C", &LoadingSet::C)
        .def_readwrite("Gamma", &LoadingSet::Gamma)
        .def_readwrite("Lambda", &LoadingSet::Lambda);

    py::class_<RatioDiagnostics>(m, "RatioDiagnostics")
        .def_readonly("eigenvalues", &RatioDiagnostics::eigenvalues)
        .def_readonly("ratios", &RatioDiagnostics::ratios)
        .def_readonly("local_max_indices", &RatioDiagnostics::local_max_indices)
        .def_readonly("mu1", &RatioDiagnostics::mu1)
        .def_readonly("mu2", &RatioDiagnostics::mu2)
        .def_readonly("fallback_used", &RatioDiagnostics::fallback_used)
        .def_readonly("coincided", &RatioDiagnostics::coincided);

    py::class_<FactorNumbers>(m, "FactorNumbers")
        .def(py::init<>())
        .def_readwrite("k0", &FactorNumbers::k0)
        .def_readwrite("k", &FactorNumbers::k)
        .def_readwrite("r0", &FactorNumbers::r0)
        .def_readwrite("r", &FactorNumbers::r)
        .def_readonly("row_diag", &FactorNumbers::row_diag)
        .def_readonly("col_diag", &FactorNumbers::col_diag)
        .def_readonly("warnings", &FactorNumbers::warnings);

    py::class_<BiclusterResult>(m, "BiclusterResult")
        .def_readonly("row_membership", &BiclusterResult::row_membership)
        .def_readonly("col_membership", &BiclusterResult::col_membership)
        .def_readonly("m_hat", &BiclusterResult::m_hat)
        .def_readonly("n_hat", &BiclusterResult::n_hat)
        .def_readonly("D_row", &BiclusterResult::D_row)
        .def_readonly("D_col", &BiclusterResult::D_col)
        .def_readonly("absgram_eigs_row", &BiclusterResult::absgram_eigs_row)
        .def_readonly("absgram_eigs_col", &BiclusterResult::absgram_eigs_col)
        .def_readonly("eig_threshold", &BiclusterResult::eig_threshold)
        .def_readonly("warnings", &BiclusterResult::warnings);

    py::class_<CoeffRange>(m, "CoeffRange")
        .def(py::init<>())
        .def_readwrite("neg_lo", &CoeffRange::neg_lo)
        .def_readwrite("neg_hi", &CoeffRange::neg_hi)
        .def_readwrite("pos_lo", &CoeffRange::pos_lo)
        .def_readwrite("pos_hi", &CoeffRange::pos_hi);

    py::class_<ScenarioSpec>(m, "ScenarioSpec")
        .def(py::init<>())
        .def_readwrite("T", &ScenarioSpec::T)
        .def_readwrite("m", &ScenarioSpec::m)
        .def_readwrite("n", &ScenarioSpec::n)
        .def_readwrite("k0", &ScenarioSpec::k0)
        .def_readwrite("r0", &ScenarioSpec::r0)
        .def_readwrite("k_blocks", &ScenarioSpec::k_blocks)
        .def_readwrite("r_blocks", &ScenarioSpec::r_blocks)
        .def_readwrite("p_blocks", &ScenarioSpec::p_blocks)
        .def_readwrite("q_blocks", &ScenarioSpec::q_blocks)
        .def_readwrite("coeff_range", &ScenarioSpec::coeff_range)
        .def_readwrite("factor_sd_lo", &ScenarioSpec::factor_sd_lo)
        .def_readwrite("factor_sd_hi", &ScenarioSpec::factor_sd_hi)
        .def_readwrite("noise_innovation_variance", &ScenarioSpec::noise_innovation_variance)
        .def_readwrite("seed", &ScenarioSpec::seed)
        .def_readwrite("weak_scale", &ScenarioSpec::weak_scale)
        .def_readwrite("orthogonal_loadings", &ScenarioSpec::orthogonal_loadings)
        .def_property_readonly("p", &ScenarioSpec::p)
        .def_property_readonly("q", &ScenarioSpec::q)
        .def_property_readonly("k", &ScenarioSpec::k)
        .def_property_readonly("r", &ScenarioSpec::r)
        .def("validate", &ScenarioSpec::validate);

    py::class_<GroundTruth>(m, "GroundTruth")
        .def_readonly("R", &GroundTruth::R)
        .def_readonly("C", &GroundTruth::C)
        .def_readonly("Gamma", &GroundTruth::Gamma)
        .def_readonly("Lambda", &GroundTruth::Lambda)
        .def_readonly("G", &GroundTruth::G)
        .def_readonly("F", &GroundTruth::F)
        .def_readonly("E0", &GroundTruth::E0)
        .def_readonly("row_truth", &GroundTruth::row_truth)
        .def_readonly("col_truth", &GroundTruth::col_truth);

    py::class_<KMeansConfig>(m, "KMeansConfig")
        .def(py::init<>())
        .def_readwrite("n_clusters", &KMeansConfig::n_clusters)
        .def_readwrite("restarts", &KMeansConfig::restarts)
        .def_readwrite("max_iter", &KMeansConfig::max_iter)
        .def_readwrite("tol", &KMeansConfig::tol)
        .def_readwrite("seed", &KMeansConfig::seed)
        .def_readwrite("threads", &KMeansConfig::threads);

    py::class_<PipelineOptions>(m, "PipelineOptions")
        .def(py::init<>())
        .def_readwrite("l0", &PipelineOptions::l0)
        .def_readwrite("factor_numbers", &PipelineOptions::factor_numbers)
        .def_readwrite("J0_row", &PipelineOptions::J0_row)
        .def_readwrite("J0_col", &PipelineOptions::J0_col)
        .def_readwrite("kmeans", &PipelineOptions::kmeans)
        .def_readwrite("override_m", &PipelineOptions::override_m)
        .def_readwrite("override_n", &PipelineOptions::override_n);

    py::enum_<RollingMethod>(m, "RollingMethod")
        .value("ours", RollingMethod::ours)
        .value("acce_baseline", RollingMethod::acce_baseline)
        .value("pca_baseline", RollingMethod::pca_baseline);

    py::class_<RollingReport>(m, "RollingReport")
        .def_readonly("method", &RollingReport::method)
        .def_readonly("k0", &RollingReport::k0)
        .def_readonly("k", &RollingReport::k)
        .def_readonly("r0", &RollingReport::r0)
        .def_readonly("r", &RollingReport::r)
        .def_readonly("l0", &RollingReport::l0)
        .def_readonly("start_index", &RollingReport::start_index)
        .def_readonly("n_eval", &RollingReport::n_eval)
        .def_readonly("mse", &RollingReport::mse)
        .def_readonly("mse_literal_T", &RollingReport::mse_literal_T)
        .def_readonly("per_t_sse", &RollingReport::per_t_sse);

    py::class_<MeanSd>(m, "MeanSd")
        .def_readonly("mean", &MeanSd::mean)
        .def_readonly("sd", &MeanSd::sd);

    py::class_<ReplicationRow>(m, "ReplicationRow")
        .def_readonly("rep", &ReplicationRow::rep)
        .def_readonly("l0", &ReplicationRow::l0)
        .def_readonly("ok", &ReplicationRow::ok)
        .def_readonly("error", &ReplicationRow::error)
        .def_readonly("k0_est", &ReplicationRow::k0_est)
        .def_readonly("k_est", &ReplicationRow::k_est)
        .def_readonly("r0_est", &ReplicationRow::r0_est)
        .def_readonly("r_est", &ReplicationRow::r_est)
        .def_readonly("dist_R", &ReplicationRow::dist_R)
        .def_readonly("dist_C", &ReplicationRow::dist_C)
        .def_readonly("dist_Gamma", &ReplicationRow::dist_Gamma)
        .def_readonly("dist_Lambda", &ReplicationRow::dist_Lambda)
        .def_readonly("m_hat", &ReplicationRow::m_hat)
        .def_readonly("n_hat", &ReplicationRow::n_hat)
        .def_readonly("acc_row", &ReplicationRow::acc_row)
        .def_readonly("acc_col", &ReplicationRow::acc_col);

    py::class_<ReplicationAggregate>(m, "ReplicationAggregate")
        .def_readonly("l0", &ReplicationAggregate::l0)
        .def_readonly("n_ok", &ReplicationAggregate::n_ok)
        .def_readonly("n_failed", &ReplicationAggregate::n_failed)
        .def_readonly("freq_k0", &ReplicationAggregate::freq_k0)
        .def_readonly("freq_k", &ReplicationAggregate::freq_k)
        .def_readonly("freq_r0", &ReplicationAggregate::freq_r0)
        .def_readonly("freq_r", &ReplicationAggregate::freq_r)
        .def_readonly("dist_R", &ReplicationAggregate::dist_R)
        .def_readonly("dist_C", &ReplicationAggregate::dist_C)
        .def_readonly("dist_Gamma", &ReplicationAggregate::dist_Gamma)
        .def_readonly("dist_Lambda", &ReplicationAggregate::dist_Lambda)
        .def_readonly("m_hat", &ReplicationAggregate::m_hat)
        .def_readonly("n_hat", &ReplicationAggregate::n_hat)
        .def_readonly("acc_row", &ReplicationAggregate::acc_row)
        .def_readonly("acc_col", &ReplicationAggregate::acc_col);

    py::class_<ReplicationReport>(m, "ReplicationReport")
        .def_readonly("scenario", &ReplicationReport::scenario)
        .def_readonly("n_reps", &ReplicationReport::n_reps)
        .def_readonly("l0_set", &ReplicationReport::l0_set)
        .def_readonly("known_factor_numbers", &ReplicationReport::known_factor_numbers)
        .def_readonly("rows", &ReplicationReport::rows)
        .def_readonly("aggregates", &ReplicationReport::aggregates);

    // simulation
    m.def("make_scenario_preset", &make_scenario_preset, py::arg("name"), py::arg("p1"),
          py::arg("q1"));
    m.def("generate", &generate, py::arg("spec"));

    // spectral / estimation
    m.def("lag_cross_cov", &lag_cross_cov, py::arg("series"), py::arg("i"), py::arg("j"),
          py::arg("lag"), py::arg("orientation"));
    m.def("estimate_factor_numbers", &estimate_factor_numbers, py::arg("series"),
          py::arg("l0"), py::arg("J0_row") = 0, py::arg("J0_col") = 0);
    m.def("estimate_global_loadings", &estimate_global_loadings, py::arg("series"),
          py::arg("k0"), py::arg("r0"), py::arg("l0"), py::arg("refine_iters") = 1);
    m.def("estimate_cluster_loadings", &estimate_cluster_loadings, py::arg("series"),
          py::arg("R"), py::arg("C"), py::arg("k"), py::arg("r"), py::arg("l0"));
    m.def("residual_series", &residual_series, py::arg("series"), py::arg("R"), py::arg("C"));

    py::enum_<Orientation>(m, "Orientation")
        .value("column", Orientation::column)
        .value("row", Orientation::row);

    // biclustering
    m.def("absgram_eigenvalues", &absgram_eigenvalues, py::arg("loading"));
    m.def("cluster_count_upper_bound", &cluster_count_upper_bound, py::arg("loading"),
          py::arg("T"));
    m.def(
        "similarity_matrix",
        [](const LoadingMatrix& L) { return similarity_matrix(L); }, py::arg("loading"));
    m.def(
        "kmeans_rows",
        [](const Matrix& M, const KMeansConfig& cfg) { return kmeans_rows(M, cfg); },
        py::arg("M"), py::arg("config"));
    m.def("misclustering_rate", &misclustering_rate, py::arg("found"), py::arg("truth"));
    m.def(
        "bicluster_pipeline",
        [](const MatrixSeries& series, const PipelineOptions& opts) {
            return bicluster_pipeline(series, opts);
        },
        py::arg("series"), py::arg("options") = PipelineOptions{});

    // evaluation
    m.def("space_distance", &space_distance, py::arg("S1"), py::arg("S2"));
    m.def("orthonormal_basis", &orthonormal_basis, py::arg("S"));
    m.def("reconstruct", &reconstruct, py::arg("series"), py::arg("loadings"));
    m.def("baseline_loadings", &baseline_loadings, py::arg("series"), py::arg("method"),
          py::arg("k0"), py::arg("r0"), py::arg("l0"));
    m.def("rolling_validation", &rolling_validation, py::arg("series"), py::arg("method"),
          py::arg("k0"), py::arg("k"), py::arg("r0"), py::arg("r"), py::arg("start_index"),
          py::arg("l0"), py::arg("min_train") = 40);
    m.def("run_replications", &run_replications, py::arg("spec"), py::arg("n_reps"),
          py::arg("l0_set"), py::arg("known_factor_numbers"), py::arg("threads") = 1);

    // io
    m.def("load_tensor_csv", &load_tensor_csv, py::arg("path"));
    m.def("save_tensor_csv", &save_tensor_csv, py::arg("series"), py::arg("path"));
    m.def(
        "preprocess",
        [](const MatrixSeries& series, bool demean, bool standardize) {
            std::vector<std::string> warnings;
            MatrixSeries out = preprocess(series, demean, standardize, &warnings);
            return py::make_tuple(out, warnings);
        },
        py::arg("series"), py::arg("demean"), py::arg("standardize"));
    m.def("write_replication_report_csv", &write_replication_report_csv, py::arg("report"),
          py::arg("path"));
    m.def("write_replication_report_json", &write_replication_report_json, py::arg("report"),
          py::arg("path"));
    m.def("write_rolling_report_json", &write_rolling_report_json, py::arg("report"),
          py::arg("path"));
}
