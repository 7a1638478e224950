#include "mtsb/bicluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mtsb/eig.hpp"
#include "mtsb/estimate.hpp"
#include "mtsb/parallel.hpp"
#include "mtsb/simulate.hpp"

namespace mtsb {

Vector absgram_eigenvalues(const LoadingMatrix& L) {
    if (L.n_factors() < 1) return Vector(0);
    const Matrix& V = L.values();
    const Matrix absgram = (V * V.transpose()).cwiseAbs();
    return sym_eig_all(absgram).first;
}

int cluster_count_upper_bound(const LoadingMatrix& L, Index T) {
    if (T < 3) throw ConfigError("cluster-count threshold needs T >= 3 (log T > 1)");
    const double threshold = 1.0 - 1.0 / std::log(static_cast<double>(T));
    const Vector eigs = absgram_eigenvalues(L);
    int count = 0;
    for (Index i = 0; i < eigs.size(); ++i)
        if (eigs(i) > threshold) ++count;
    return count;
}

Matrix similarity_matrix(const LoadingMatrix& L, std::vector<std::string>* warnings,
                         std::vector<Index>* degenerate_rows) {
    const Matrix& V = L.values();
    const Index d = V.rows();
    const Vector norms = V.rowwise().norm();
    std::vector<bool> degenerate(static_cast<size_t>(d), false);
    for (Index i = 0; i < d; ++i) {
        if (norms(i) < 1e-12) {
            degenerate[static_cast<size_t>(i)] = true;
            if (degenerate_rows) degenerate_rows->push_back(i);
            if (warnings)
                warnings->push_back("similarity: row " + std::to_string(i + 1) +
                                    " has near-zero norm; its similarities are set to 0");
        }
    }
    Matrix D = Matrix::Identity(d, d);
    for (Index i = 0; i < d; ++i) {
        if (degenerate[static_cast<size_t>(i)]) continue;
        for (Index j = i + 1; j < d; ++j) {
            if (degenerate[static_cast<size_t>(j)]) continue;
            const double cos_abs =
                std::abs(V.row(i).dot(V.row(j))) / (norms(i) * norms(j));
            D(i, j) = D(j, i) = std::min(1.0, cos_abs);
        }
    }
    return D;
}

namespace {

struct RestartOutcome {
    IntVector labels;  // 0-based raw labels
    double objective = std::numeric_limits<double>::infinity();
    std::vector<double> iter_objectives;
};

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

RestartOutcome lloyd_once(const Matrix& pts, int K, int max_iter, double tol,
                          std::uint64_t seed) {
    const Index d = pts.rows();
    Rng rng(seed);
    Matrix centers(K, pts.cols());
    std::vector<bool> is_center(static_cast<size_t>(d), false);

    // k-means++ seeding
    {
        const Index first = std::uniform_int_distribution<Index>(0, d - 1)(rng);
        centers.row(0) = pts.row(first);
        is_center[static_cast<size_t>(first)] = true;
        Vector dist2 = (pts.rowwise() - centers.row(0)).rowwise().squaredNorm();
        for (int c = 1; c < K; ++c) {
            const double total = dist2.sum();
            Index pick = -1;
            if (total > 0) {
                const double u = uniform01(rng) * total;
                double acc = 0;
                for (Index i = 0; i < d; ++i) {
                    acc += dist2(i);
                    if (u < acc) {
                        pick = i;
                        break;
                    }
                }
                if (pick < 0) {  // rounding pushed u past the last mass
                    for (Index i = d - 1; i >= 0; --i)
                        if (dist2(i) > 0) {
                            pick = i;
                            break;
                        }
                }
            }
            if (pick < 0) {  // every point sits on a chosen center; take a fresh index
                for (Index i = 0; i < d; ++i)
                    if (!is_center[static_cast<size_t>(i)]) {
                        pick = i;
                        break;
                    }
            }
            centers.row(c) = pts.row(pick);
            is_center[static_cast<size_t>(pick)] = true;
            dist2 = dist2.cwiseMin(
                (pts.rowwise() - centers.row(c)).rowwise().squaredNorm());
        }
    }

    RestartOutcome out;
    out.labels = IntVector::Constant(d, 0);
    Vector assign_dist2(d);
    std::vector<int> sizes(static_cast<size_t>(K), 0);
    double prev = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment step (ties to the smaller cluster index)
        std::fill(sizes.begin(), sizes.end(), 0);
        for (Index i = 0; i < d; ++i) {
            int best_c = 0;
            double best = (pts.row(i) - centers.row(0)).squaredNorm();
            for (int c = 1; c < K; ++c) {
                const double v = (pts.row(i) - centers.row(c)).squaredNorm();
                if (v < best) {
                    best = v;
                    best_c = c;
                }
            }
            out.labels(i) = best_c;
            assign_dist2(i) = best;
            ++sizes[static_cast<size_t>(best_c)];
        }
        // revive empty clusters with the farthest point of a cluster that can
        // spare one; this only lowers the objective (the point's distance
        // becomes zero once centers update)
        for (int c = 0; c < K; ++c) {
            if (sizes[static_cast<size_t>(c)] > 0) continue;
            Index donor = -1;
            double worst = -1;
            for (Index i = 0; i < d; ++i) {
                if (sizes[static_cast<size_t>(out.labels(i))] < 2) continue;
                if (assign_dist2(i) > worst) {
                    worst = assign_dist2(i);
                    donor = i;
                }
            }
            if (donor < 0) continue;  // d >= K makes this unreachable, but stay total
            --sizes[static_cast<size_t>(out.labels(donor))];
            out.labels(donor) = c;
            assign_dist2(donor) = 0;
            sizes[static_cast<size_t>(c)] = 1;
        }
        // update step
        centers.setZero();
        for (Index i = 0; i < d; ++i) centers.row(out.labels(i)) += pts.row(i);
        for (int c = 0; c < K; ++c)
            centers.row(c) /= static_cast<double>(std::max(1, sizes[static_cast<size_t>(c)]));
        // objective against the updated centers
        double obj = 0;
        for (Index i = 0; i < d; ++i)
            obj += (pts.row(i) - centers.row(out.labels(i))).squaredNorm();
        out.iter_objectives.push_back(obj);
        out.objective = obj;
        if (prev - obj <= tol * std::max(prev, 1e-300)) break;
        prev = obj;
    }
    return out;
}

IntVector canonicalize_labels(const IntVector& raw, int K) {
    std::vector<int> remap(static_cast<size_t>(K), 0);
    int next = 0;
    IntVector out(raw.size());
    for (Index i = 0; i < raw.size(); ++i) {
        int& slot = remap[static_cast<size_t>(raw(i))];
        if (slot == 0) slot = ++next;
        out(i) = slot;
    }
    return out;
}

}  // namespace

IntVector kmeans_rows(const Matrix& M, const KMeansConfig& cfg, KMeansTrace* trace) {
    const Index d = M.rows();
    if (d < 1) throw DimensionError("kmeans needs at least one point");
    if (cfg.n_clusters < 1) throw ConfigError("n_clusters must be >= 1");
    if (cfg.n_clusters > d)
        throw DimensionError("n_clusters = " + std::to_string(cfg.n_clusters) +
                             " exceeds number of points " + std::to_string(d));
    if (cfg.restarts < 1 || cfg.max_iter < 1 || cfg.tol < 0)
        throw ConfigError("kmeans needs restarts >= 1, max_iter >= 1, tol >= 0");

    std::vector<RestartOutcome> outcomes(static_cast<size_t>(cfg.restarts));
    parallel_for(cfg.restarts, cfg.threads, [&](int s) {
        outcomes[static_cast<size_t>(s)] =
            lloyd_once(M, cfg.n_clusters, cfg.max_iter, cfg.tol,
                       mix_seed(cfg.seed, static_cast<std::uint64_t>(s)));
    });
    int winner = 0;
    for (int s = 1; s < cfg.restarts; ++s)
        if (outcomes[static_cast<size_t>(s)].objective <
            outcomes[static_cast<size_t>(winner)].objective)
            winner = s;
    if (trace) {
        trace->objectives.clear();
        trace->final_objectives.clear();
        for (const auto& o : outcomes) {
            trace->objectives.push_back(o.iter_objectives);
            trace->final_objectives.push_back(o.objective);
        }
        trace->winner = winner;
        trace->winner_objective = outcomes[static_cast<size_t>(winner)].objective;
    }
    return canonicalize_labels(outcomes[static_cast<size_t>(winner)].labels, cfg.n_clusters);
}

namespace {

// Exact min-cost assignment on an n x n integer matrix (Kuhn's algorithm with
// potentials, O(n^3)).
long long assignment_min(const std::vector<std::vector<long long>>& a) {
    const int n = static_cast<int>(a.size());
    const long long INF = std::numeric_limits<long long>::max() / 4;
    std::vector<long long> u(static_cast<size_t>(n) + 1, 0), v(static_cast<size_t>(n) + 1, 0);
    std::vector<int> match(static_cast<size_t>(n) + 1, 0), way(static_cast<size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<long long> minv(static_cast<size_t>(n) + 1, INF);
        std::vector<bool> used(static_cast<size_t>(n) + 1, false);
        do {
            used[static_cast<size_t>(j0)] = true;
            const int i0 = match[static_cast<size_t>(j0)];
            long long delta = INF;
            int j1 = -1;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const long long cur = a[static_cast<size_t>(i0 - 1)][static_cast<size_t>(j - 1)] -
                                      u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<size_t>(j0)];
            match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    long long total = 0;
    for (int j = 1; j <= n; ++j)
        if (match[static_cast<size_t>(j)] != 0)
            total += a[static_cast<size_t>(match[static_cast<size_t>(j)] - 1)]
                      [static_cast<size_t>(j - 1)];
    return total;
}

}  // namespace

double misclustering_rate(const IntVector& found, const IntVector& truth) {
    if (found.size() != truth.size())
        throw DimensionError("membership vectors differ in length: " +
                             std::to_string(found.size()) + " vs " +
                             std::to_string(truth.size()));
    const Index len = found.size();
    if (len < 1) throw DimensionError("membership vectors are empty");
    std::map<int, int> fmap, tmap;
    for (Index i = 0; i < len; ++i) {
        fmap.try_emplace(found(i), static_cast<int>(fmap.size()));
        tmap.try_emplace(truth(i), static_cast<int>(tmap.size()));
    }
    const int n = std::max(static_cast<int>(fmap.size()), static_cast<int>(tmap.size()));
    std::vector<std::vector<long long>> cost(static_cast<size_t>(n),
                                             std::vector<long long>(static_cast<size_t>(n), 0));
    for (Index i = 0; i < len; ++i)
        cost[static_cast<size_t>(fmap[found(i)])][static_cast<size_t>(tmap[truth(i)])] -= 1;
    const long long agree = -assignment_min(cost);
    return 1.0 - static_cast<double>(agree) / static_cast<double>(len);
}

namespace {

// K-means on one similarity matrix plus the degenerate-row and empty-label
// cleanups; returns 1-based labels and may shrink n_clusters if a label
// vanishes after reassignment.
IntVector cluster_side(const Matrix& D, int n_clusters, const KMeansConfig& base_cfg,
                       std::uint64_t stream, const std::vector<Index>& degenerate,
                       int& used_clusters, std::vector<std::string>& warnings) {
    KMeansConfig cfg = base_cfg;
    cfg.n_clusters = n_clusters;
    cfg.seed = mix_seed(base_cfg.seed, stream);
    IntVector labels = kmeans_rows(D, cfg);
    if (!degenerate.empty()) {
        std::vector<int> sizes(static_cast<size_t>(n_clusters) + 1, 0);
        for (Index i = 0; i < labels.size(); ++i) ++sizes[static_cast<size_t>(labels(i))];
        int largest = 1;
        for (int c = 2; c <= n_clusters; ++c)
            if (sizes[static_cast<size_t>(c)] > sizes[static_cast<size_t>(largest)]) largest = c;
        for (Index i : degenerate) labels(i) = largest;
        warnings.push_back("kmeans: " + std::to_string(degenerate.size()) +
                           " degenerate row(s) assigned to the largest cluster");
        // compact labels in case the reassignment emptied a cluster
        std::vector<int> remap(static_cast<size_t>(n_clusters) + 1, 0);
        int next = 0;
        for (Index i = 0; i < labels.size(); ++i) {
            int& slot = remap[static_cast<size_t>(labels(i))];
            if (slot == 0) slot = ++next;
            labels(i) = slot;
        }
        if (next < n_clusters)
            warnings.push_back("kmeans: cluster count reduced to " + std::to_string(next) +
                               " after degenerate-row reassignment");
        used_clusters = next;
    } else {
        used_clusters = n_clusters;
    }
    return labels;
}

template <class F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(std::string("[") + name + "] " + e.what());
    }
}

}  // namespace

BiclusterResult cluster_from_loadings(const LoadingMatrix& Gamma, const LoadingMatrix& Lambda,
                                      Index T, const PipelineOptions& opts) {
    if (Gamma.n_factors() < 1 || Lambda.n_factors() < 1)
        throw ConfigError("clustering needs at least one weak factor per side");
    BiclusterResult res;
    res.eig_threshold = 1.0 - 1.0 / std::log(static_cast<double>(T));
    res.absgram_eigs_row = absgram_eigenvalues(Gamma);
    res.absgram_eigs_col = absgram_eigenvalues(Lambda);
    int m = cluster_count_upper_bound(Gamma, T);
    int n = cluster_count_upper_bound(Lambda, T);
    if (opts.override_m) {
        res.warnings.push_back("row cluster count overridden: " + std::to_string(m) + " -> " +
                               std::to_string(*opts.override_m));
        m = *opts.override_m;
    }
    if (opts.override_n) {
        res.warnings.push_back("column cluster count overridden: " + std::to_string(n) +
                               " -> " + std::to_string(*opts.override_n));
        n = *opts.override_n;
    }
    if (m < 1 || n < 1) throw ConfigError("cluster counts must be >= 1");

    std::vector<Index> degen_rows, degen_cols;
    res.D_row = similarity_matrix(Gamma, &res.warnings, &degen_rows);
    res.D_col = similarity_matrix(Lambda, &res.warnings, &degen_cols);
    res.row_membership = cluster_side(res.D_row, m, opts.kmeans, 101, degen_rows,
                                      res.m_hat, res.warnings);
    res.col_membership = cluster_side(res.D_col, n, opts.kmeans, 102, degen_cols,
                                      res.n_hat, res.warnings);
    return res;
}

std::tuple<BiclusterResult, LoadingSet, FactorNumbers> bicluster_pipeline(
    const MatrixSeries& series, const PipelineOptions& opts) {
    const auto base = stage("aggregates", [&] {
        return compute_base_aggregates(series, opts.l0);
    });
    FactorNumbers fn = stage("factor-numbers", [&] {
        return opts.factor_numbers
                   ? *opts.factor_numbers
                   : factor_numbers_from_aggregates(base, opts.J0_row, opts.J0_col);
    });
    auto [R, C] = stage("global-loadings", [&] {
        return global_loadings_from_aggregates(series, base, fn.k0, fn.r0, opts.l0);
    });
    auto [Gamma, Lambda] = stage("cluster-loadings", [&] {
        return estimate_cluster_loadings(series, R, C, fn.k, fn.r, opts.l0);
    });
    BiclusterResult res = stage("clustering", [&] {
        return cluster_from_loadings(Gamma, Lambda, series.length(), opts);
    });
    LoadingSet set{std::move(R), std::move(C), std::move(Gamma), std::move(Lambda)};
    return {std::move(res), std::move(set), std::move(fn)};
}

std::tuple<BiclusterResult, LoadingSet, FactorNumbers> bicluster_pipeline(
    const MatrixSeries& series, Index l0, std::optional<FactorNumbers> factor_numbers,
    const KMeansConfig& kmeans) {
    PipelineOptions opts;
    opts.l0 = l0;
    opts.factor_numbers = std::move(factor_numbers);
    opts.kmeans = kmeans;
    return bicluster_pipeline(series, opts);
}

}  // namespace mtsb
