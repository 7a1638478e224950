#include "mtsb/simulate.hpp"

#include <cmath>
#include <numeric>

namespace mtsb {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

Index ScenarioSpec::p() const {
    return std::accumulate(p_blocks.begin(), p_blocks.end(), Index{0});
}
Index ScenarioSpec::q() const {
    return std::accumulate(q_blocks.begin(), q_blocks.end(), Index{0});
}
int ScenarioSpec::k() const {
    return std::accumulate(k_blocks.begin(), k_blocks.end(), 0);
}
int ScenarioSpec::r() const {
    return std::accumulate(r_blocks.begin(), r_blocks.end(), 0);
}

void ScenarioSpec::validate() const {
    if (T < 2) throw ConfigError("scenario needs T >= 2");
    if (m < 1 || n < 1) throw ConfigError("cluster counts m, n must be >= 1");
    if (k0 < 1 || r0 < 1) throw ConfigError("strong factor counts must be >= 1");
    if (static_cast<int>(k_blocks.size()) != m || static_cast<int>(p_blocks.size()) != m)
        throw ConfigError("need exactly m weak row factor counts and m row block sizes");
    if (static_cast<int>(r_blocks.size()) != n || static_cast<int>(q_blocks.size()) != n)
        throw ConfigError("need exactly n weak column factor counts and n column block sizes");
    for (int i = 0; i < m; ++i) {
        if (k_blocks[i] < 1) throw ConfigError("weak row factor counts must be >= 1");
        if (p_blocks[i] < k_blocks[i])
            throw ConfigError("row block " + std::to_string(i + 1) +
                              " smaller than its factor count");
    }
    for (int j = 0; j < n; ++j) {
        if (r_blocks[j] < 1) throw ConfigError("weak column factor counts must be >= 1");
        if (q_blocks[j] < r_blocks[j])
            throw ConfigError("column block " + std::to_string(j + 1) +
                              " smaller than its factor count");
    }
    if (p() < k0 || q() < r0) throw ConfigError("strong factor counts exceed dimensions");
    const auto& cr = coeff_range;
    if (!(cr.neg_lo <= cr.neg_hi && cr.pos_lo <= cr.pos_hi))
        throw ConfigError("coefficient intervals must be ordered");
    if (std::max(std::abs(cr.neg_lo), std::abs(cr.pos_hi)) >= 1.0)
        throw ConfigError("coefficient range touches the unit root");
    if (!(factor_sd_lo > 0 && factor_sd_hi >= factor_sd_lo))
        throw ConfigError("factor sd range must be positive and ordered");
    if (noise_innovation_variance < 0) throw ConfigError("noise variance must be >= 0");
    if (weak_scale < 0) throw ConfigError("weak_scale must be >= 0");
}

namespace {

ScenarioSpec equal_block_scenario(Index T, int m, int n, Index p1, Index q1) {
    ScenarioSpec s;
    s.T = T;
    s.m = m;
    s.n = n;
    s.k0 = 3;
    s.r0 = 2;
    s.k_blocks.assign(m, 3);
    s.r_blocks.assign(n, 2);
    s.p_blocks.assign(m, p1);
    s.q_blocks.assign(n, q1);
    return s;
}

}  // namespace

ScenarioSpec make_scenario_preset(const std::string& name, Index p1, Index q1) {
    ScenarioSpec s;
    if (name == "I")
        s = equal_block_scenario(400, 3, 3, p1, q1);
    else if (name == "II")
        s = equal_block_scenario(500, 5, 4, p1, q1);
    else
        throw ConfigError("unknown scenario preset '" + name + "' (expected I or II)");
    if (p1 < s.k0 + 1) throw ConfigError("p1 must be at least k0+1 = 4");
    if (q1 < s.r0 + 1) throw ConfigError("q1 must be at least r0+1 = 3");
    s.validate();
    return s;
}

namespace {

double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double gaussian(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

double draw_coeff(const CoeffRange& cr, Rng& rng) {
    const bool negative = uniform(rng, 0.0, 1.0) < 0.5;
    return negative ? uniform(rng, cr.neg_lo, cr.neg_hi) : uniform(rng, cr.pos_lo, cr.pos_hi);
}

Matrix uniform_matrix(Rng& rng, Index rows, Index cols) {
    Matrix M(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r) M(r, c) = uniform(rng, -1.0, 1.0);
    return M;
}

// Least-squares projection of each column of A onto the complement of span(B).
Matrix project_off(const Matrix& A, const Matrix& B) {
    return A - B * (B.transpose() * B).ldlt().solve(B.transpose() * A);
}

}  // namespace

Vector ar1_path(double coeff, double sd, Index T, Rng& rng) {
    if (std::abs(coeff) >= 1.0)
        throw StabilityError("AR(1) coefficient " + std::to_string(coeff) + " is non-stationary");
    if (!(sd > 0)) throw ConfigError("path sd must be positive");
    if (T < 1) throw ConfigError("path length must be >= 1");
    Vector x(T);
    x(0) = gaussian(rng) / std::sqrt(1.0 - coeff * coeff);
    for (Index t = 1; t < T; ++t) x(t) = coeff * x(t - 1) + gaussian(rng);
    // unit-innovation stationary variance is 1/(1-coeff^2); rescale to sd
    return x * (sd * std::sqrt(1.0 - coeff * coeff));
}

Vector ma1_path(double coeff, double sd, Index T, Rng& rng) {
    if (!(sd > 0)) throw ConfigError("path sd must be positive");
    if (T < 1) throw ConfigError("path length must be >= 1");
    Vector eps(T + 1);
    for (Index t = 0; t <= T; ++t) eps(t) = gaussian(rng);
    Vector x(T);
    for (Index t = 0; t < T; ++t) x(t) = eps(t + 1) + coeff * eps(t);
    return x * (sd / std::sqrt(1.0 + coeff * coeff));
}

std::pair<MatrixSeries, GroundTruth> generate(const ScenarioSpec& spec) {
    spec.validate();
    const Index T = spec.T, p = spec.p(), q = spec.q();
    const int k0 = spec.k0, r0 = spec.r0, k = spec.k(), r = spec.r();
    Rng rng(spec.seed);

    GroundTruth truth;

    // Loadings first: R, C, then the diagonal blocks of Gamma and Lambda.
    truth.R = uniform_matrix(rng, p, k0);
    truth.C = uniform_matrix(rng, q, r0);
    truth.Gamma = Matrix::Zero(p, k);
    truth.Lambda = Matrix::Zero(q, r);
    truth.row_truth = IntVector(p);
    truth.col_truth = IntVector(q);
    {
        Index row0 = 0;
        int col0 = 0;
        for (int i = 0; i < spec.m; ++i) {
            const Index pi = spec.p_blocks[i];
            const int ki = spec.k_blocks[i];
            truth.Gamma.block(row0, col0, pi, ki) = uniform_matrix(rng, pi, ki);
            truth.row_truth.segment(row0, pi).setConstant(i + 1);
            row0 += pi;
            col0 += ki;
        }
    }
    {
        Index row0 = 0;
        int col0 = 0;
        for (int j = 0; j < spec.n; ++j) {
            const Index qj = spec.q_blocks[j];
            const int rj = spec.r_blocks[j];
            truth.Lambda.block(row0, col0, qj, rj) = uniform_matrix(rng, qj, rj);
            truth.col_truth.segment(row0, qj).setConstant(j + 1);
            row0 += qj;
            col0 += rj;
        }
    }
    if (spec.orthogonal_loadings) {
        truth.R = project_off(truth.R, truth.Gamma);
        truth.C = project_off(truth.C, truth.Lambda);
    }

    // Strong factors: one stationary AR(1) per vec(G_t) component.
    const int ng = k0 * r0;
    truth.g_coeff = Vector(ng);
    truth.g_sd = Vector(ng);
    Matrix g_paths(T, ng);
    for (int c = 0; c < ng; ++c) {
        truth.g_coeff(c) = draw_coeff(spec.coeff_range, rng);
        truth.g_sd(c) = uniform(rng, spec.factor_sd_lo, spec.factor_sd_hi);
        g_paths.col(c) = ar1_path(truth.g_coeff(c), truth.g_sd(c), T, rng);
    }

    // Weak factors: one MA(1) per vec(F_t) component.
    const int nf = k * r;
    truth.f_coeff = Vector(nf);
    truth.f_sd = Vector(nf);
    Matrix f_paths(T, nf);
    for (int c = 0; c < nf; ++c) {
        truth.f_coeff(c) = draw_coeff(spec.coeff_range, rng);
        truth.f_sd(c) = uniform(rng, spec.factor_sd_lo, spec.factor_sd_hi);
        f_paths.col(c) = ma1_path(truth.f_coeff(c), truth.f_sd(c), T, rng);
    }
    f_paths *= spec.weak_scale;

    // Noise: per-cell MA(1) with N(0, v) innovations, not rescaled.
    const Index ne = p * q;
    truth.noise_coeff = Vector::Zero(ne);
    Matrix e_paths = Matrix::Zero(T, ne);
    if (spec.noise_innovation_variance > 0) {
        const double innov_sd = std::sqrt(spec.noise_innovation_variance);
        for (Index c = 0; c < ne; ++c) {
            truth.noise_coeff(c) = draw_coeff(spec.coeff_range, rng);
            const double theta = truth.noise_coeff(c);
            // ma1_path rescales by 1/sqrt(1+theta^2); undo it so the
            // innovation sd (not the marginal sd) is what v fixes.
            e_paths.col(c) =
                ma1_path(theta, innov_sd * std::sqrt(1.0 + theta * theta), T, rng);
        }
    }

    truth.G.reserve(T);
    truth.F.reserve(T);
    truth.E0.reserve(T);
    std::vector<Matrix> frames;
    frames.reserve(T);
    for (Index t = 0; t < T; ++t) {
        const Vector gt = g_paths.row(t), ft = f_paths.row(t), et = e_paths.row(t);
        Matrix Gt = Eigen::Map<const Matrix>(gt.data(), k0, r0);
        Matrix Ft = Eigen::Map<const Matrix>(ft.data(), k, r);
        Matrix Et = Eigen::Map<const Matrix>(et.data(), p, q);
        frames.push_back(truth.R * Gt * truth.C.transpose() +
                         truth.Gamma * Ft * truth.Lambda.transpose() + Et);
        truth.G.push_back(std::move(Gt));
        truth.F.push_back(std::move(Ft));
        truth.E0.push_back(std::move(Et));
    }
    return {MatrixSeries(std::move(frames)), std::move(truth)};
}

}  // namespace mtsb
