#pragma once

#include <cstdint>
#include <random>

#include "mtsb/types.hpp"

namespace mtsb {

using Rng = std::mt19937_64;

// Deterministic seed splitting (splitmix64-style) so each replication /
// restart gets an independent substream from one base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Coefficient support U(neg_lo,neg_hi) U U(pos_lo,pos_hi); each side drawn
// with probability 1/2. Keeps dynamics away from both zero and the unit root.
struct CoeffRange {
    double neg_lo = -0.95, neg_hi = -0.4;
    double pos_lo = 0.4, pos_hi = 0.95;
};

struct ScenarioSpec {
    Index T = 0;
    int m = 0, n = 0;                       // row / column cluster counts
    int k0 = 0, r0 = 0;                     // strong factor counts
    std::vector<int> k_blocks, r_blocks;    // weak factor counts k_1..k_m, r_1..r_n
    std::vector<Index> p_blocks, q_blocks;  // block sizes p_1..p_m, q_1..q_n
    CoeffRange coeff_range;
    double factor_sd_lo = 1.0, factor_sd_hi = 2.0;
    double noise_innovation_variance = 0.25;
    std::uint64_t seed = 0;
    // Test hooks: scale on the weak component (0 removes it), and an option to
    // project the strong loadings onto the orthogonal complement of the weak
    // ones so the two parts are exactly orthogonal.
    double weak_scale = 1.0;
    bool orthogonal_loadings = false;

    Index p() const;
    Index q() const;
    int k() const;  // total weak row factors
    int r() const;  // total weak column factors
    void validate() const;
};

struct GroundTruth {
    Matrix R, C;            // p x k0, q x r0
    Matrix Gamma, Lambda;   // p x k, q x r, block-diagonal
    std::vector<Matrix> G;  // T frames of k0 x r0
    std::vector<Matrix> F;  // T frames of k x r (weak_scale already applied)
    std::vector<Matrix> E0; // T frames of p x q
    IntVector row_truth, col_truth;  // 1-based block memberships
    // Records of the per-component draws, for diagnostics in tests.
    Vector g_coeff, g_sd, f_coeff, f_sd, noise_coeff;
};

// Scenario I: T=400, m=n=3. Scenario II: T=500, m=5, n=4.
// Both use k0=3, r0=2, k_i=3, r_j=2 and equal block sizes p1 / q1.
ScenarioSpec make_scenario_preset(const std::string& name, Index p1, Index q1);

// X_t = R G_t C^T + Gamma F_t Lambda^T + E0_t with U(-1,1) loadings,
// AR(1) strong factors, MA(1) weak factors, and MA(1) noise with N(0, v)
// innovations. Pure function of the spec (identical seed, identical output).
std::pair<MatrixSeries, GroundTruth> generate(const ScenarioSpec& spec);

// Stationary AR(1) path rescaled so the population sd equals `sd`;
// the initial value comes from the stationary distribution.
Vector ar1_path(double coeff, double sd, Index T, Rng& rng);

// MA(1) path rescaled to population sd `sd`.
Vector ma1_path(double coeff, double sd, Index T, Rng& rng);

}  // namespace mtsb
