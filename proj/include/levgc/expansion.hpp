#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "levgc/linalg.hpp"

namespace levgc {

/// Integer replication counts for the K blocks plus the distribution they
/// induce when servers are sampled uniformly.
struct ReplicationPlan {
    std::vector<int> r;            // r_i >= 1 per block
    int R = 0;                     // sum of r
    SamplingDistribution induced;  // p_i = r_i / R
    double beta = 1.0;             // min_i target_i / induced_i
    double additive_eps = 0.0;     // max_i |target_i - induced_i|
};

/// Replication plan realized on m = R servers: server j holds exactly one
/// block, blocks assigned contiguously, with encoding scale 1/sqrt(q * p_i).
struct ExpansionNetwork {
    ReplicationPlan plan;
    std::vector<int> assignment;  // size m, server index -> block index
    Vector encoding_scales;       // length K
    int q = 0;
    int tau = 0;

    int servers() const { return static_cast<int>(assignment.size()); }
};

// (1/K) * sum |P_i - Q_i|, the normalized l1 gap.
double distortion(const SamplingDistribution& P, const SamplingDistribution& Q);

// Round-half-up: floor(a + 1/2).
long long round_half_up(double a);

// r_i = round(log(1 - P_i) / log(phi_T)), clamped to >= 1.
std::vector<int> replication_from_runtime(const SamplingDistribution& P, double phi_T);

// Lemma-style rounding error bound: (1 - sqrt(phi)) * sum_i phi^min(r_i, rho_i).
double rounding_bound(const SamplingDistribution& P, double phi_T,
                      const std::vector<int>& r_hat);

// (1/K) * sum |P_i - (1 - phi^{r_i})|.
double delta_distortion(const SamplingDistribution& P, double phi_T,
                        const std::vector<int>& r);

struct Rational {
    long long num = 0;
    long long den = 1;
};

// Exact lcm construction: R = lcm(denominators), r_i = R * P_i. The induced
// distribution equals P exactly. Probabilities must sum to one exactly.
std::pair<long long, std::vector<long long>> perfect_replication(
    const std::vector<Rational>& P);

// Algorithm that adjusts replication counts until they sum to m, greedily
// moving the block whose induced probability is furthest on the heavy side.
// Keeps every r_i >= 1; requires m >= K.
std::vector<int> fit_to_m(const SamplingDistribution& P, const std::vector<int>& r_tilde,
                          int m);

// Package counts into a plan; beta and additive_eps are measured against P.
ReplicationPlan make_plan(const SamplingDistribution& P, const std::vector<int>& r);

// Full design pipeline: replication_from_runtime, integer upscale by
// round(m / R_hat) when m is much larger, then fit_to_m.
ReplicationPlan design_plan(const SamplingDistribution& P, double phi_T, int m);

ExpansionNetwork build_network(const ReplicationPlan& plan, int m, int q, int tau);

// || I_K - G_I^+ G_I ||_2 for a q x K decoding matrix (Moore-Penrose).
double optimal_decoding_error(const Matrix& G_I);

}  // namespace levgc
