#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "levgc/solver.hpp"

namespace levgc {

/// Structured pass/fail result with the measured quantities; dense matrix
/// materialization is allowed here, on small instances only.
struct CheckReport {
    std::string check;
    nlohmann::json params;
    nlohmann::json measured;
    nlohmann::json bound;
    bool pass = false;
};

nlohmann::json report_to_json(const CheckReport& rep);

// Dense sketching matrix S of a draw (q*tau x N) and of its weighted form.
Matrix dense_sketch_matrix(const SketchDraw& s, int K, int tau);
Matrix dense_weighted_sketch_matrix(const WeightedSketchDraw& s, int K, int tau);

// Flattening check: the expanded encoded basis E~ G U has uniform
// normalized Frobenius block scores 1/R when the encoding uses the exact
// scores, and distortion to uniform at most 1/(R*beta) otherwise.
CheckReport check_flattened_scores(const PartitionedDataset& ds, const std::vector<int>& r,
                                   const SamplingDistribution& encoding_dist, int q);

// Weighted sketch identities: per-draw gradient and Gram equality between
// weighted and unweighted forms, plus Monte Carlo unbiasedness of the
// sketched Hessian toward 2 A^T A.
CheckReport check_weighted_identities(const PartitionedDataset& ds, int n_draws, int q,
                                      std::uint64_t seed);

// Monte Carlo mean of the dense S^T S over many draws approaches I_N.
CheckReport check_expected_sts_identity(const SamplingDistribution& dist, int q, int tau,
                                        int trials, std::uint64_t seed);

// Side-by-side median embedding errors, leverage sketch vs block-SRHT, at
// equal sampling counts. Report only; no hard assertion.
CheckReport check_embedding_vs_srht(const PartitionedDataset& ds, const std::vector<int>& qs,
                                    int trials, std::uint64_t seed);

// Per-iteration gradient error bound of a recorded run, with the implied
// decoding error eps/sqrt(K).
CheckReport check_decoding_error_bound(const SolverRun& run, const PartitionedDataset& ds);

}  // namespace levgc
