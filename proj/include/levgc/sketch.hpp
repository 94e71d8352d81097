#pragma once

#include <random>
#include <utility>
#include <vector>

#include "levgc/linalg.hpp"

namespace levgc {

/// A block leverage score sketch, stored as q sampled block indices with
/// rescale factors 1/sqrt(q * p_i). The r x N matrix is never materialized.
struct SketchDraw {
    std::vector<int> sampled;    // q block indices, with repetition
    std::vector<double> scales;  // per-trial rescale factors
    int q = 0;
    SamplingDistribution source;
};

/// Duplicate-collapsed sketch: each distinct block carries an integer
/// multiplicity weight and scale sqrt(w_j / (q * p_j)).
struct WeightedSketchDraw {
    std::vector<int> distinct;   // sorted distinct block indices, size q_bar
    std::vector<int> weights;    // multiplicities, sum = q
    std::vector<double> scales;
    int q = 0;

    int q_bar() const { return static_cast<int>(distinct.size()); }
    double compression_ratio() const {
        return static_cast<double>(q) / static_cast<double>(q_bar());
    }
};

// q i.i.d. categorical draws from dist via inverse CDF. Requires
// q * tau > d; a zero-probability block with nonzero data is rejected.
SketchDraw draw_sketch(const SamplingDistribution& dist, int q,
                       const PartitionedDataset& ds, std::mt19937_64& rng);

// (A_hat, b_hat): stacked scaled blocks, q*tau x d.
std::pair<Matrix, Vector> apply_sketch(const SketchDraw& s, const PartitionedDataset& ds);
std::pair<Matrix, Vector> apply_sketch(const WeightedSketchDraw& s,
                                       const PartitionedDataset& ds);

WeightedSketchDraw weighted_collapse(const SketchDraw& s);

// A^T S^T S A, accumulated blockwise.
Matrix sketch_gram(const SketchDraw& s, const PartitionedDataset& ds);
Matrix sketch_gram(const WeightedSketchDraw& s, const PartitionedDataset& ds);

// 2 A^T S^T S (A x - b), accumulated blockwise.
Vector sketch_gradient(const SketchDraw& s, const PartitionedDataset& ds, const Vector& x);
Vector sketch_gradient(const WeightedSketchDraw& s, const PartitionedDataset& ds,
                       const Vector& x);

// || I_d - U^T S^T S U ||_2 via symmetric eigendecomposition of the d x d
// deviation matrix.
double embedding_error(const SketchDraw& s, const OrthonormalBasis& basis,
                       const PartitionedDataset& ds);

// Same, but with the per-block Grams U_i^T U_i precomputed (for tight loops).
double embedding_error_pregram(const SketchDraw& s, const std::vector<Matrix>& block_grams);

std::vector<Matrix> block_grams(const Matrix& U, int K, int tau);

// K - sum_i (1 - p_i)^q: expected number of distinct sampled blocks.
double expected_distinct(const SamplingDistribution& dist, int q);

// Multiplicative perturbation + renormalization with measured misestimation
// min_i p_i / p~_i >= beta_target. beta_target = 1 returns dist unchanged.
SamplingDistribution perturb_distribution(const SamplingDistribution& dist,
                                          double beta_target, std::mt19937_64& rng);

// min over i with p_i > 0 of p_i / q_i (the misestimation factor).
double measured_beta(const SamplingDistribution& exact, const SamplingDistribution& approx);

// Dense r x N Gaussian sketch, entries N(0,1)/sqrt(r).
Matrix gaussian_sketch(int r, int N, std::mt19937_64& rng);

// In-place unnormalized fast Walsh-Hadamard transform; length must be a
// power of two. Applying it twice multiplies by the length.
void fwht_inplace(Vector& v);

/// Block subsampled randomized Hadamard transform. The input is zero-padded
/// to n_pad rows (next power of two), sign-flipped, transformed, and q blocks
/// of tau_pad rows are sampled uniformly with scale sqrt(K_pad / q).
struct BlockSrhtSketch {
    Vector signs;             // +-1, length n_pad
    std::vector<int> sampled; // q block indices over the padded block grid
    int n_pad = 0;
    int K_pad = 0;
    int tau_pad = 0;
    int q = 0;
};

BlockSrhtSketch draw_block_srht(int N, int K, int q, std::mt19937_64& rng);
Matrix apply_block_srht(const BlockSrhtSketch& s, const Matrix& M);
Vector apply_block_srht(const BlockSrhtSketch& s, const Vector& v);

}  // namespace levgc
