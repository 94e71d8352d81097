#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <utility>

namespace levgc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A row-partitioned least squares instance. The matrix is zero-padded so
/// that all K blocks have exactly tau rows; padded rows carry no leverage.
struct PartitionedDataset {
    Matrix A;     // N x d after padding, N = K * tau
    Vector b;     // length N
    int K = 0;    // number of row blocks
    int tau = 0;  // rows per block

    Eigen::Index rows() const { return A.rows(); }
    Eigen::Index cols() const { return A.cols(); }

    // Half-open row range [start, start + tau) of block i.
    std::pair<int, int> block_range(int i) const { return {i * tau, tau}; }

    auto block(int i) const { return A.middleRows(static_cast<Eigen::Index>(i) * tau, tau); }
    auto block_b(int i) const { return b.segment(static_cast<Eigen::Index>(i) * tau, tau); }
};

enum class DistKind { exact, approximate, induced };

/// K nonnegative block sampling probabilities summing to one.
struct SamplingDistribution {
    Vector p;
    DistKind kind = DistKind::exact;

    int size() const { return static_cast<int>(p.size()); }
};

// Throws std::invalid_argument unless p >= 0 and |sum(p) - 1| <= 1e-12.
void validate_distribution(const SamplingDistribution& dist);

enum class BasisProvenance { svd, qr };

struct OrthonormalBasis {
    Matrix U;  // N x d, orthonormal columns spanning col(A)
    BasisProvenance provenance = BasisProvenance::svd;
};

PartitionedDataset partition(const Matrix& A_raw, const Vector& b_raw, int K);

// Reduced left orthonormal basis of A. Throws on rank deficiency
// (sigma_min < 1e-10 * sigma_max).
OrthonormalBasis orthonormal_basis(const PartitionedDataset& ds);

// pi_i = ||U_(i)||^2 / d, a probability distribution over rows.
Vector row_leverage_scores(const OrthonormalBasis& basis);

// Pi_l = ||U_(block l)||_F^2 / d, summed row scores per block.
SamplingDistribution block_leverage_scores(const OrthonormalBasis& basis,
                                           const PartitionedDataset& ds);

// Unnormalized squared Frobenius norm of each block of M.
Vector frobenius_block_scores(const Matrix& M, const PartitionedDataset& ds);

// x* = argmin ||Ax - b||^2 via column-pivoted QR; throws on rank deficiency.
Vector exact_solution(const PartitionedDataset& ds);

/// Synthetic instance: A has i.i.d. Student-t(dof) entries, b = A x_true +
/// noise_sigma * gaussian noise. Deterministic given the seed.
std::pair<Matrix, Vector> generate_regression_instance(int N, int d, double dof,
                                                       double noise_sigma,
                                                       std::uint64_t seed);

// Largest singular value by power iteration on A^T A (tol 1e-10, <= 1e4 iters).
double sigma_max(const Matrix& A);

}  // namespace levgc
