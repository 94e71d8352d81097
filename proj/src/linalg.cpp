#include "levgc/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "levgc/rng.hpp"

namespace levgc {

void validate_distribution(const SamplingDistribution& dist) {
    if (dist.p.size() == 0) throw std::invalid_argument("distribution is empty");
    if ((dist.p.array() < 0.0).any())
        throw std::invalid_argument("distribution has a negative entry");
    if (std::abs(dist.p.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("distribution does not sum to one");
}

PartitionedDataset partition(const Matrix& A_raw, const Vector& b_raw, int K) {
    const Eigen::Index n_raw = A_raw.rows();
    if (n_raw < 1) throw std::invalid_argument("partition: matrix has no rows");
    if (b_raw.size() != n_raw)
        throw std::invalid_argument("partition: b length does not match rows of A");
    if (K < 1) throw std::invalid_argument("partition: K must be positive");
    if (K > n_raw)
        throw std::invalid_argument("partition: K exceeds the number of rows");

    const Eigen::Index tau = (n_raw + K - 1) / K;  // smallest tau with K*tau >= n_raw
    const Eigen::Index n = static_cast<Eigen::Index>(K) * tau;
    if (A_raw.cols() >= n)
        throw std::invalid_argument("partition: system is not overdetermined (d >= N)");

    PartitionedDataset ds;
    ds.A = Matrix::Zero(n, A_raw.cols());
    ds.A.topRows(n_raw) = A_raw;
    ds.b = Vector::Zero(n);
    ds.b.head(n_raw) = b_raw;
    ds.K = K;
    ds.tau = static_cast<int>(tau);
    return ds;
}

OrthonormalBasis orthonormal_basis(const PartitionedDataset& ds) {
    Eigen::BDCSVD<Matrix> svd(ds.A, Eigen::ComputeThinU);
    const auto& sig = svd.singularValues();
    if (sig.size() == 0 || sig(sig.size() - 1) < 1e-10 * sig(0))
        throw std::runtime_error("orthonormal_basis: matrix is rank deficient");
    return OrthonormalBasis{svd.matrixU(), BasisProvenance::svd};
}

Vector row_leverage_scores(const OrthonormalBasis& basis) {
    const double d = static_cast<double>(basis.U.cols());
    return basis.U.rowwise().squaredNorm() / d;
}

SamplingDistribution block_leverage_scores(const OrthonormalBasis& basis,
                                           const PartitionedDataset& ds) {
    if (basis.U.rows() != ds.rows())
        throw std::invalid_argument("block_leverage_scores: basis/dataset mismatch");
    const Vector pi = row_leverage_scores(basis);
    SamplingDistribution dist;
    dist.p = Vector(ds.K);
    for (int l = 0; l < ds.K; ++l)
        dist.p(l) = pi.segment(static_cast<Eigen::Index>(l) * ds.tau, ds.tau).sum();
    dist.kind = DistKind::exact;
    return dist;
}

Vector frobenius_block_scores(const Matrix& M, const PartitionedDataset& ds) {
    if (M.rows() != ds.rows())
        throw std::invalid_argument("frobenius_block_scores: row count mismatch");
    Vector s(ds.K);
    for (int l = 0; l < ds.K; ++l)
        s(l) = M.middleRows(static_cast<Eigen::Index>(l) * ds.tau, ds.tau).squaredNorm();
    return s;
}

Vector exact_solution(const PartitionedDataset& ds) {
    Eigen::BDCSVD<Matrix> svd(ds.A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sig = svd.singularValues();
    if (sig.size() == 0 || sig(sig.size() - 1) < 1e-10 * sig(0))
        throw std::runtime_error("exact_solution: matrix is rank deficient");
    return svd.solve(ds.b);
}

std::pair<Matrix, Vector> generate_regression_instance(int N, int d, double dof,
                                                       double noise_sigma,
                                                       std::uint64_t seed) {
    if (N <= d) throw std::invalid_argument("generate_regression_instance: need N > d");
    if (dof <= 0.0)
        throw std::invalid_argument("generate_regression_instance: dof must be positive");

    auto rng = make_rng(seed);
    std::student_t_distribution<double> tdist(dof);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix A(N, d);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = tdist(rng);

    Vector x_true(d);
    for (int j = 0; j < d; ++j) x_true(j) = gauss(rng);

    Vector b = A * x_true;
    if (noise_sigma > 0.0)
        for (int i = 0; i < N; ++i) b(i) += noise_sigma * gauss(rng);
    return {std::move(A), std::move(b)};
}

double sigma_max(const Matrix& A) {
    const Eigen::Index d = A.cols();
    if (d == 0 || A.rows() == 0) return 0.0;
    Vector v = Vector::Ones(d) / std::sqrt(static_cast<double>(d));
    double lambda = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Vector w = A.transpose() * (A * v);
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        w /= norm;
        const double lambda_new = norm;
        if (std::abs(lambda_new - lambda) <= 1e-10 * lambda_new) {
            lambda = lambda_new;
            break;
        }
        lambda = lambda_new;
        v = w;
    }
    return std::sqrt(lambda);
}

}  // namespace levgc
