#include "levgc/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace levgc {

namespace {

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Inverse-CDF categorical sampler over a prefix-sum array.
struct CategoricalSampler {
    std::vector<double> cdf;

    explicit CategoricalSampler(const Vector& p) {
        cdf.resize(p.size());
        double acc = 0.0;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            acc += p(i);
            cdf[i] = acc;
        }
        cdf.back() = 1.0;
    }

    int operator()(std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double u = unif(rng);
        return static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    }
};

}  // namespace

SketchDraw draw_sketch(const SamplingDistribution& dist, int q,
                       const PartitionedDataset& ds, std::mt19937_64& rng) {
    validate_distribution(dist);
    if (dist.size() != ds.K)
        throw std::invalid_argument("draw_sketch: distribution length != K");
    if (q < 1) throw std::invalid_argument("draw_sketch: q must be positive");
    if (static_cast<long>(q) * ds.tau <= ds.cols())
        throw std::invalid_argument("draw_sketch: q*tau <= d, embedding impossible");
    for (int i = 0; i < ds.K; ++i)
        if (dist.p(i) == 0.0 && ds.block(i).squaredNorm() > 0.0)
            throw std::invalid_argument(
                "draw_sketch: zero sampling probability on a nonzero block");

    CategoricalSampler sampler(dist.p);
    SketchDraw s;
    s.q = q;
    s.source = dist;
    s.sampled.resize(q);
    s.scales.resize(q);
    for (int j = 0; j < q; ++j) {
        const int i = sampler(rng);
        s.sampled[j] = i;
        s.scales[j] = 1.0 / std::sqrt(q * dist.p(i));
    }
    return s;
}

std::pair<Matrix, Vector> apply_sketch(const SketchDraw& s, const PartitionedDataset& ds) {
    Matrix A_hat(static_cast<Eigen::Index>(s.q) * ds.tau, ds.cols());
    Vector b_hat(static_cast<Eigen::Index>(s.q) * ds.tau);
    for (int j = 0; j < s.q; ++j) {
        const int i = s.sampled[j];
        A_hat.middleRows(static_cast<Eigen::Index>(j) * ds.tau, ds.tau) =
            s.scales[j] * ds.block(i);
        b_hat.segment(static_cast<Eigen::Index>(j) * ds.tau, ds.tau) =
            s.scales[j] * ds.block_b(i);
    }
    return {std::move(A_hat), std::move(b_hat)};
}

std::pair<Matrix, Vector> apply_sketch(const WeightedSketchDraw& s,
                                       const PartitionedDataset& ds) {
    const int qb = s.q_bar();
    Matrix A_hat(static_cast<Eigen::Index>(qb) * ds.tau, ds.cols());
    Vector b_hat(static_cast<Eigen::Index>(qb) * ds.tau);
    for (int j = 0; j < qb; ++j) {
        const int i = s.distinct[j];
        A_hat.middleRows(static_cast<Eigen::Index>(j) * ds.tau, ds.tau) =
            s.scales[j] * ds.block(i);
        b_hat.segment(static_cast<Eigen::Index>(j) * ds.tau, ds.tau) =
            s.scales[j] * ds.block_b(i);
    }
    return {std::move(A_hat), std::move(b_hat)};
}

WeightedSketchDraw weighted_collapse(const SketchDraw& s) {
    std::map<int, int> counts;
    for (int i : s.sampled) counts[i]++;
    WeightedSketchDraw w;
    w.q = s.q;
    for (const auto& [idx, cnt] : counts) {
        w.distinct.push_back(idx);
        w.weights.push_back(cnt);
        w.scales.push_back(std::sqrt(cnt / (s.q * s.source.p(idx))));
    }
    return w;
}

Matrix sketch_gram(const SketchDraw& s, const PartitionedDataset& ds) {
    Matrix G = Matrix::Zero(ds.cols(), ds.cols());
    for (int j = 0; j < s.q; ++j) {
        const auto blk = ds.block(s.sampled[j]);
        G.noalias() += (s.scales[j] * s.scales[j]) * (blk.transpose() * blk);
    }
    return G;
}

Matrix sketch_gram(const WeightedSketchDraw& s, const PartitionedDataset& ds) {
    Matrix G = Matrix::Zero(ds.cols(), ds.cols());
    for (int j = 0; j < s.q_bar(); ++j) {
        const auto blk = ds.block(s.distinct[j]);
        G.noalias() += (s.scales[j] * s.scales[j]) * (blk.transpose() * blk);
    }
    return G;
}

Vector sketch_gradient(const SketchDraw& s, const PartitionedDataset& ds, const Vector& x) {
    Vector g = Vector::Zero(ds.cols());
    for (int j = 0; j < s.q; ++j) {
        const int i = s.sampled[j];
        const auto blk = ds.block(i);
        g.noalias() += (2.0 * s.scales[j] * s.scales[j]) *
                       (blk.transpose() * (blk * x - ds.block_b(i)));
    }
    return g;
}

Vector sketch_gradient(const WeightedSketchDraw& s, const PartitionedDataset& ds,
                       const Vector& x) {
    Vector g = Vector::Zero(ds.cols());
    for (int j = 0; j < s.q_bar(); ++j) {
        const int i = s.distinct[j];
        const auto blk = ds.block(i);
        g.noalias() += (2.0 * s.scales[j] * s.scales[j]) *
                       (blk.transpose() * (blk * x - ds.block_b(i)));
    }
    return g;
}

std::vector<Matrix> block_grams(const Matrix& U, int K, int tau) {
    std::vector<Matrix> grams;
    grams.reserve(K);
    for (int i = 0; i < K; ++i) {
        const auto blk = U.middleRows(static_cast<Eigen::Index>(i) * tau, tau);
        grams.push_back(blk.transpose() * blk);
    }
    return grams;
}

double embedding_error_pregram(const SketchDraw& s, const std::vector<Matrix>& grams) {
    const Eigen::Index d = grams.front().rows();
    Matrix dev = Matrix::Identity(d, d);
    for (int j = 0; j < s.q; ++j)
        dev.noalias() -= (s.scales[j] * s.scales[j]) * grams[s.sampled[j]];
    Eigen::SelfAdjointEigenSolver<Matrix> eig(dev, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double embedding_error(const SketchDraw& s, const OrthonormalBasis& basis,
                       const PartitionedDataset& ds) {
    if (basis.U.rows() != ds.rows())
        throw std::invalid_argument("embedding_error: basis/dataset mismatch");
    const Eigen::Index d = basis.U.cols();
    Matrix dev = Matrix::Identity(d, d);
    for (int j = 0; j < s.q; ++j) {
        const auto blk = basis.U.middleRows(
            static_cast<Eigen::Index>(s.sampled[j]) * ds.tau, ds.tau);
        dev.noalias() -= (s.scales[j] * s.scales[j]) * (blk.transpose() * blk);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(dev, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double expected_distinct(const SamplingDistribution& dist, int q) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < dist.p.size(); ++i)
        sum += std::pow(1.0 - dist.p(i), q);
    return dist.p.size() - sum;
}

double measured_beta(const SamplingDistribution& exact,
                     const SamplingDistribution& approx) {
    if (exact.size() != approx.size())
        throw std::invalid_argument("measured_beta: length mismatch");
    double beta = 1.0;
    for (int i = 0; i < exact.size(); ++i) {
        if (exact.p(i) <= 0.0) continue;
        if (approx.p(i) <= 0.0) return 0.0;
        beta = std::min(beta, exact.p(i) / approx.p(i));
    }
    return beta;
}

SamplingDistribution perturb_distribution(const SamplingDistribution& dist,
                                          double beta_target, std::mt19937_64& rng) {
    validate_distribution(dist);
    if (!(beta_target > 0.0 && beta_target <= 1.0))
        throw std::invalid_argument("perturb_distribution: beta_target outside (0,1]");
    if (beta_target == 1.0) return dist;

    // Deflate a random half of the probability mass by beta and renormalize.
    // Smooth i.i.d. jitter is variance-neutral after renormalization, so the
    // binary mass split is the multiplicative perturbation that degrades
    // sampling the most within the envelope. With all multipliers <= 1 and
    // Z = sum(p*m) >= beta, the measured factor min_i p_i/p~_i = Z / max m_i
    // stays >= beta_target.
    const int K = dist.size();
    std::vector<int> order(K);
    for (int i = 0; i < K; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    SamplingDistribution out;
    out.p = dist.p;
    double mass = 0.0;
    int deflated = 0;
    for (int idx : order) {
        if (mass >= 0.5 || deflated + 1 == K) break;  // keep one block intact
        mass += dist.p(idx);
        out.p(idx) *= beta_target;
        ++deflated;
    }
    out.p /= out.p.sum();
    out.kind = DistKind::approximate;
    return out;
}

Matrix gaussian_sketch(int r, int N, std::mt19937_64& rng) {
    if (r < 1 || N < 1) throw std::invalid_argument("gaussian_sketch: bad shape");
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(r));
    Matrix S(r, N);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < N; ++j) S(i, j) = scale * gauss(rng);
    return S;
}

void fwht_inplace(Vector& v) {
    const Eigen::Index n = v.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fwht_inplace: length must be a power of two");
    for (Eigen::Index h = 1; h < n; h <<= 1) {
        for (Eigen::Index i = 0; i < n; i += h << 1) {
            for (Eigen::Index j = i; j < i + h; ++j) {
                const double a = v(j);
                const double b = v(j + h);
                v(j) = a + b;
                v(j + h) = a - b;
            }
        }
    }
}

BlockSrhtSketch draw_block_srht(int N, int K, int q, std::mt19937_64& rng) {
    if (N < 1 || K < 1 || q < 1) throw std::invalid_argument("draw_block_srht: bad inputs");
    BlockSrhtSketch s;
    s.n_pad = next_pow2(N);
    s.K_pad = std::min(next_pow2(K), s.n_pad);
    s.tau_pad = s.n_pad / s.K_pad;
    s.q = q;
    s.signs = Vector(s.n_pad);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int i = 0; i < s.n_pad; ++i) s.signs(i) = coin(rng) ? 1.0 : -1.0;
    std::uniform_int_distribution<int> block(0, s.K_pad - 1);
    s.sampled.resize(q);
    for (int j = 0; j < q; ++j) s.sampled[j] = block(rng);
    return s;
}

Matrix apply_block_srht(const BlockSrhtSketch& s, const Matrix& M) {
    if (M.rows() > s.n_pad)
        throw std::invalid_argument("apply_block_srht: more rows than padded length");
    Matrix H(s.n_pad, M.cols());
    const double hnorm = 1.0 / std::sqrt(static_cast<double>(s.n_pad));
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
        Vector col = Vector::Zero(s.n_pad);
        col.head(M.rows()) = M.col(c);
        col.array() *= s.signs.array();
        fwht_inplace(col);
        H.col(c) = hnorm * col;
    }
    const double scale = std::sqrt(static_cast<double>(s.K_pad) / s.q);
    Matrix out(static_cast<Eigen::Index>(s.q) * s.tau_pad, M.cols());
    for (int j = 0; j < s.q; ++j)
        out.middleRows(static_cast<Eigen::Index>(j) * s.tau_pad, s.tau_pad) =
            scale * H.middleRows(static_cast<Eigen::Index>(s.sampled[j]) * s.tau_pad,
                                 s.tau_pad);
    return out;
}

Vector apply_block_srht(const BlockSrhtSketch& s, const Vector& v) {
    Matrix M = apply_block_srht(s, Matrix(v));
    return Vector(M.col(0));
}

}  // namespace levgc
