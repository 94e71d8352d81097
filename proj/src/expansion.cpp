#include "levgc/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace levgc {

double distortion(const SamplingDistribution& P, const SamplingDistribution& Q) {
    if (P.size() != Q.size()) throw std::invalid_argument("distortion: length mismatch");
    return (P.p - Q.p).cwiseAbs().sum() / P.size();
}

long long round_half_up(double a) {
    return static_cast<long long>(std::floor(a + 0.5));
}

std::vector<int> replication_from_runtime(const SamplingDistribution& P, double phi_T) {
    validate_distribution(P);
    if (!(phi_T > 0.0 && phi_T < 1.0))
        throw std::invalid_argument("replication_from_runtime: phi must lie in (0,1)");
    std::vector<int> r(P.size());
    for (int i = 0; i < P.size(); ++i) {
        if (P.p(i) >= 1.0)
            throw std::invalid_argument("replication_from_runtime: P_i = 1 has no finite rho");
        const double rho = std::log1p(-P.p(i)) / std::log(phi_T);
        r[i] = static_cast<int>(std::max(1LL, round_half_up(rho)));
    }
    return r;
}

double rounding_bound(const SamplingDistribution& P, double phi_T,
                      const std::vector<int>& r_hat) {
    validate_distribution(P);
    if (!(phi_T > 0.0 && phi_T < 1.0))
        throw std::invalid_argument("rounding_bound: phi must lie in (0,1)");
    if (static_cast<int>(r_hat.size()) != P.size())
        throw std::invalid_argument("rounding_bound: length mismatch");
    double sum = 0.0;
    for (int i = 0; i < P.size(); ++i) {
        if (P.p(i) >= 1.0)
            throw std::invalid_argument("rounding_bound: P_i = 1 has no finite rho");
        const double rho = std::log1p(-P.p(i)) / std::log(phi_T);
        sum += std::pow(phi_T, std::min(static_cast<double>(r_hat[i]), rho));
    }
    return (1.0 - std::sqrt(phi_T)) * sum;
}

double delta_distortion(const SamplingDistribution& P, double phi_T,
                        const std::vector<int>& r) {
    validate_distribution(P);
    if (!(phi_T > 0.0 && phi_T < 1.0))
        throw std::invalid_argument("delta_distortion: phi must lie in (0,1)");
    if (static_cast<int>(r.size()) != P.size())
        throw std::invalid_argument("delta_distortion: length mismatch");
    double sum = 0.0;
    for (int i = 0; i < P.size(); ++i)
        sum += std::abs(P.p(i) - (1.0 - std::pow(phi_T, r[i])));
    return sum / P.size();
}

std::pair<long long, std::vector<long long>> perfect_replication(
    const std::vector<Rational>& P) {
    if (P.empty()) throw std::invalid_argument("perfect_replication: empty input");
    std::vector<Rational> red(P.size());
    for (size_t i = 0; i < P.size(); ++i) {
        if (P[i].den <= 0 || P[i].num < 0)
            throw std::invalid_argument("perfect_replication: probabilities must be >= 0");
        const long long g = std::gcd(P[i].num, P[i].den);
        red[i] = {g ? P[i].num / g : 0, g ? P[i].den / g : 1};
    }
    // Exact sum check in rationals.
    long long R = 1;
    for (const auto& f : red) {
        const long long g = std::gcd(R, f.den);
        const long long next = R / g;
        if (f.den > 0 && next > (1LL << 62) / f.den)
            throw std::overflow_error("perfect_replication: lcm overflow");
        R = next * f.den;
    }
    long long total = 0;
    std::vector<long long> r(P.size());
    for (size_t i = 0; i < P.size(); ++i) {
        r[i] = (R / red[i].den) * red[i].num;
        total += r[i];
    }
    if (total != R)
        throw std::invalid_argument("perfect_replication: probabilities do not sum to 1");
    return {R, r};
}

std::vector<int> fit_to_m(const SamplingDistribution& P, const std::vector<int>& r_tilde,
                          int m) {
    validate_distribution(P);
    const int K = P.size();
    if (static_cast<int>(r_tilde.size()) != K)
        throw std::invalid_argument("fit_to_m: length mismatch");
    if (m < K) throw std::invalid_argument("fit_to_m: need m >= K servers");
    for (int ri : r_tilde)
        if (ri < 1) throw std::invalid_argument("fit_to_m: replication counts must be >= 1");

    std::vector<int> r = r_tilde;
    long long R = std::accumulate(r.begin(), r.end(), 0LL);
    std::vector<double> d(K);
    for (int i = 0; i < K; ++i) d[i] = P.p(i) - static_cast<double>(r[i]) / m;
    int chi = 1;
    if (R < m) {
        chi = 0;
        for (auto& v : d) v = -v;
    }
    const double sign = (chi == 1) ? -1.0 : 1.0;       // (-1)^chi
    const double flip = (chi == 1) ? 1.0 : -1.0;       // (-1)^(chi+1)
    const double excluded = std::numeric_limits<double>::infinity();

    int j_prev = -1;
    while (R != m) {
        // The exclusion markers can cover every index while R != m; the
        // server-count constraint wins, so clear the stale markers (blocks
        // pinned at r = 1 stay out) and force the next adjustment through.
        if (std::isinf(*std::min_element(d.begin(), d.end()))) {
            for (int i = 0; i < K; ++i)
                if (chi == 0 || r[i] > 1)
                    d[i] = flip * (P.p(i) - static_cast<double>(r[i]) / m);
            j_prev = -1;
        }
        const int j = static_cast<int>(std::min_element(d.begin(), d.end()) - d.begin());
        const bool crosses =
            flip * (P.p(j) - (static_cast<double>(r[j]) + sign) / m) > 0.0;
        const bool hits_floor = (chi == 1 && r[j] == 1);
        if ((crosses && j_prev == j) || hits_floor) {
            d[j] = excluded;
        } else {
            r[j] += static_cast<int>(sign);
            R += static_cast<long long>(sign);
            d[j] = flip * (P.p(j) - static_cast<double>(r[j]) / m);
        }
        j_prev = j;
    }
    return r;
}

ReplicationPlan make_plan(const SamplingDistribution& P, const std::vector<int>& r) {
    const int K = P.size();
    if (static_cast<int>(r.size()) != K)
        throw std::invalid_argument("make_plan: length mismatch");
    ReplicationPlan plan;
    plan.r = r;
    plan.R = static_cast<int>(std::accumulate(r.begin(), r.end(), 0LL));
    for (int ri : r)
        if (ri < 1) throw std::invalid_argument("make_plan: replication counts must be >= 1");
    plan.induced.p = Vector(K);
    for (int i = 0; i < K; ++i) plan.induced.p(i) = static_cast<double>(r[i]) / plan.R;
    plan.induced.kind = DistKind::induced;
    plan.beta = 1.0;
    for (int i = 0; i < K; ++i)
        if (P.p(i) > 0.0) plan.beta = std::min(plan.beta, P.p(i) / plan.induced.p(i));
    plan.additive_eps = (P.p - plan.induced.p).cwiseAbs().maxCoeff();
    return plan;
}

ReplicationPlan design_plan(const SamplingDistribution& P, double phi_T, int m) {
    std::vector<int> r_hat = replication_from_runtime(P, phi_T);
    const long long R_hat = std::accumulate(r_hat.begin(), r_hat.end(), 0LL);
    const long long factor = round_half_up(static_cast<double>(m) / R_hat);
    if (factor >= 2)
        for (auto& ri : r_hat) ri = static_cast<int>(ri * factor);
    std::vector<int> r = fit_to_m(P, r_hat, m);
    return make_plan(P, r);
}

ExpansionNetwork build_network(const ReplicationPlan& plan, int m, int q, int tau) {
    if (plan.R != m) throw std::invalid_argument("build_network: sum of r differs from m");
    if (q < 1 || tau < 1) throw std::invalid_argument("build_network: bad q or tau");
    ExpansionNetwork net;
    net.plan = plan;
    net.q = q;
    net.tau = tau;
    net.assignment.reserve(m);
    const int K = static_cast<int>(plan.r.size());
    for (int i = 0; i < K; ++i)
        for (int c = 0; c < plan.r[i]; ++c) net.assignment.push_back(i);
    net.encoding_scales = Vector(K);
    for (int i = 0; i < K; ++i)
        net.encoding_scales(i) = 1.0 / std::sqrt(q * plan.induced.p(i));
    return net;
}

double optimal_decoding_error(const Matrix& G_I) {
    const Eigen::Index K = G_I.cols();
    if (G_I.rows() == 0 || K == 0)
        throw std::invalid_argument("optimal_decoding_error: empty matrix");
    Eigen::JacobiSVD<Matrix> svd(G_I, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sig = svd.singularValues();
    if (sig.size() == 0 || sig(0) == 0.0)
        throw std::invalid_argument("optimal_decoding_error: rank-0 matrix");
    const double tol = 1e-12 * sig(0);
    Vector inv = Vector::Zero(sig.size());
    for (Eigen::Index i = 0; i < sig.size(); ++i)
        if (sig(i) > tol) inv(i) = 1.0 / sig(i);
    // G^+ G = V diag(sig>0) V^T, the projector onto the row space.
    Matrix P = svd.matrixV() * inv.cwiseProduct(sig).asDiagonal() * svd.matrixV().transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Matrix::Identity(K, K) - P,
                                              Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace levgc
