#include "levgc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "levgc/io.hpp"
#include "levgc/rng.hpp"

namespace levgc {

Vector gradient(const PartitionedDataset& ds, const Vector& x) {
    return 2.0 * (ds.A.transpose() * (ds.A * x - ds.b));
}

Vector partial_gradient(const PartitionedDataset& ds, int i, const Vector& x) {
    const auto blk = ds.block(i);
    return 2.0 * (blk.transpose() * (blk * x - ds.block_b(i)));
}

Vector encoded_partial_gradient(const ExpansionNetwork& net, const PartitionedDataset& ds,
                                int i, const Vector& x, int q) {
    const double p = net.plan.induced.p(i);
    if (p <= 0.0)
        throw std::invalid_argument("encoded_partial_gradient: block has zero probability");
    return partial_gradient(ds, i, x) / (q * p);
}

Vector aggregate(const RoundOutcome& outcome, const PartitionedDataset& ds,
                 const ExpansionNetwork& net, const Vector& x) {
    const int q_eff = static_cast<int>(outcome.responders.size());
    if (q_eff == 0) throw std::runtime_error("aggregate: empty responder set");
    Vector g = Vector::Zero(ds.cols());
    for (int i : outcome.responders) g += encoded_partial_gradient(net, ds, i, x, q_eff);
    return g;
}

SketchDraw induced_draw(const RoundOutcome& outcome, const ExpansionNetwork& net) {
    const int q_eff = static_cast<int>(outcome.responders.size());
    if (q_eff == 0) throw std::runtime_error("induced_draw: empty responder set");
    SketchDraw s;
    s.q = q_eff;
    s.source = net.plan.induced;
    s.sampled = outcome.responders;
    s.scales.resize(q_eff);
    for (int j = 0; j < q_eff; ++j)
        s.scales[j] = 1.0 / std::sqrt(q_eff * net.plan.induced.p(s.sampled[j]));
    return s;
}

double optimal_step(const PartitionedDataset& ds, const Vector& g, const Vector& x) {
    if (g.norm() == 0.0) return 0.0;
    const Vector Ag = ds.A * g;
    const double denom = Ag.squaredNorm();
    if (denom == 0.0) return 0.0;
    return Ag.dot(ds.A * x - ds.b) / denom;
}

double log_residual(const Vector& x_hat, const Vector& x_star, Eigen::Index N) {
    const double v = (x_star - x_hat).norm() / std::sqrt(static_cast<double>(N));
    return std::max(std::log10(std::max(v, 0.0)), -16.0);
}

std::vector<double> residual_metric(const SolverRun& run, const Vector& x_star) {
    std::vector<double> out;
    out.reserve(run.iterates.size());
    for (const auto& x : run.iterates) out.push_back(log_residual(x, x_star, run.n_rows));
    return out;
}

namespace {

double step_size(const StepPolicy& policy, int s_one_based, double sig_max,
                 const PartitionedDataset& ds, const Vector& g, const Vector& x) {
    switch (policy.kind) {
        case StepPolicy::Kind::fixed:
            return policy.value;
        case StepPolicy::Kind::conservative:
            return 2.0 / (sig_max * sig_max);
        case StepPolicy::Kind::optimal:
            return optimal_step(ds, g, x);
        case StepPolicy::Kind::diminishing:
            return 1.0 / (policy.value * s_one_based);
    }
    return policy.value;
}

// Orthonormal columns spanning col([A b]): U plus the normalized residual
// direction when b leaves the column space. Gradient-error bounds measured
// here hold deterministically for row sketches.
Matrix augmented_basis(const PartitionedDataset& ds, const Matrix& U,
                       const Vector& x_star) {
    const Vector b_perp = ds.b - ds.A * x_star;
    const double norm = b_perp.norm();
    if (norm <= 1e-12 * std::max(1.0, ds.b.norm())) return U;
    Matrix Ubar(U.rows(), U.cols() + 1);
    Ubar.leftCols(U.cols()) = U;
    Ubar.col(U.cols()) = b_perp / norm;
    return Ubar;
}

struct Telemetry {
    double sig_max = 0.0;
    std::vector<Matrix> aug_grams;  // per-block Ubar_i^T Ubar_i
};

void fill_record(IterationRecord& rec, const PartitionedDataset& ds, const Vector& x_prev,
                 const Vector& g_hat, const SketchDraw& draw, const Telemetry& tel) {
    const Vector g = gradient(ds, x_prev);
    rec.grad_error = (g - g_hat).norm();
    rec.eps_meas = embedding_error_pregram(draw, tel.aug_grams);
    rec.grad_error_bound =
        2.0 * rec.eps_meas * tel.sig_max * (ds.A * x_prev - ds.b).norm();
}

}  // namespace

SolverRun solve(const PartitionedDataset& ds, const ExpansionNetwork& net,
                const RuntimeModel& model, const SolveOptions& opts) {
    if (opts.iterations < 1) throw std::invalid_argument("solve: need iterations >= 1");
    if (net.tau != ds.tau)
        throw std::invalid_argument("solve: network and dataset disagree on tau");

    SolverRun run;
    run.seed = opts.seed;
    run.x_star = exact_solution(ds);
    run.n_rows = ds.rows();
    auto rng = make_rng(opts.seed);

    Telemetry tel;
    tel.sig_max = sigma_max(ds.A);
    if (opts.telemetry) {
        const OrthonormalBasis basis = orthonormal_basis(ds);
        const Matrix Ubar = augmented_basis(ds, basis.U, run.x_star);
        tel.aug_grams = block_grams(Ubar, ds.K, ds.tau);
    }

    Vector x = opts.x0.size() ? opts.x0 : Vector::Zero(ds.cols());
    run.iterates.push_back(x);
    for (int s = 1; s <= opts.iterations; ++s) {
        const RoundOutcome outcome = simulate_round(net, model, opts.response, rng);
        const Vector g_hat = aggregate(outcome, ds, net, x);
        const double xi = step_size(opts.policy, s, tel.sig_max, ds, g_hat, x);

        IterationRecord rec;
        rec.iter = s;
        rec.step = xi;
        rec.q_responded = static_cast<int>(outcome.responders.size());
        rec.responders = outcome.responders;
        if (opts.telemetry)
            fill_record(rec, ds, x, g_hat, induced_draw(outcome, net), tel);

        x -= xi * g_hat;
        rec.log10_residual = log_residual(x, run.x_star, ds.rows());
        rec.objective = (ds.A * x - ds.b).squaredNorm();
        run.iterates.push_back(x);
        run.records.push_back(std::move(rec));
    }
    return run;
}

SolverRun solve_exact_sd(const PartitionedDataset& ds, const StepPolicy& policy,
                         int iterations, const Vector& x0) {
    if (iterations < 1) throw std::invalid_argument("solve_exact_sd: need iterations >= 1");
    SolverRun run;
    run.x_star = exact_solution(ds);
    run.n_rows = ds.rows();
    const double sig = sigma_max(ds.A);
    Vector x = x0.size() ? x0 : Vector::Zero(ds.cols());
    run.iterates.push_back(x);
    for (int s = 1; s <= iterations; ++s) {
        const Vector g = gradient(ds, x);
        const double xi = step_size(policy, s, sig, ds, g, x);
        IterationRecord rec;
        rec.iter = s;
        rec.step = xi;
        rec.q_responded = ds.K;
        x -= xi * g;
        rec.log10_residual = log_residual(x, run.x_star, ds.rows());
        rec.objective = (ds.A * x - ds.b).squaredNorm();
        run.iterates.push_back(x);
        run.records.push_back(std::move(rec));
    }
    return run;
}

SolverRun solve_iterative_sketch(const PartitionedDataset& ds, SketchKind kind, int q,
                                 const StepPolicy& policy, int iterations,
                                 std::uint64_t seed, const Vector& x0) {
    if (kind == SketchKind::none) return solve_exact_sd(ds, policy, iterations, x0);
    if (iterations < 1)
        throw std::invalid_argument("solve_iterative_sketch: need iterations >= 1");

    SolverRun run;
    run.seed = seed;
    run.x_star = exact_solution(ds);
    run.n_rows = ds.rows();
    auto rng = make_rng(seed);
    const double sig = sigma_max(ds.A);
    const int N = static_cast<int>(ds.rows());

    SamplingDistribution scores;
    if (kind == SketchKind::block_lvg)
        scores = block_leverage_scores(orthonormal_basis(ds), ds);

    Vector x = x0.size() ? x0 : Vector::Zero(ds.cols());
    run.iterates.push_back(x);
    for (int s = 1; s <= iterations; ++s) {
        Vector g_hat;
        int q_resp = q;
        if (kind == SketchKind::block_lvg) {
            const SketchDraw draw = draw_sketch(scores, q, ds, rng);
            g_hat = sketch_gradient(draw, ds, x);
        } else if (kind == SketchKind::gaussian) {
            const Matrix S = gaussian_sketch(q * ds.tau, N, rng);
            const Vector res = ds.A * x - ds.b;
            g_hat = 2.0 * (ds.A.transpose() * (S.transpose() * (S * res)));
        } else {  // block_srht
            const BlockSrhtSketch srht = draw_block_srht(N, ds.K, q, rng);
            const Matrix A_hat = apply_block_srht(srht, ds.A);
            const Vector b_hat = apply_block_srht(srht, ds.b);
            g_hat = 2.0 * (A_hat.transpose() * (A_hat * x - b_hat));
        }
        const double xi = step_size(policy, s, sig, ds, g_hat, x);
        IterationRecord rec;
        rec.iter = s;
        rec.step = xi;
        rec.q_responded = q_resp;
        x -= xi * g_hat;
        rec.log10_residual = log_residual(x, run.x_star, ds.rows());
        rec.objective = (ds.A * x - ds.b).squaredNorm();
        run.iterates.push_back(x);
        run.records.push_back(std::move(rec));
    }
    return run;
}

std::pair<Matrix, Vector> expanded_dataset(const ExpansionNetwork& net,
                                           const PartitionedDataset& ds) {
    const int m = net.servers();
    Matrix Psi(static_cast<Eigen::Index>(m) * ds.tau, ds.cols());
    Vector psi(static_cast<Eigen::Index>(m) * ds.tau);
    for (int j = 0; j < m; ++j) {
        const int i = net.assignment[j];
        const double g = net.encoding_scales(i);
        Psi.middleRows(static_cast<Eigen::Index>(j) * ds.tau, ds.tau) = g * ds.block(i);
        psi.segment(static_cast<Eigen::Index>(j) * ds.tau, ds.tau) = g * ds.block_b(i);
    }
    return {std::move(Psi), std::move(psi)};
}

SolverRun solve_reference_ssd(const Matrix& Psi, const Vector& psi, int tau,
                              const StepPolicy& policy, int iterations, int q,
                              std::uint64_t seed, const Vector& x0) {
    const int m = static_cast<int>(Psi.rows() / tau);
    if (m < 1 || Psi.rows() != static_cast<Eigen::Index>(m) * tau)
        throw std::invalid_argument("solve_reference_ssd: tau does not divide rows");
    if (q < 1 || q > m) throw std::invalid_argument("solve_reference_ssd: q outside [1, m]");

    SolverRun run;
    run.seed = seed;
    Eigen::BDCSVD<Matrix> svd(Psi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    run.x_star = svd.solve(psi);
    run.n_rows = Psi.rows();
    auto rng = make_rng(seed);
    const double sig = sigma_max(Psi);

    std::vector<int> servers(m);
    std::iota(servers.begin(), servers.end(), 0);

    Vector x = x0.size() ? x0 : Vector::Zero(Psi.cols());
    run.iterates.push_back(x);
    PartitionedDataset dummy;  // only the step_size(optimal) path needs data
    dummy.A = Psi;
    dummy.b = psi;
    dummy.K = m;
    dummy.tau = tau;
    for (int s = 1; s <= iterations; ++s) {
        // Uniform q-subset of servers, Fisher-Yates prefix.
        for (int j = 0; j < q; ++j) {
            std::uniform_int_distribution<int> pick(j, m - 1);
            std::swap(servers[j], servers[pick(rng)]);
        }
        Vector g_hat = Vector::Zero(Psi.cols());
        for (int j = 0; j < q; ++j) {
            const auto blk = Psi.middleRows(static_cast<Eigen::Index>(servers[j]) * tau, tau);
            g_hat.noalias() +=
                2.0 * (blk.transpose() *
                       (blk * x - psi.segment(static_cast<Eigen::Index>(servers[j]) * tau, tau)));
        }
        const double xi = step_size(policy, s, sig, dummy, g_hat, x);
        IterationRecord rec;
        rec.iter = s;
        rec.step = xi;
        rec.q_responded = q;
        x -= xi * g_hat;
        rec.log10_residual = log_residual(x, run.x_star, Psi.rows());
        rec.objective = (Psi * x - psi).squaredNorm();
        run.iterates.push_back(x);
        run.records.push_back(std::move(rec));
        std::sort(servers.begin(), servers.end());
    }
    return run;
}

void write_run_csv(const std::string& path, const SolverRun& run,
                   const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    if (!header_comment.empty()) out << "# " << header_comment << '\n';
    out << "iter,step_size,q_responded,log10_residual,objective,"
           "grad_error_bound_lhs,grad_error_bound_rhs\n";
    for (const auto& rec : run.records) {
        out << rec.iter << ',' << format_double(rec.step) << ',' << rec.q_responded << ','
            << format_double(rec.log10_residual) << ',' << format_double(rec.objective)
            << ',' << format_double(rec.grad_error) << ','
            << format_double(rec.grad_error_bound) << '\n';
    }
}

}  // namespace levgc
