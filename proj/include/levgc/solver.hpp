#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "levgc/runtime.hpp"
#include "levgc/sketch.hpp"

namespace levgc {

struct StepPolicy {
    enum class Kind { fixed, conservative, optimal, diminishing };
    Kind kind = Kind::fixed;
    double value = 0.0;  // xi for fixed, eta for diminishing

    static StepPolicy fixed_step(double xi) { return {Kind::fixed, xi}; }
    static StepPolicy conservative() { return {Kind::conservative, 0.0}; }
    static StepPolicy optimal() { return {Kind::optimal, 0.0}; }
    static StepPolicy diminishing(double eta) { return {Kind::diminishing, eta}; }
};

struct IterationRecord {
    int iter = 0;  // 1-based
    double step = 0.0;
    int q_responded = 0;
    double log10_residual = 0.0;   // of the updated iterate
    double objective = 0.0;        // ||A x - b||^2 of the updated iterate
    double grad_error = 0.0;       // ||g - g_hat|| at the pre-update point
    double grad_error_bound = 0.0; // 2 * eps * ||A|| * ||Ax - b|| there
    double eps_meas = 0.0;         // embedding error of the round's sketch
    std::vector<int> responders;
};

struct SolverRun {
    std::vector<Vector> iterates;  // x^[0..S]
    std::vector<IterationRecord> records;
    std::uint64_t seed = 0;
    Vector x_star;
    Eigen::Index n_rows = 0;  // N of the instance, for residual normalization
};

// g = 2 A^T (A x - b).
Vector gradient(const PartitionedDataset& ds, const Vector& x);

// g_i = 2 A_i^T (A_i x - b_i).
Vector partial_gradient(const PartitionedDataset& ds, int i, const Vector& x);

// g_i / (q * p_i), the gradient of the G-encoded block.
Vector encoded_partial_gradient(const ExpansionNetwork& net, const PartitionedDataset& ds,
                                int i, const Vector& x, int q);

// Sum of encoded partial gradients over the responder multiset. In deadline
// mode the 1/q rescale uses the realized responder count.
Vector aggregate(const RoundOutcome& outcome, const PartitionedDataset& ds,
                 const ExpansionNetwork& net, const Vector& x);

// The sketch induced by a round: responder blocks with scales 1/sqrt(q p_i).
SketchDraw induced_draw(const RoundOutcome& outcome, const ExpansionNetwork& net);

// Exact line-search step for the quadratic along direction g.
double optimal_step(const PartitionedDataset& ds, const Vector& g, const Vector& x);

// log10(||x_star - x_hat|| / sqrt(N)), floored at -16.
double log_residual(const Vector& x_hat, const Vector& x_star, Eigen::Index N);
std::vector<double> residual_metric(const SolverRun& run, const Vector& x_star);

struct SolveOptions {
    StepPolicy policy;
    int iterations = 0;
    ResponsePolicy response;
    std::uint64_t seed = 0;
    Vector x0;               // empty = zeros
    bool telemetry = true;   // per-round embedding error and gradient bound
};

// Iterative sketched steepest descent over the simulated network.
SolverRun solve(const PartitionedDataset& ds, const ExpansionNetwork& net,
                const RuntimeModel& model, const SolveOptions& opts);

// Deterministic full-gradient descent (no sketching).
SolverRun solve_exact_sd(const PartitionedDataset& ds, const StepPolicy& policy,
                         int iterations, const Vector& x0 = Vector());

enum class SketchKind { block_lvg, gaussian, block_srht, none };

// Iterative sketching without the network: a fresh sketch every iteration.
SolverRun solve_iterative_sketch(const PartitionedDataset& ds, SketchKind kind, int q,
                                 const StepPolicy& policy, int iterations,
                                 std::uint64_t seed, const Vector& x0 = Vector());

// (Psi, psi) = expanded encoded data, one tau-row block per server.
std::pair<Matrix, Vector> expanded_dataset(const ExpansionNetwork& net,
                                           const PartitionedDataset& ds);

// Batch stochastic descent on the expanded pair: each step sums the encoded
// block gradients of a uniformly drawn q-subset of servers.
SolverRun solve_reference_ssd(const Matrix& Psi, const Vector& psi, int tau,
                              const StepPolicy& policy, int iterations, int q,
                              std::uint64_t seed, const Vector& x0 = Vector());

// CSV with columns iter, step_size, q_responded, log10_residual, objective,
// grad_error_bound_lhs, grad_error_bound_rhs. header_comment lines are
// prefixed with '#'.
void write_run_csv(const std::string& path, const SolverRun& run,
                   const std::string& header_comment = "");

}  // namespace levgc
