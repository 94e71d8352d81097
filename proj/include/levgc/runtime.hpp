#pragma once

#include <random>
#include <vector>

#include "levgc/expansion.hpp"

namespace levgc {

/// Server completion-time model. The mother distribution F describes a full
/// job; task times follow F~(t) = F(t * task_scale) with task_scale = tau/N.
struct RuntimeModel {
    enum class Kind { shifted_exponential, empirical };
    Kind kind = Kind::shifted_exponential;
    double lambda = 1.0;         // rate, shifted-exponential only
    double t0 = 0.0;             // shift, shifted-exponential only
    std::vector<double> sample;  // sorted, empirical only
    double task_scale = 1.0;     // tau / N
};

RuntimeModel shifted_exponential_model(double lambda, double t0, double task_scale = 1.0);
RuntimeModel empirical_model(std::vector<double> times, double task_scale = 1.0);

// F~(t); ECDF is right-continuous for empirical models.
double scaled_cdf(const RuntimeModel& model, double t);

// phi(t) = 1 - F~(t), the straggler probability at time t.
double survival(const RuntimeModel& model, double t);

// q(T) = floor(F~(T) * m); zero means the round collects nothing.
int responders_at(const RuntimeModel& model, double T, int m);

// One task completion time drawn from F~.
double sample_time(const RuntimeModel& model, std::mt19937_64& rng);

enum class ResponseMode { fastest_q, deadline };

struct ResponsePolicy {
    ResponseMode mode = ResponseMode::fastest_q;
    int q = 0;        // fastest_q
    double T = 0.0;   // deadline
};

/// Which blocks arrived in one round, via the servers that held them.
struct RoundOutcome {
    std::vector<int> responders;       // block index multiset, kept-server order
    std::vector<double> server_times;  // all m completion times
    ResponseMode mode = ResponseMode::fastest_q;
};

// m i.i.d. completion times; fastest_q keeps the q smallest (ties by server
// index), deadline keeps times <= T.
RoundOutcome simulate_round(const ExpansionNetwork& net, const RuntimeModel& model,
                            const ResponsePolicy& policy, std::mt19937_64& rng);

}  // namespace levgc
