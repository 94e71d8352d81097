#include "levgc/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace levgc {

RuntimeModel shifted_exponential_model(double lambda, double t0, double task_scale) {
    if (lambda <= 0.0) throw std::invalid_argument("runtime model: rate must be positive");
    if (t0 < 0.0) throw std::invalid_argument("runtime model: shift must be >= 0");
    if (task_scale <= 0.0) throw std::invalid_argument("runtime model: bad task scale");
    RuntimeModel m;
    m.kind = RuntimeModel::Kind::shifted_exponential;
    m.lambda = lambda;
    m.t0 = t0;
    m.task_scale = task_scale;
    return m;
}

RuntimeModel empirical_model(std::vector<double> times, double task_scale) {
    if (times.empty()) throw std::invalid_argument("runtime model: empty sample");
    for (double t : times)
        if (t < 0.0) throw std::invalid_argument("runtime model: negative sample time");
    if (task_scale <= 0.0) throw std::invalid_argument("runtime model: bad task scale");
    std::sort(times.begin(), times.end());
    RuntimeModel m;
    m.kind = RuntimeModel::Kind::empirical;
    m.sample = std::move(times);
    m.task_scale = task_scale;
    return m;
}

double scaled_cdf(const RuntimeModel& model, double t) {
    const double x = t * model.task_scale;
    if (model.kind == RuntimeModel::Kind::shifted_exponential) {
        if (x < model.t0) return 0.0;
        return 1.0 - std::exp(-model.lambda * (x - model.t0));
    }
    const auto it = std::upper_bound(model.sample.begin(), model.sample.end(), x);
    return static_cast<double>(it - model.sample.begin()) / model.sample.size();
}

double survival(const RuntimeModel& model, double t) { return 1.0 - scaled_cdf(model, t); }

int responders_at(const RuntimeModel& model, double T, int m) {
    if (m < 1) throw std::invalid_argument("responders_at: need m >= 1");
    const int q = static_cast<int>(std::floor(scaled_cdf(model, T) * m));
    return std::clamp(q, 0, m);
}

double sample_time(const RuntimeModel& model, std::mt19937_64& rng) {
    if (model.kind == RuntimeModel::Kind::shifted_exponential) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double u = unif(rng);
        // Inverse CDF of the mother distribution, then undo the task scale.
        const double mother = model.t0 - std::log1p(-u) / model.lambda;
        return mother / model.task_scale;
    }
    std::uniform_int_distribution<size_t> pick(0, model.sample.size() - 1);
    return model.sample[pick(rng)] / model.task_scale;
}

RoundOutcome simulate_round(const ExpansionNetwork& net, const RuntimeModel& model,
                            const ResponsePolicy& policy, std::mt19937_64& rng) {
    const int m = net.servers();
    if (m < 1) throw std::invalid_argument("simulate_round: network has no servers");
    if (policy.mode == ResponseMode::fastest_q && (policy.q < 1 || policy.q > m))
        throw std::invalid_argument("simulate_round: q outside [1, m]");

    RoundOutcome out;
    out.mode = policy.mode;
    out.server_times.resize(m);
    for (int j = 0; j < m; ++j) out.server_times[j] = sample_time(model, rng);

    std::vector<int> kept;
    if (policy.mode == ResponseMode::fastest_q) {
        std::vector<int> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (out.server_times[a] != out.server_times[b])
                return out.server_times[a] < out.server_times[b];
            return a < b;
        });
        kept.assign(order.begin(), order.begin() + policy.q);
        std::sort(kept.begin(), kept.end());
    } else {
        for (int j = 0; j < m; ++j)
            if (out.server_times[j] <= policy.T) kept.push_back(j);
    }
    out.responders.reserve(kept.size());
    for (int j : kept) out.responders.push_back(net.assignment[j]);
    return out;
}

}  // namespace levgc
