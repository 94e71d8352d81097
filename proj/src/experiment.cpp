#include "levgc/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "levgc/io.hpp"
#include "levgc/rng.hpp"

namespace levgc {

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    return nlohmann::json{
        {"instance",
         {{"N", cfg.instance.N},
          {"d", cfg.instance.d},
          {"K", cfg.instance.K},
          {"dof", cfg.instance.dof},
          {"sigma", cfg.instance.sigma},
          {"seed", cfg.instance.seed},
          {"csv_a", cfg.instance.csv_a},
          {"csv_b", cfg.instance.csv_b}}},
        {"sketches", cfg.sketches},
        {"xis", cfg.xis},
        {"network",
         {{"m", cfg.network.m},
          {"q", cfg.network.q},
          {"T", cfg.network.T},
          {"runtime", cfg.network.runtime},
          {"mode", cfg.network.mode}}},
        {"policy", {{"kind", cfg.policy.kind}, {"value", cfg.policy.value}}},
        {"iterations", cfg.iterations},
        {"trials", cfg.trials},
        {"seed", cfg.seed},
        {"output_dir", cfg.output_dir}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    if (j.contains("instance")) {
        const auto& i = j.at("instance");
        cfg.instance.N = i.value("N", cfg.instance.N);
        cfg.instance.d = i.value("d", cfg.instance.d);
        cfg.instance.K = i.value("K", cfg.instance.K);
        cfg.instance.dof = i.value("dof", cfg.instance.dof);
        cfg.instance.sigma = i.value("sigma", cfg.instance.sigma);
        cfg.instance.seed = i.value("seed", cfg.instance.seed);
        cfg.instance.csv_a = i.value("csv_a", cfg.instance.csv_a);
        cfg.instance.csv_b = i.value("csv_b", cfg.instance.csv_b);
    }
    cfg.sketches = j.value("sketches", cfg.sketches);
    cfg.xis = j.value("xis", cfg.xis);
    if (j.contains("network")) {
        const auto& n = j.at("network");
        cfg.network.m = n.value("m", cfg.network.m);
        cfg.network.q = n.value("q", cfg.network.q);
        cfg.network.T = n.value("T", cfg.network.T);
        cfg.network.runtime = n.value("runtime", cfg.network.runtime);
        cfg.network.mode = n.value("mode", cfg.network.mode);
    }
    if (j.contains("policy")) {
        cfg.policy.kind = j.at("policy").value("kind", cfg.policy.kind);
        cfg.policy.value = j.at("policy").value("value", cfg.policy.value);
    }
    cfg.iterations = j.value("iterations", cfg.iterations);
    cfg.trials = j.value("trials", cfg.trials);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    return cfg;
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string dump = config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

PartitionedDataset load_instance(const InstanceConfig& cfg) {
    if (!cfg.csv_a.empty()) {
        Matrix A = read_matrix_csv(cfg.csv_a);
        Vector b;
        if (!cfg.csv_b.empty()) {
            b = read_vector_csv(cfg.csv_b);
        } else {
            b = Vector::Zero(A.rows());
        }
        return partition(A, b, cfg.K);
    }
    auto [A, b] = generate_regression_instance(cfg.N, cfg.d, cfg.dof, cfg.sigma, cfg.seed);
    return partition(A, b, cfg.K);
}

RuntimeModel parse_runtime(const std::string& spec, double task_scale) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "shifted-exp") {
        double lambda = 1.0, t0 = 0.0;
        const auto comma = rest.find(',');
        if (!rest.empty()) {
            lambda = std::stod(rest.substr(0, comma));
            if (comma != std::string::npos) t0 = std::stod(rest.substr(comma + 1));
        }
        return shifted_exponential_model(lambda, t0, task_scale);
    }
    if (kind == "trace") {
        if (rest.empty()) throw std::invalid_argument("runtime: trace path missing");
        return empirical_model(read_trace(rest), task_scale);
    }
    throw std::invalid_argument("runtime: expected shifted-exp:l,t0 or trace:PATH, got '" +
                                spec + "'");
}

StepPolicy parse_policy(const PolicyConfig& cfg) {
    if (cfg.kind == "fixed") return StepPolicy::fixed_step(cfg.value);
    if (cfg.kind == "conservative") return StepPolicy::conservative();
    if (cfg.kind == "optimal") return StepPolicy::optimal();
    if (cfg.kind == "diminishing") return StepPolicy::diminishing(cfg.value);
    throw std::invalid_argument("policy: unknown kind '" + cfg.kind + "'");
}

SketchKind parse_sketch_kind(const std::string& name) {
    if (name == "block_lvg") return SketchKind::block_lvg;
    if (name == "gaussian") return SketchKind::gaussian;
    if (name == "block_srht") return SketchKind::block_srht;
    if (name == "none") return SketchKind::none;
    throw std::invalid_argument("sketch: unknown kind '" + name + "'");
}

nlohmann::json plan_to_json(const ReplicationPlan& plan,
                            const SamplingDistribution& target) {
    std::vector<double> pi(target.p.data(), target.p.data() + target.p.size());
    return nlohmann::json{{"pi", pi},
                          {"r", plan.r},
                          {"m", plan.R},
                          {"beta", plan.beta},
                          {"distortion", distortion(target, plan.induced)}};
}

CompareResult run_compare(const ExperimentConfig& cfg) {
    return run_compare(cfg, load_instance(cfg.instance));
}

CompareResult run_compare(const ExperimentConfig& cfg, const PartitionedDataset& ds) {
    if (cfg.trials < 1) throw std::invalid_argument("compare: trials must be >= 1");
    std::vector<double> xis = cfg.xis;
    if (xis.empty()) {
        const double sig = sigma_max(ds.A);
        xis.push_back(1.0 / (sig * sig));
    }

    CompareResult result;
    for (const auto& sketch : cfg.sketches) {
        const SketchKind kind = parse_sketch_kind(sketch);
        for (double xi : xis) {
            std::vector<double> finals;
            std::vector<double> mean_series(cfg.iterations, 0.0);
            for (int trial = 0; trial < cfg.trials; ++trial) {
                const std::uint64_t seed = split_seed(cfg.seed, trial);
                const SolverRun run =
                    solve_iterative_sketch(ds, kind, cfg.network.q,
                                           StepPolicy::fixed_step(xi), cfg.iterations, seed);
                finals.push_back(run.records.back().log10_residual);
                for (int s = 0; s < cfg.iterations; ++s)
                    mean_series[s] += run.records[s].log10_residual;
            }
            for (auto& v : mean_series) v /= cfg.trials;
            CompareRow row;
            row.sketch = sketch;
            row.xi = xi;
            row.mean_final =
                std::accumulate(finals.begin(), finals.end(), 0.0) / finals.size();
            std::sort(finals.begin(), finals.end());
            row.median_final = finals.size() % 2
                                   ? finals[finals.size() / 2]
                                   : 0.5 * (finals[finals.size() / 2 - 1] +
                                            finals[finals.size() / 2]);
            result.table.push_back(row);
            result.series[{sketch, xi}] = std::move(mean_series);
        }
    }
    return result;
}

void write_compare_table_csv(const std::string& path, const CompareResult& result,
                             const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    if (!header_comment.empty()) out << "# " << header_comment << '\n';
    out << "sketch,xi,mean_final_log10_residual,median_final_log10_residual\n";
    for (const auto& row : result.table)
        out << row.sketch << ',' << format_double(row.xi) << ','
            << format_double(row.mean_final) << ',' << format_double(row.median_final)
            << '\n';
}

void write_compare_series_csv(const std::string& path, const CompareResult& result,
                              const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    if (!header_comment.empty()) out << "# " << header_comment << '\n';
    out << "sketch,xi,iter,mean_log10_residual\n";
    for (const auto& [key, series] : result.series)
        for (size_t s = 0; s < series.size(); ++s)
            out << key.first << ',' << format_double(key.second) << ',' << s + 1 << ','
                << format_double(series[s]) << '\n';
}

SolvePipelineResult run_solve_pipeline(const ExperimentConfig& cfg) {
    const PartitionedDataset ds = load_instance(cfg.instance);
    if (cfg.network.m < ds.K)
        throw std::invalid_argument("solve: need m >= K servers");
    if (cfg.network.q < 1 && cfg.network.mode == "fastest")
        throw std::invalid_argument("solve: fastest mode needs q >= 1");

    const double task_scale = static_cast<double>(ds.tau) / ds.rows();
    const RuntimeModel model = parse_runtime(cfg.network.runtime, task_scale);
    const auto scores = block_leverage_scores(orthonormal_basis(ds), ds);

    SolvePipelineResult result;
    // phi at the ending time; without an explicit T, take the survival level
    // at which the expected responder count is q.
    if (cfg.network.T >= 0.0) {
        result.phi_T = survival(model, cfg.network.T);
        result.q_T = responders_at(model, cfg.network.T, cfg.network.m);
    } else {
        if (cfg.network.q < 1) throw std::invalid_argument("solve: need q or T");
        result.phi_T = 1.0 - static_cast<double>(cfg.network.q) / cfg.network.m;
        result.q_T = cfg.network.q;
    }
    result.phi_T = std::clamp(result.phi_T, 1e-9, 1.0 - 1e-9);
    result.plan = design_plan(scores, result.phi_T, cfg.network.m);

    const ExpansionNetwork net = build_network(result.plan, cfg.network.m,
                                               std::max(cfg.network.q, 1), ds.tau);
    SolveOptions opts;
    opts.policy = parse_policy(cfg.policy);
    opts.iterations = cfg.iterations;
    opts.seed = cfg.seed;
    if (cfg.network.mode == "fastest") {
        opts.response = ResponsePolicy{ResponseMode::fastest_q, cfg.network.q, 0.0};
    } else if (cfg.network.mode == "deadline") {
        if (cfg.network.T < 0.0) throw std::invalid_argument("solve: deadline needs T");
        opts.response = ResponsePolicy{ResponseMode::deadline, 0, cfg.network.T};
    } else {
        throw std::invalid_argument("solve: unknown mode '" + cfg.network.mode + "'");
    }
    result.run = solve(ds, net, model, opts);
    return result;
}

}  // namespace levgc
