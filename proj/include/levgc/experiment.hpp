#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "levgc/solver.hpp"

namespace levgc {

struct InstanceConfig {
    int N = 2000;
    int d = 40;
    int K = 100;
    double dof = 3.0;
    double sigma = 1.0;
    std::uint64_t seed = 7;
    std::string csv_a;  // when set, load instead of generating
    std::string csv_b;
};

struct NetworkConfig {
    int m = 0;
    int q = 0;
    double T = -1.0;  // < 0 means "derive from q"
    std::string runtime = "shifted-exp:1,0";
    std::string mode = "fastest";  // or "deadline"
};

struct PolicyConfig {
    std::string kind = "optimal";  // fixed | conservative | optimal | diminishing
    double value = 0.0;
};

struct ExperimentConfig {
    InstanceConfig instance;
    std::vector<std::string> sketches{"block_lvg"};
    std::vector<double> xis;  // fixed step sizes for compare
    NetworkConfig network;
    PolicyConfig policy;
    int iterations = 600;
    int trials = 6;
    std::uint64_t seed = 1;
    std::string output_dir = ".";
};

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

// FNV-1a over the canonical JSON dump, as a hex string.
std::string config_hash(const ExperimentConfig& cfg);

PartitionedDataset load_instance(const InstanceConfig& cfg);

// "shifted-exp:lambda,t0" or "trace:PATH".
RuntimeModel parse_runtime(const std::string& spec, double task_scale);

// "fixed:0.1", "conservative", "optimal", "diminishing:2.0".
StepPolicy parse_policy(const PolicyConfig& cfg);
SketchKind parse_sketch_kind(const std::string& name);

struct CompareRow {
    std::string sketch;
    double xi = 0.0;
    double mean_final = 0.0;
    double median_final = 0.0;
};

struct CompareResult {
    std::vector<CompareRow> table;
    // (sketch, xi) -> per-iteration mean log10 residual over trials
    std::map<std::pair<std::string, double>, std::vector<double>> series;
};

// Iterative-sketching comparison on one instance: every (sketch, xi) pair is
// run for config.trials seeded trials split from the master seed. The second
// form runs on a caller-supplied dataset instead of cfg.instance.
CompareResult run_compare(const ExperimentConfig& cfg);
CompareResult run_compare(const ExperimentConfig& cfg, const PartitionedDataset& ds);

// {"pi": target scores, "r": counts, "m": servers, "beta", "distortion"}.
nlohmann::json plan_to_json(const ReplicationPlan& plan, const SamplingDistribution& target);

void write_compare_table_csv(const std::string& path, const CompareResult& result,
                             const std::string& header_comment = "");
void write_compare_series_csv(const std::string& path, const CompareResult& result,
                              const std::string& header_comment = "");

struct SolvePipelineResult {
    SolverRun run;
    ReplicationPlan plan;
    double phi_T = 0.0;
    int q_T = 0;
};

// Full network pipeline: scores, replication design, expansion network,
// simulated iterative solve.
SolvePipelineResult run_solve_pipeline(const ExperimentConfig& cfg);

}  // namespace levgc
