// Command-line harness for block leverage score sketching, expansion-network
// design, and straggler-tolerant sketched least squares. Subcommands:
//   scores   block leverage scores of a dataset -> JSON
//   design   replication plan + misestimation metrics -> JSON
//   solve    full simulated pipeline -> run CSV
//   compare  iterative sketching methods side by side -> CSVs
//   verify   built-in checker suites -> JSON reports
// Exit codes: 0 all assertions passed, 1 check failure, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "levgc/experiment.hpp"
#include "levgc/io.hpp"
#include "levgc/rng.hpp"
#include "levgc/verify.hpp"

using namespace levgc;
using nlohmann::json;

namespace {

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

json scores_payload(const PartitionedDataset& ds) {
    const auto basis = orthonormal_basis(ds);
    const auto dist = block_leverage_scores(basis, ds);
    SamplingDistribution uniform;
    uniform.p = Vector::Constant(ds.K, 1.0 / ds.K);
    std::vector<double> scores(dist.p.data(), dist.p.data() + dist.p.size());
    return json{{"N", ds.rows()},
                {"d", ds.cols()},
                {"K", ds.K},
                {"tau", ds.tau},
                {"scores", scores},
                {"stats",
                 {{"min", dist.p.minCoeff()},
                  {"max", dist.p.maxCoeff()},
                  {"sum", dist.p.sum()},
                  {"uniform_distortion", distortion(dist, uniform)}}}};
}

int cmd_scores(const std::string& input_a, const std::string& input_b, int K,
               const InstanceConfig& gen, bool use_gen, const std::string& output) {
    InstanceConfig inst = gen;
    inst.K = K;
    if (!use_gen) {
        inst.csv_a = input_a;
        inst.csv_b = input_b;
    }
    const PartitionedDataset ds = load_instance(inst);
    const json payload = scores_payload(ds);
    if (output.empty()) {
        std::cout << payload.dump(2) << '\n';
    } else {
        write_json(output, payload);
    }
    return 0;
}

int cmd_design(const std::string& scores_path, int m, const std::string& runtime,
               std::vector<double> Ts, const std::string& output) {
    std::ifstream in(scores_path);
    if (!in) throw std::runtime_error("cannot open " + scores_path);
    json sj = json::parse(in);
    SamplingDistribution target;
    const auto& sc = sj.at("scores");
    target.p = Vector(sc.size());
    for (size_t i = 0; i < sc.size(); ++i) target.p(i) = sc[i].get<double>();
    const double tau = sj.value("tau", 1.0);
    const double N = sj.value("N", static_cast<double>(target.p.size()));
    const RuntimeModel model = parse_runtime(runtime, tau / N);

    if (Ts.empty()) throw CLI::ValidationError("design", "at least one --T is required");
    json table = json::array();
    json primary;
    for (double T : Ts) {
        const double phi = std::clamp(survival(model, T), 1e-9, 1.0 - 1e-9);
        const int qT = responders_at(model, T, m);
        const auto r_hat = replication_from_runtime(target, phi);
        const auto plan = design_plan(target, phi, m);
        table.push_back({{"T", T},
                         {"q_T", qT},
                         {"phi_T", phi},
                         {"Delta", delta_distortion(target, phi, plan.r)},
                         {"Delta_rhat_bound", rounding_bound(target, phi, r_hat)},
                         {"distortion", distortion(target, plan.induced)},
                         {"beta", plan.beta},
                         {"eps_additive", plan.additive_eps}});
        if (primary.empty()) primary = plan_to_json(plan, target);
    }
    json payload = primary;
    payload["table"] = table;
    if (output.empty()) {
        std::cout << payload.dump(2) << '\n';
    } else {
        write_json(output, payload);
    }
    return 0;
}

int cmd_solve(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    auto result = run_solve_pipeline(cfg);
    fs::create_directories(cfg.output_dir);
    const std::string path = (fs::path(cfg.output_dir) / "run.csv").string();
    write_run_csv(path, result.run, "config_hash=" + config_hash(cfg));
    json summary = plan_to_json(result.plan, result.plan.induced);
    summary["config_hash"] = config_hash(cfg);
    summary["phi_T"] = result.phi_T;
    summary["q_T"] = result.q_T;
    summary["final_log10_residual"] = result.run.records.back().log10_residual;
    write_json((fs::path(cfg.output_dir) / "plan.json").string(), summary);
    std::cout << "run written to " << path << '\n';
    return 0;
}

int cmd_compare(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    const CompareResult result = run_compare(cfg);
    fs::create_directories(cfg.output_dir);
    const std::string hash = "config_hash=" + config_hash(cfg);
    write_compare_table_csv((fs::path(cfg.output_dir) / "table.csv").string(), result, hash);
    write_compare_series_csv((fs::path(cfg.output_dir) / "series.csv").string(), result,
                             hash);
    for (const auto& row : result.table)
        std::cout << row.sketch << " xi=" << format_double(row.xi)
                  << " mean_final=" << format_double(row.mean_final) << '\n';
    return 0;
}

int cmd_verify(const std::string& suite, const std::string& output, std::uint64_t seed) {
    std::vector<CheckReport> reports;
    const bool all = suite == "all";

    auto [A5, b5] = generate_regression_instance(400, 8, 4.0, 1.0, seed);
    auto ds = partition(A5, b5, 40);
    const auto scores = block_leverage_scores(orthonormal_basis(ds), ds);

    if (all || suite == "flattened") {
        auto plan = design_plan(scores, 0.6, 120);
        reports.push_back(check_flattened_scores(ds, plan.r, scores, 10));
        auto rng = make_rng(split_seed(seed, 1));
        reports.push_back(check_flattened_scores(
            ds, plan.r, perturb_distribution(scores, 0.8, rng), 10));
    }
    if (all || suite == "weighted") {
        auto [A, b] = generate_regression_instance(64, 8, 4.0, 1.0, seed + 1);
        auto ds64 = partition(A, b, 16);
        reports.push_back(check_weighted_identities(ds64, 500, 8, split_seed(seed, 2)));
    }
    if (all || suite == "sts") {
        SamplingDistribution skew;
        skew.p = Vector(16);
        for (int i = 0; i < 16; ++i) skew.p(i) = 1.0 + i;
        skew.p /= skew.p.sum();
        reports.push_back(check_expected_sts_identity(skew, 20, 4, 100000,
                                                      split_seed(seed, 3)));
    }
    if (all || suite == "srht") {
        reports.push_back(check_embedding_vs_srht(ds, {25, 50, 100}, 30,
                                                  split_seed(seed, 4)));
    }
    if (all || suite == "decoding") {
        auto plan = design_plan(scores, 0.5, 120);
        auto net = build_network(plan, 120, 10, ds.tau);
        auto model = shifted_exponential_model(1.0, 0.0, ds.tau / double(ds.rows()));
        SolveOptions opts;
        opts.policy = StepPolicy::optimal();
        opts.iterations = 100;
        opts.response = ResponsePolicy{ResponseMode::fastest_q, 10, 0.0};
        opts.seed = split_seed(seed, 5);
        reports.push_back(check_decoding_error_bound(solve(ds, net, model, opts), ds));
    }
    if (reports.empty())
        throw CLI::ValidationError("verify", "unknown suite '" + suite + "'");

    json out = json::array();
    bool ok = true;
    for (const auto& rep : reports) {
        out.push_back(report_to_json(rep));
        std::cout << (rep.pass ? "PASS " : "FAIL ") << rep.check << '\n';
        ok = ok && rep.pass;
    }
    if (!output.empty()) write_json(output, out);
    return ok ? 0 : 1;
}

void add_config_flags(CLI::App* cmd, ExperimentConfig& cfg, std::string& config_path,
                      std::string& sketch_list, std::string& policy_spec) {
    cmd->add_option("--config", config_path, "JSON config; overrides all flags");
    cmd->add_option("--N", cfg.instance.N, "rows of the generated instance");
    cmd->add_option("--d", cfg.instance.d, "columns of the generated instance");
    cmd->add_option("--K", cfg.instance.K, "block count");
    cmd->add_option("--dof", cfg.instance.dof, "t-distribution degrees of freedom");
    cmd->add_option("--sigma", cfg.instance.sigma, "noise level");
    cmd->add_option("--instance-seed", cfg.instance.seed, "instance generator seed");
    cmd->add_option("--input", cfg.instance.csv_a, "A matrix CSV (instead of generating)");
    cmd->add_option("--input-b", cfg.instance.csv_b, "b vector CSV");
    cmd->add_option("--m", cfg.network.m, "server count");
    cmd->add_option("--q", cfg.network.q, "responses per round / sampling trials");
    cmd->add_option("--T", cfg.network.T, "ending time");
    cmd->add_option("--runtime", cfg.network.runtime,
                    "shifted-exp:lambda,t0 or trace:PATH");
    cmd->add_option("--mode", cfg.network.mode, "fastest or deadline");
    cmd->add_option("--policy", policy_spec,
                    "fixed:XI | conservative | optimal | diminishing:ETA");
    cmd->add_option("--iterations,-S", cfg.iterations, "iteration count");
    cmd->add_option("--trials", cfg.trials, "trial count");
    cmd->add_option("--seed", cfg.seed, "master seed");
    cmd->add_option("--sketch", sketch_list, "comma-separated sketch kinds");
    cmd->add_option("--xi", cfg.xis, "fixed step sizes (repeatable)");
    cmd->add_option("--output-dir,-o", cfg.output_dir, "output directory");
}

void finish_config(ExperimentConfig& cfg, const std::string& config_path,
                   const std::string& sketch_list, const std::string& policy_spec) {
    if (!sketch_list.empty()) {
        cfg.sketches.clear();
        std::stringstream ss(sketch_list);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.sketches.push_back(tok);
    }
    if (!policy_spec.empty()) {
        const auto colon = policy_spec.find(':');
        cfg.policy.kind = policy_spec.substr(0, colon);
        cfg.policy.value =
            colon == std::string::npos ? 0.0 : std::stod(policy_spec.substr(colon + 1));
    }
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot open " + config_path);
        cfg = config_from_json(json::parse(in));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"block leverage score sketching and gradient-coded least squares"};
    app.require_subcommand(1);

    // scores
    auto* sc = app.add_subcommand("scores", "block leverage scores of a dataset");
    std::string sc_input, sc_input_b, sc_output;
    int sc_K = 1;
    InstanceConfig sc_gen;
    bool sc_use_gen = false;
    sc->add_option("--input", sc_input, "A matrix CSV");
    sc->add_option("--input-b", sc_input_b, "b vector CSV");
    sc->add_option("--K", sc_K, "block count")->required();
    sc->add_flag("--generate", sc_use_gen, "generate a synthetic instance instead");
    sc->add_option("--N", sc_gen.N);
    sc->add_option("--d", sc_gen.d);
    sc->add_option("--dof", sc_gen.dof);
    sc->add_option("--sigma", sc_gen.sigma);
    sc->add_option("--instance-seed", sc_gen.seed);
    sc->add_option("--output,-o", sc_output, "output JSON path (default stdout)");

    // design
    auto* dg = app.add_subcommand("design", "replication plan from scores and a runtime");
    std::string dg_scores, dg_runtime = "shifted-exp:1,0", dg_output;
    int dg_m = 0;
    std::vector<double> dg_T;
    dg->add_option("--scores", dg_scores, "scores JSON from the scores command")->required();
    dg->add_option("--m", dg_m, "server count")->required();
    dg->add_option("--runtime", dg_runtime, "shifted-exp:lambda,t0 or trace:PATH");
    dg->add_option("--T", dg_T, "ending times (repeatable)")->required();
    dg->add_option("--output,-o", dg_output, "output JSON path (default stdout)");

    // solve
    auto* sv = app.add_subcommand("solve", "full simulated pipeline");
    ExperimentConfig sv_cfg;
    std::string sv_config, sv_sketches, sv_policy;
    add_config_flags(sv, sv_cfg, sv_config, sv_sketches, sv_policy);

    // compare
    auto* cp = app.add_subcommand("compare", "iterative sketching methods side by side");
    ExperimentConfig cp_cfg;
    cp_cfg.sketches = {"block_lvg", "gaussian", "block_srht", "none"};
    std::string cp_config, cp_sketches, cp_policy;
    add_config_flags(cp, cp_cfg, cp_config, cp_sketches, cp_policy);

    // verify
    auto* vf = app.add_subcommand("verify", "built-in checker suites");
    std::string vf_suite = "all", vf_output;
    std::uint64_t vf_seed = 1;
    vf->add_option("--suite", vf_suite, "all|flattened|weighted|sts|srht|decoding");
    vf->add_option("--output,-o", vf_output, "reports JSON path");
    vf->add_option("--seed", vf_seed, "master seed");

    try {
        app.parse(argc, argv);
        if (sc->parsed())
            return cmd_scores(sc_input, sc_input_b, sc_K, sc_gen, sc_use_gen, sc_output);
        if (dg->parsed()) return cmd_design(dg_scores, dg_m, dg_runtime, dg_T, dg_output);
        if (sv->parsed()) {
            finish_config(sv_cfg, sv_config, sv_sketches, sv_policy);
            return cmd_solve(sv_cfg);
        }
        if (cp->parsed()) {
            finish_config(cp_cfg, cp_config, cp_sketches, cp_policy);
            return cmd_compare(cp_cfg);
        }
        if (vf->parsed()) return cmd_verify(vf_suite, vf_output, vf_seed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
