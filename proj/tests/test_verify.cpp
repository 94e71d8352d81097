#include <doctest.h>

#include "levgc/rng.hpp"
#include "levgc/verify.hpp"
#include "oracles.hpp"

using namespace levgc;

namespace {

PartitionedDataset appendix_dataset() {
    const std::vector<double> target{3.0 / 20, 3.0 / 20, 4.0 / 20, 5.0 / 20, 5.0 / 20};
    Matrix A = oracles::prescribed_score_matrix(target);
    Vector b = A * Vector::Ones(2) + 0.1 * Vector::Ones(10);
    return partition(A, b, 5);
}

}  // namespace

TEST_CASE("dense sketch matrices match the Kronecker oracle") {
    auto ds = appendix_dataset();
    auto scores = block_leverage_scores(orthonormal_basis(ds), ds);
    auto rng = make_rng(1);
    auto s = draw_sketch(scores, 4, ds, rng);
    const Matrix S = dense_sketch_matrix(s, ds.K, ds.tau);
    const Matrix S_ref = oracles::kronecker_sketch(s.sampled, s.scales, ds.K, ds.tau);
    CHECK((S - S_ref).cwiseAbs().maxCoeff() == 0.0);

    auto w = weighted_collapse(s);
    const Matrix Sw = dense_weighted_sketch_matrix(w, ds.K, ds.tau);
    CHECK((Sw.transpose() * Sw - S.transpose() * S).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("flattened scores") {
    auto ds = appendix_dataset();
    auto scores = block_leverage_scores(orthonormal_basis(ds), ds);
    SUBCASE("exact scores give uniform 1/R") {
        auto rep = check_flattened_scores(ds, {3, 3, 4, 5, 5}, scores, 3);
        CHECK(rep.pass);
        CHECK(rep.params["R"] == 20);
        CHECK(rep.measured["max_score_deviation"].get<double>() <= 1e-10);
    }
    SUBCASE("perturbed scores stay within 1/(R beta)") {
        auto rng = make_rng(2);
        auto tilde = perturb_distribution(scores, 0.8, rng);
        auto rep = check_flattened_scores(ds, {3, 3, 4, 5, 5}, tilde, 3);
        CHECK(rep.pass);
        CHECK(rep.measured["distortion_to_uniform"].get<double>() <=
              rep.bound["distortion_to_uniform"].get<double>());
    }
}

TEST_CASE("weighted identities") {
    auto [A, b] = generate_regression_instance(64, 8, 4.0, 1.0, 3);
    auto ds = partition(A, b, 16);
    auto rep = check_weighted_identities(ds, 300, 8, 4);
    CHECK(rep.pass);
    CHECK(rep.measured["max_gradient_rel_gap"].get<double>() <= 1e-10);
    CHECK(rep.measured["max_gram_rel_gap"].get<double>() <= 1e-10);
}

TEST_CASE("expected S^T S identity") {
    SUBCASE("exact cover is the identity every draw") {
        SamplingDistribution uniform;
        uniform.p = Vector::Constant(4, 0.25);
        auto rep = check_expected_sts_identity(uniform, 4, 2, 200, 5);
        CHECK(rep.pass);
    }
    SUBCASE("skewed distribution converges") {
        SamplingDistribution skew;
        skew.p = Vector(2);
        skew.p << 0.9, 0.1;
        auto rep = check_expected_sts_identity(skew, 10, 2, 100000, 6);
        CHECK(rep.pass);
        CHECK(rep.measured["max_entrywise_deviation"].get<double>() <= 0.02);
    }
}

TEST_CASE("embedding vs srht report") {
    auto [A, b] = generate_regression_instance(256, 8, 4.0, 1.0, 7);
    auto ds = partition(A, b, 32);
    auto rep = check_embedding_vs_srht(ds, {8, 16}, 20, 8);
    CHECK(rep.pass);  // report-only
    CHECK(rep.measured["rows"].size() == 2);
    for (const auto& row : rep.measured["rows"]) {
        CHECK(row["median_eps_block_lvg"].get<double>() > 0.0);
        CHECK(row["median_eps_block_srht"].get<double>() > 0.0);
    }
}

TEST_CASE("decoding error bound over a run") {
    auto [A, b] = generate_regression_instance(60, 4, 5.0, 1.0, 9);
    auto ds = partition(A, b, 12);
    auto scores = block_leverage_scores(orthonormal_basis(ds), ds);
    auto plan = design_plan(scores, 0.5, 36);
    auto net = build_network(plan, 36, 6, ds.tau);
    auto model = shifted_exponential_model(1.0, 0.0, ds.tau / double(ds.rows()));
    SolveOptions opts;
    opts.policy = StepPolicy::optimal();
    opts.iterations = 50;
    opts.response = ResponsePolicy{ResponseMode::fastest_q, 6, 0.0};
    opts.seed = 10;
    auto run = solve(ds, net, model, opts);
    auto rep = check_decoding_error_bound(run, ds);
    CHECK(rep.pass);
    CHECK(rep.measured["violations"] == 0);
    CHECK(rep.measured["max_implied_decoding_err"].get<double>() > 0.0);

    SUBCASE("report serialization") {
        auto j = report_to_json(rep);
        CHECK(j["check"] == "decoding_error_bound");
        CHECK(j.contains("params"));
        CHECK(j.contains("measured"));
        CHECK(j.contains("bound"));
        CHECK(j["pass"] == true);
    }
}
