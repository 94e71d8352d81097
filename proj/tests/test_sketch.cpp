#include <doctest.h>

#include <set>

#include "levgc/rng.hpp"
#include "levgc/sketch.hpp"
#include "oracles.hpp"

using namespace levgc;

namespace {

SamplingDistribution make_dist(std::initializer_list<double> vals,
                               DistKind kind = DistKind::exact) {
    SamplingDistribution d;
    d.p = Vector(static_cast<Eigen::Index>(vals.size()));
    int i = 0;
    for (double v : vals) d.p(i++) = v;
    d.kind = kind;
    return d;
}

PartitionedDataset random_ds(int N, int d, int K, std::uint64_t seed) {
    auto [A, b] = generate_regression_instance(N, d, 5.0, 1.0, seed);
    return partition(A, b, K);
}

SketchDraw manual_draw(const std::vector<int>& sampled, const SamplingDistribution& dist) {
    SketchDraw s;
    s.q = static_cast<int>(sampled.size());
    s.sampled = sampled;
    s.source = dist;
    for (int i : sampled) s.scales.push_back(1.0 / std::sqrt(s.q * dist.p(i)));
    return s;
}

}  // namespace

TEST_CASE("draw_sketch scales and determinism") {
    auto ds = random_ds(16, 2, 4, 1);
    auto uniform = make_dist({0.25, 0.25, 0.25, 0.25});
    auto rng1 = make_rng(42);
    auto rng2 = make_rng(42);
    auto s1 = draw_sketch(uniform, 4, ds, rng1);
    auto s2 = draw_sketch(uniform, 4, ds, rng2);
    CHECK(s1.sampled == s2.sampled);
    for (double sc : s1.scales) CHECK(sc == doctest::Approx(1.0));  // 1/sqrt(4 * 1/4)

    CHECK_THROWS_AS(draw_sketch(uniform, 0, ds, rng1), std::invalid_argument);
}

TEST_CASE("draw_sketch rejects q*tau <= d and zero-probability data blocks") {
    auto ds = random_ds(12, 4, 12, 2);  // tau = 1
    auto uniform = make_dist({1.0 / 12, 1.0 / 12, 1.0 / 12, 1.0 / 12, 1.0 / 12, 1.0 / 12,
                              1.0 / 12, 1.0 / 12, 1.0 / 12, 1.0 / 12, 1.0 / 12, 1.0 / 12});
    auto rng = make_rng(1);
    CHECK_THROWS_AS(draw_sketch(uniform, 4, ds, rng), std::invalid_argument);
    CHECK_NOTHROW(draw_sketch(uniform, 5, ds, rng));

    SamplingDistribution bad = uniform;
    bad.p(0) = 0.0;
    bad.p /= bad.p.sum();
    CHECK_THROWS_AS(draw_sketch(bad, 6, ds, rng), std::invalid_argument);
}

TEST_CASE("appendix-style multiset scales") {
    auto dist = make_dist({3.0 / 20, 3.0 / 20, 4.0 / 20, 5.0 / 20, 5.0 / 20});
    // S = {3, 5, 5} in one-based labels.
    auto s = manual_draw({2, 4, 4}, dist);
    CHECK(s.scales[0] == doctest::Approx(1.0 / std::sqrt(3.0 * 4.0 / 20)));
    CHECK(s.scales[1] == doctest::Approx(1.0 / std::sqrt(3.0 * 5.0 / 20)));
    CHECK(s.scales[2] == doctest::Approx(1.0 / std::sqrt(3.0 * 5.0 / 20)));
}

TEST_CASE("empirical draw frequencies follow the distribution") {
    auto ds = random_ds(8, 1, 2, 3);
    auto dist = make_dist({0.9, 0.1});
    auto rng = make_rng(7);
    int hits = 0;
    const int q = 10000;
    auto s = draw_sketch(dist, q, ds, rng);
    for (int i : s.sampled) hits += (i == 0);
    CHECK(std::abs(hits / static_cast<double>(q) - 0.9) <= 0.01);
}

TEST_CASE("apply_sketch matches the dense Kronecker oracle") {
    SUBCASE("identity-like uniform cover is a block permutation") {
        auto ds = random_ds(8, 2, 4, 4);
        auto uniform = make_dist({0.25, 0.25, 0.25, 0.25});
        auto s = manual_draw({3, 1, 0, 2}, uniform);
        auto [A_hat, b_hat] = apply_sketch(s, ds);
        CHECK((A_hat.middleRows(0, 2) - ds.block(3)).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK((A_hat.middleRows(2, 2) - ds.block(1)).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("q=1 with certain block is the block itself") {
        auto ds = random_ds(6, 2, 3, 5);
        SamplingDistribution dist = make_dist({0.0, 1.0, 0.0});
        auto s = manual_draw({1}, dist);
        auto [A_hat, b_hat] = apply_sketch(s, ds);
        CHECK((A_hat - ds.block(1)).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("explicit 6x2 instance, draw {2,2,3}") {
        auto ds = random_ds(6, 2, 3, 6);
        auto dist = make_dist({0.2, 0.5, 0.3});
        auto s = manual_draw({1, 1, 2}, dist);
        auto [A_hat, b_hat] = apply_sketch(s, ds);
        const Matrix S = oracles::kronecker_sketch(s.sampled, s.scales, ds.K, ds.tau);
        CHECK((A_hat - S * ds.A).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((b_hat - S * ds.b).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("weighted_collapse") {
    auto dist = make_dist({3.0 / 20, 3.0 / 20, 4.0 / 20, 5.0 / 20, 5.0 / 20});
    SUBCASE("{3,5,5} collapses to two blocks") {
        auto s = manual_draw({2, 4, 4}, dist);
        auto w = weighted_collapse(s);
        CHECK(w.distinct == std::vector<int>{2, 4});
        CHECK(w.weights == std::vector<int>{1, 2});
        CHECK(w.q_bar() == 2);
        CHECK(w.compression_ratio() == doctest::Approx(1.5));
        CHECK(w.scales[0] == doctest::Approx(std::sqrt(1.0 / (3.0 * 0.2))));
        CHECK(w.scales[1] == doctest::Approx(std::sqrt(2.0 / (3.0 * 0.25))));
    }
    SUBCASE("all-distinct draw keeps the original scales") {
        auto s = manual_draw({0, 1, 2}, dist);
        auto w = weighted_collapse(s);
        CHECK(w.compression_ratio() == doctest::Approx(1.0));
        for (int j = 0; j < 3; ++j) CHECK(w.scales[j] == doctest::Approx(s.scales[j]));
    }
    SUBCASE("all-same draw") {
        auto s = manual_draw({3, 3, 3, 3, 3}, dist);
        auto w = weighted_collapse(s);
        CHECK(w.q_bar() == 1);
        CHECK(w.scales[0] == doctest::Approx(1.0 / std::sqrt(dist.p(3))));
    }
}

TEST_CASE("sketch_gram: weighted equals unweighted equals dense oracle") {
    auto ds = random_ds(20, 3, 5, 8);
    auto dist = make_dist({3.0 / 20, 3.0 / 20, 4.0 / 20, 5.0 / 20, 5.0 / 20});
    SUBCASE("on the {3,5,5} multiset") {
        auto s = manual_draw({2, 4, 4}, dist);
        const Matrix Gu = sketch_gram(s, ds);
        const Matrix Gw = sketch_gram(weighted_collapse(s), ds);
        CHECK((Gu - Gw).norm() <= 1e-10 * Gu.norm());
    }
    SUBCASE("uniform full cover gives A^T A") {
        auto ds4 = random_ds(8, 2, 4, 9);
        auto uniform = make_dist({0.25, 0.25, 0.25, 0.25});
        auto s = manual_draw({0, 1, 2, 3}, uniform);
        const Matrix G = sketch_gram(s, ds4);
        CHECK((G - ds4.A.transpose() * ds4.A).cwiseAbs().maxCoeff() <= 1e-10);
    }
    SUBCASE("random draw matches dense materialization") {
        auto rng = make_rng(10);
        auto s = draw_sketch(dist, 6, ds, rng);
        auto [A_hat, b_hat] = apply_sketch(s, ds);
        CHECK((sketch_gram(s, ds) - A_hat.transpose() * A_hat).cwiseAbs().maxCoeff() <=
              1e-10);
    }
}

TEST_CASE("embedding_error") {
    SUBCASE("exact uniform cover has zero error") {
        auto ds = random_ds(8, 2, 4, 11);
        auto basis = orthonormal_basis(ds);
        auto uniform = make_dist({0.25, 0.25, 0.25, 0.25});
        auto s = manual_draw({0, 1, 2, 3}, uniform);
        CHECK(embedding_error(s, basis, ds) <= 1e-10);
    }
    SUBCASE("median error decreases with q") {
        auto ds = random_ds(200, 4, 20, 12);
        auto basis = orthonormal_basis(ds);
        auto scores = block_leverage_scores(basis, ds);
        auto grams = block_grams(basis.U, ds.K, ds.tau);
        auto rng = make_rng(13);
        std::vector<double> small_q, large_q;
        for (int t = 0; t < 50; ++t) {
            small_q.push_back(
                embedding_error_pregram(draw_sketch(scores, 10, ds, rng), grams));
            large_q.push_back(
                embedding_error_pregram(draw_sketch(scores, 100, ds, rng), grams));
        }
        CHECK(oracles::median(large_q) < oracles::median(small_q));
    }
    SUBCASE("minimal q stays finite") {
        auto ds = random_ds(40, 4, 10, 14);  // tau = 4
        auto basis = orthonormal_basis(ds);
        auto scores = block_leverage_scores(basis, ds);
        auto rng = make_rng(15);
        auto s = draw_sketch(scores, 2, ds, rng);  // q*tau = d + tau
        const double err = embedding_error(s, basis, ds);
        CHECK(std::isfinite(err));
        CHECK(err >= 0.0);
    }
}

TEST_CASE("unbiased projected gram over many draws") {
    auto ds = random_ds(100, 4, 20, 16);
    auto basis = orthonormal_basis(ds);
    auto scores = block_leverage_scores(basis, ds);
    auto grams = block_grams(basis.U, ds.K, ds.tau);
    auto rng = make_rng(17);
    const int M = 10000;
    Matrix mean = Matrix::Zero(4, 4);
    for (int t = 0; t < M; ++t) {
        auto s = draw_sketch(scores, 5, ds, rng);
        for (int j = 0; j < s.q; ++j)
            mean += (s.scales[j] * s.scales[j]) * grams[s.sampled[j]];
    }
    mean /= M;
    CHECK((mean - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 5.0 / std::sqrt(M));
}

TEST_CASE("expected_distinct") {
    CHECK(expected_distinct(make_dist({0.5, 0.5}), 1) == doctest::Approx(1.0));
    CHECK(expected_distinct(make_dist({0.5, 0.5}), 2) == doctest::Approx(1.5));
    CHECK(expected_distinct(make_dist({0.9, 0.1}), 2) == doctest::Approx(1.18));

    SUBCASE("monte carlo agreement") {
        auto ds = random_ds(8, 1, 2, 18);
        auto dist = make_dist({0.9, 0.1});
        auto rng = make_rng(19);
        double mean = 0.0;
        const int trials = 100000;
        for (int t = 0; t < trials; ++t) {
            auto s = draw_sketch(dist, 2, ds, rng);
            mean += weighted_collapse(s).q_bar();
        }
        mean /= trials;
        CHECK(std::abs(mean - 1.18) <= 0.01);
    }
    SUBCASE("weighted dimension never exceeds the unweighted one") {
        auto ds = random_ds(40, 2, 10, 20);
        auto basis = orthonormal_basis(ds);
        auto scores = block_leverage_scores(basis, ds);
        auto rng = make_rng(21);
        for (int t = 0; t < 50; ++t) {
            auto s = draw_sketch(scores, 8, ds, rng);
            CHECK(weighted_collapse(s).q_bar() <= s.q);
        }
    }
}

TEST_CASE("perturb_distribution") {
    auto dist = make_dist({0.9, 0.1});
    auto rng = make_rng(22);
    SUBCASE("beta = 1 is the identity") {
        auto out = perturb_distribution(dist, 1.0, rng);
        CHECK((out.p - dist.p).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("measured beta respects the target") {
        for (double target : {0.9, 0.5, 0.3}) {
            auto out = perturb_distribution(dist, target, rng);
            CHECK(out.p.sum() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(measured_beta(dist, out) >= target - 1e-12);
            CHECK(out.kind == DistKind::approximate);
        }
    }
    CHECK_THROWS_AS(perturb_distribution(dist, 0.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(perturb_distribution(dist, 1.5, rng), std::invalid_argument);
}

TEST_CASE("gaussian sketch is unbiased") {
    auto rng = make_rng(23);
    const int N = 8, r = 50, draws = 1000;
    Matrix mean = Matrix::Zero(N, N);
    for (int t = 0; t < draws; ++t) {
        Matrix S = gaussian_sketch(r, N, rng);
        mean += S.transpose() * S;
    }
    mean /= draws;
    CHECK((mean - Matrix::Identity(N, N)).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("fwht is a scaled involution") {
    auto rng = make_rng(24);
    std::normal_distribution<double> gauss;
    Vector x(16);
    for (int i = 0; i < 16; ++i) x(i) = gauss(rng);
    Vector y = x;
    fwht_inplace(y);
    fwht_inplace(y);
    CHECK((y / 16.0 - x).cwiseAbs().maxCoeff() <= 1e-12);

    Vector odd(3);
    CHECK_THROWS_AS(fwht_inplace(odd), std::invalid_argument);
}

TEST_CASE("block srht embedding error decreases with q") {
    auto [A, b] = generate_regression_instance(500, 10, 4.0, 1.0, 25);
    auto ds = partition(A, b, 25);
    auto basis = orthonormal_basis(ds);
    auto rng = make_rng(26);
    auto median_err = [&](int q) {
        std::vector<double> errs;
        for (int t = 0; t < 30; ++t) {
            auto s = draw_block_srht(static_cast<int>(ds.rows()), ds.K, q, rng);
            Matrix SU = apply_block_srht(s, basis.U);
            Matrix dev = Matrix::Identity(10, 10) - SU.transpose() * SU;
            Eigen::SelfAdjointEigenSolver<Matrix> eig(dev, Eigen::EigenvaluesOnly);
            errs.push_back(eig.eigenvalues().cwiseAbs().maxCoeff());
        }
        return oracles::median(errs);
    };
    CHECK(median_err(24) < median_err(6));
}
