#include <doctest.h>

#include <cmath>

#include "rscov/design.hpp"
#include "rscov/problems.hpp"

using namespace rscov;

TEST_SUITE_BEGIN("problems");

TEST_CASE("generalized slippage configuration") {
    Eigen::VectorXd base(4);
    base << 1, 1, 1, 1;
    const Eigen::MatrixXd beta = make_gsc(5, 3, 1.0, base);
    CHECK(beta.rows() == 5);
    CHECK(beta(0, 0) == 1.0);
    for (int i = 1; i < 5; ++i) {
        CHECK(beta(i, 0) == 0.0);
        for (int l = 1; l <= 3; ++l) CHECK(beta(i, l) == 1.0);
    }

    // x' beta_1 - x' beta_i = delta identically in x
    RngStream rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd x(4);
        x << 1.0, rng.uniform(), rng.uniform(), rng.uniform();
        for (int i = 1; i < 5; ++i) {
            CHECK(std::abs(beta.row(0).dot(x) - beta.row(i).dot(x) - 1.0) < 1e-14);
        }
    }

    // zero slopes reduce to the classic slippage configuration
    Eigen::VectorXd flat(3);
    flat << 2.0, 0.0, 0.0;
    const Eigen::MatrixXd slippage = make_gsc(3, 2, 0.5, flat);
    for (int i = 1; i < 3; ++i) {
        CHECK(slippage(i, 0) == 1.5);
        CHECK(slippage(i, 1) == 0.0);
    }

    CHECK_THROWS_AS(make_gsc(1, 3, 1.0, base), std::invalid_argument);
    CHECK_THROWS_AS(make_gsc(5, 3, 0.0, base), std::invalid_argument);
}

TEST_CASE("benchmark suite configurations") {
    const LinearProblem bench = benchmark_problem(0);
    CHECK(bench.k == 5);
    CHECK(bench.d == 3);
    CHECK(bench.design.m() == 8);
    CHECK(bench.noise == NoiseKind::Hom);
    for (double s : bench.sigma) CHECK(s == 10.0);
    CHECK(bench.beta(0, 0) == 1.0);
    CHECK(bench.beta(1, 0) == 0.0);

    CHECK(benchmark_problem(1).k == 2);
    CHECK(benchmark_problem(2).k == 8);

    const LinearProblem iv = benchmark_problem(4);
    CHECK(iv.sigma == std::vector<double>{5.0, 7.5, 10.0, 12.5, 15.0});
    const LinearProblem dv = benchmark_problem(5);
    CHECK(dv.sigma == std::vector<double>{15.0, 12.5, 10.0, 7.5, 5.0});

    const LinearProblem het = benchmark_problem(6);
    CHECK(het.noise == NoiseKind::Het);
    CHECK(het.het_scale == 10.0);
    Eigen::VectorXd x(4);
    x << 1.0, 0.5, 0.5, 0.5;
    CHECK(het.sigma_at(0, x) == doctest::Approx(25.0));  // 10 * (1 + 1.5)
    CHECK(het.sigma_at(1, x) == doctest::Approx(15.0));  // 10 * (0 + 1.5)

    CHECK(benchmark_problem(7).d == 1);
    CHECK(benchmark_problem(7).design.m() == 2);
    CHECK(benchmark_problem(8).d == 5);
    CHECK(benchmark_problem(8).design.m() == 32);

    CHECK_THROWS_AS(benchmark_problem(9), std::invalid_argument);
    CHECK_THROWS_AS(benchmark_problem(-1), std::invalid_argument);
}

TEST_CASE("problem 3 coefficients are a fixed documented draw") {
    const LinearProblem a = benchmark_problem(3);
    const LinearProblem b = benchmark_problem(3);
    CHECK(a.beta.isApprox(b.beta, 0.0));
    CHECK(a.beta.minCoeff() >= 0.0);
    CHECK(a.beta.maxCoeff() <= 5.0);
    CHECK_FALSE(a.beta.isApprox(benchmark_problem(0).beta));
}

TEST_CASE("true best") {
    const LinearProblem gsc = benchmark_problem(0);
    RngStream rng(3);
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd x(4);
        x << 1.0, rng.uniform(), rng.uniform(), rng.uniform();
        CHECK(true_best(gsc, x) == std::vector<int>{0});
    }

    LinearProblem tied = gsc;
    tied.beta.row(2) = tied.beta.row(0);
    Eigen::VectorXd x(4);
    x << 1.0, 0.3, 0.6, 0.9;
    CHECK(true_best(tied, x) == std::vector<int>{0, 2});

    const LinearProblem p3 = benchmark_problem(3);
    Eigen::VectorXd origin(4);
    origin << 1.0, 0.0, 0.0, 0.0;
    int expect = 0;
    for (int i = 1; i < p3.k; ++i) {
        if (p3.beta(i, 0) > p3.beta(expect, 0)) expect = i;
    }
    CHECK(true_best(p3, origin) == std::vector<int>{expect});
}

TEST_CASE("linear oracle moments") {
    LinearProblem tiny = benchmark_problem(0);
    tiny.sigma.assign(tiny.k, 1e-12);
    const SimulationOracle quiet = linear_oracle(tiny);
    RngStream rng(12);
    Eigen::VectorXd x(4);
    x << 1.0, 0.5, 0.0, 0.5;
    for (int i = 0; i < tiny.k; ++i) {
        CHECK(std::abs(quiet.sample(i, x, rng) - tiny.mean_at(i, x)) < 1e-10);
    }

    const LinearProblem bench = benchmark_problem(0);
    const SimulationOracle oracle = linear_oracle(bench);
    Eigen::VectorXd origin(4);
    origin << 1.0, 0.0, 0.0, 0.0;
    RngStream stream(99);
    double acc = 0.0, acc2 = 0.0;
    const int n = 100000;
    for (int t = 0; t < n; ++t) {
        const double y = oracle.sample(0, origin, stream);
        acc += y;
        acc2 += y * y;
    }
    const double mean = acc / n;
    const double sd = std::sqrt((acc2 - n * mean * mean) / (n - 1));
    CHECK(mean == doctest::Approx(1.0).epsilon(0.1));
    CHECK(sd == doctest::Approx(10.0).epsilon(0.02));
}

TEST_CASE("heteroscedastic oracle noise grows with the mean") {
    const LinearProblem het = benchmark_problem(6);
    const SimulationOracle oracle = linear_oracle(het);
    auto sd_at = [&](const Eigen::VectorXd& x, std::uint64_t seed) {
        RngStream stream(seed);
        double acc = 0.0, acc2 = 0.0;
        const int n = 100000;
        for (int t = 0; t < n; ++t) {
            const double y = oracle.sample(0, x, stream);
            acc += y;
            acc2 += y * y;
        }
        const double mean = acc / n;
        return std::sqrt((acc2 - n * mean * mean) / (n - 1));
    };
    Eigen::VectorXd lo(4), hi(4);
    lo << 1.0, 0.0, 0.0, 0.0;
    hi << 1.0, 1.0, 1.0, 1.0;
    const double ratio = sd_at(hi, 5) / sd_at(lo, 6);
    CHECK(ratio == doctest::Approx(het.mean_at(0, hi) / het.mean_at(0, lo)).epsilon(0.02));
}

TEST_CASE("het problems reject negative sigma on the support") {
    LinearProblem bad = benchmark_problem(6);
    bad.beta(0, 0) = -10.0;  // sigma_1(x) < 0 near the origin corner
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    // zero at a corner (the GSC het benchmark itself) stays valid
    CHECK_NOTHROW(benchmark_problem(6).validate());
}

TEST_CASE("after-observation selection beats the best fixed alternative on average") {
    for (int id : {0, 3}) {
        const LinearProblem p = benchmark_problem(id);
        const ExpectationScheme scheme = default_scheme_for(p.d);
        const double e_max = expect_over_covariates(
            [&](const Eigen::VectorXd& x) {
                double best = -INFINITY;
                for (int i = 0; i < p.k; ++i) best = std::max(best, p.mean_at(i, x));
                return best;
            },
            p.covariate_dist, scheme);
        double best_fixed = -INFINITY;
        for (int i = 0; i < p.k; ++i) {
            best_fixed = std::max(
                best_fixed, expect_over_covariates(
                                [&](const Eigen::VectorXd& x) { return p.mean_at(i, x); },
                                p.covariate_dist, scheme));
        }
        CHECK(e_max >= best_fixed - 1e-12);
    }
}

TEST_SUITE_END();
