#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "rscov/design.hpp"
#include "rscov/procedures.hpp"

namespace rscov {

enum class NoiseKind { Hom, Het };

// Ground-truth linear instance: true coefficients, noise model, covariate
// model and fixed design. Doubles as the simulation oracle for synthetic
// experiments via linear_oracle().
struct LinearProblem {
    int k = 0;
    int d = 0;
    Eigen::MatrixXd beta;  // k x (d+1)
    NoiseKind noise = NoiseKind::Hom;
    std::vector<double> sigma;  // Hom: one sd per alternative
    double het_scale = 0.0;     // Het: sigma_i(x) = het_scale * x' beta_i
    std::function<double(int, const Eigen::VectorXd&)> het_sigma_fn;  // optional override
    CovariateDistribution covariate_dist;
    CovariateSpace space;
    DesignMatrix design;
    std::string name;

    double mean_at(int i, const Eigen::VectorXd& x) const { return beta.row(i).dot(x); }
    double sigma_at(int i, const Eigen::VectorXd& x) const;
    void validate() const;
};

// Generalized slippage configuration: beta_1 = base, and every inferior
// alternative keeps the slopes but has its intercept lowered by exactly delta,
// so x' beta_1 - x' beta_i = delta for every x.
Eigen::MatrixXd make_gsc(int k, int d, double delta, const Eigen::VectorXd& base_beta1);

// The nine test problems: 0 is the benchmark (k=5, d=3, GSC, sigma=10,
// X ~ U[0,1]^3, 8 design points with entries in {0, 0.5}); 1-8 vary one
// factor at a time (k=2, k=8, random betas, IV, DV, heteroscedastic noise,
// d=1, d=5).
LinearProblem benchmark_problem(int id);

// All indices attaining max_i x' beta_i (exposes exact ties).
std::vector<int> true_best(const LinearProblem& problem, const Eigen::VectorXd& x);

SimulationOracle linear_oracle(const LinearProblem& problem);

// fixed seed for the problem-3 coefficient draw, so the non-GSC instance is
// reproducible across builds
constexpr std::uint64_t kProblem3BetaSeed = 20170929;

}  // namespace rscov
