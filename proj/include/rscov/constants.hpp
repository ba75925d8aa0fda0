#pragma once

#include <Eigen/Dense>
#include <optional>

#include "rscov/design.hpp"
#include "rscov/numerics.hpp"

namespace rscov {

enum class VarianceMode { Hom, Het };
enum class PcsForm { Expectation, Minimum };

// Everything needed to pin down the critical constant h for a two-stage
// procedure: in Hom mode the mixing density is chi-squared with
// nu = n0*m - d - 1 degrees of freedom, in Het mode it is the smallest order
// statistic of m iid chi-squared(n0 - 1) variables.
struct HProblem {
    VarianceMode mode = VarianceMode::Hom;
    PcsForm form = PcsForm::Expectation;
    int k = 2;
    int n0 = 2;
    DesignMatrix design;
    std::optional<CovariateDistribution> covariate_dist;  // required for Expectation
    std::optional<CovariateSpace> space;                  // required for Minimum
    double alpha = 0.05;
    ExpectationScheme scheme;
    QuadratureSpec quad;

    int dof() const;
    void validate() const;
};

// Lower bound on the conditional PCS given V(x) = v:
//   B(h, v) = int_0^inf [ int_0^inf Phi(h / sqrt(nu (1/t + 1/s) v)) p(s) ds ]^(k-1) p(t) dt,
// strictly increasing in h, strictly decreasing in v.
double pcs_bound_given_v(double h, double v, const HProblem& prob);

struct HSolution {
    double h = 0.0;
    int dof = 0;
    // minimum form: where the bound is tightest (the maximizer of V)
    Eigen::VectorXd x0;
    double v_max = 0.0;
    // expectation form: number of nodes the expectation was evaluated on
    long node_count = 0;
};

// Solve B for h so the unconditional bound hits the target:
// expectation form  E_X[B(h, V(X))] = target, minimum form  B(h, v_max) = target.
HSolution solve_h(const HProblem& prob, double target);
HSolution solve_h(const HProblem& prob);  // target = 1 - alpha

}  // namespace rscov
