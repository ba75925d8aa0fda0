#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "rscov/rng.hpp"

namespace rscov {

// Fixed design: m augmented points (leading coordinate 1) with the Gram
// inverse (X'X)^-1 cached at construction.
class DesignMatrix {
  public:
    // Default-constructed object is empty (m() == 0) until built.
    DesignMatrix() = default;

    // rows: m x (d+1), first column all ones. Throws std::invalid_argument on
    // a singular or badly conditioned Gram matrix (condition number > 1e12).
    static DesignMatrix build(const Eigen::MatrixXd& points);

    const Eigen::MatrixXd& rows() const { return x_; }
    const Eigen::MatrixXd& gram_inverse() const { return gram_inv_; }
    Eigen::VectorXd point(int j) const { return x_.row(j); }
    int m() const { return static_cast<int>(x_.rows()); }
    int d() const { return static_cast<int>(x_.cols()) - 1; }
    double condition_number() const { return cond_; }

  private:
    Eigen::MatrixXd x_;
    Eigen::MatrixXd gram_inv_;
    double cond_ = 0.0;
};

// V(x) = x' (X'X)^-1 x
double quadratic_form(const Eigen::VectorXd& x, const DesignMatrix& design);

struct Interval {
    double lo;
    double hi;
};
using FiniteSet = std::vector<double>;
using SpaceComponent = std::variant<Interval, FiniteSet>;

// Support of the covariates, Theta = {1} x Theta_c, one component per
// covariate dimension (the leading 1 is implied).
struct CovariateSpace {
    std::vector<SpaceComponent> dims;

    int d() const { return static_cast<int>(dims.size()); }
    void validate() const;
    bool contains(const Eigen::VectorXd& augmented, double tol = 1e-9) const;
};

struct UniformMarginal {
    double lo;
    double hi;
};
struct TriangularMarginal {
    double lo;
    double mode;
    double hi;
};
struct FinitePmfMarginal {
    std::vector<double> values;
    std::vector<double> probs;
};
using Marginal = std::variant<UniformMarginal, TriangularMarginal, FinitePmfMarginal>;

struct CovariateDistribution {
    std::vector<Marginal> marginals;

    int d() const { return static_cast<int>(marginals.size()); }
    void validate() const;
    double marginal_mean(int dim) const;
    Eigen::VectorXd mean() const;  // augmented, leading 1
    CovariateSpace support() const;
};

CovariateDistribution uniform_box(int d, double lo = 0.0, double hi = 1.0);

enum class ExpectationKind { TensorQuadrature, QuasiMonteCarlo, PlainMonteCarlo };

struct ExpectationScheme {
    ExpectationKind kind = ExpectationKind::TensorQuadrature;
    // per-dimension nodes for tensor quadrature, total points otherwise
    int nodes_or_samples = 16;
    std::optional<std::uint64_t> seed;

    void validate() const;
};

// tensor quadrature up to d = 4, scrambled quasi-Monte Carlo beyond
ExpectationScheme default_scheme_for(int d);

struct ExpectationNodes {
    Eigen::MatrixXd points;        // n x (d+1), augmented
    std::vector<double> weights;   // sum to 1
};
ExpectationNodes expectation_nodes(const CovariateDistribution& dist,
                                   const ExpectationScheme& scheme);

double expect_over_covariates(const std::function<double(const Eigen::VectorXd&)>& f,
                              const CovariateDistribution& dist,
                              const ExpectationScheme& scheme);

// One draw of the augmented covariate vector.
Eigen::VectorXd sample_covariate(const CovariateDistribution& dist, RngStream& rng);

struct MaxQuadraticResult {
    Eigen::VectorXd x0;  // augmented maximizer, lexicographically smallest on ties
    double v_max;
};

// Maximize V(x) over Theta. The quadratic form is convex, so the maximum is
// attained at an extreme point of the convex hull: intervals contribute their
// endpoints, finite sets their min and max.
MaxQuadraticResult max_quadratic(const CovariateSpace& space, const DesignMatrix& design);

}  // namespace rscov
