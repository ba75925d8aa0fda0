#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rscov/constants.hpp"
#include "rscov/design.hpp"
#include "rscov/rng.hpp"

namespace rscov {

enum class ProcedureKind { FDHom, FDHet };

// Sampling contract: one observation of alternative i (0-based) at the
// augmented design point x. Calls with independent streams must yield
// independent samples.
struct SimulationOracle {
    int k = 0;
    std::string descriptor;
    std::function<double(int i, const Eigen::VectorXd& x, RngStream& rng)> sample;
};

struct ProcedureConfig {
    double alpha = 0.05;
    double delta = 1.0;   // indifference-zone parameter
    int n0 = 2;           // first-stage size
    PcsForm form = PcsForm::Expectation;
    double h = 0.0;       // from solve_h, must match the procedure's mode

    void validate() const;
};

// k estimated coefficient vectors; the decision rule is
// select(x) = argmax_i x' beta_i with ties to the smallest index.
struct DecisionRule {
    Eigen::MatrixXd betas;  // k x (d+1)

    int k() const { return static_cast<int>(betas.rows()); }
    int select(const Eigen::VectorXd& x) const;
};

struct BudgetReport {
    VarianceMode mode = VarianceMode::Hom;
    int m = 0;
    // Hom: one N_i per alternative. Het: N_ij in row-major (i * m + j) order.
    std::vector<long long> sizes;
    long long total_samples = 0;
    long long first_stage_samples = 0;
};

// Step 1 pooled least squares: (1/n) (X'X)^-1 X' sum_l Y_l
Eigen::VectorXd pooled_ls_estimate(const std::vector<Eigen::VectorXd>& samples,
                                   const DesignMatrix& design);

// Step 1 pooled variance: sum_l |Y_l - X beta|^2 / (n0 m - d - 1)
double pooled_variance(const std::vector<Eigen::VectorXd>& samples,
                       const Eigen::VectorXd& beta_hat, const DesignMatrix& design, int n0);

// Step 2 sample size N = max(ceil(h^2 S^2 / delta^2), n0)
long long stage2_size(double h, double s2, double delta, int n0);

// FDHet step 1 statistics for one (i, j): sample mean and unbiased variance.
std::pair<double, double> pointwise_stats(const std::vector<double>& samples);

std::pair<DecisionRule, BudgetReport> run_fdhom(const SimulationOracle& oracle,
                                                const DesignMatrix& design,
                                                const ProcedureConfig& config, RngStream rng);

std::pair<DecisionRule, BudgetReport> run_fdhet(const SimulationOracle& oracle,
                                                const DesignMatrix& design,
                                                const ProcedureConfig& config, RngStream rng);

inline int select(const DecisionRule& rule, const Eigen::VectorXd& x) { return rule.select(x); }

}  // namespace rscov
