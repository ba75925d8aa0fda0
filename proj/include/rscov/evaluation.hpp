#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "rscov/problems.hpp"

namespace rscov {

struct ExperimentPlan {
    LinearProblem problem;
    ProcedureKind procedure = ProcedureKind::FDHom;
    ProcedureConfig config;
    int replications = 1;     // R macro-replications
    int test_covariates = 1;  // T fresh covariates per replication
    std::uint64_t master_seed = 0;
    int workers = 1;

    void validate() const;
};

struct ReplicationRecord {
    long long total_samples = 0;
    double pcs_e_term = 0.0;  // share of good selections over the T test covariates
    bool good_at_x0 = false;
};

struct ExperimentReport {
    double h_used = 0.0;
    double mean_total_samples = 0.0;
    double pcs_e = 0.0;
    double pcs_min = 0.0;
    double pcs_e_se = 0.0;
    double pcs_min_se = 0.0;
    Eigen::VectorXd x0;  // PCS_min evaluation point
    std::vector<ReplicationRecord> records;
};

// Good selection at x: the selected alternative is within delta of the best,
// strictly (the indicator uses "< delta").
bool good_selection(const LinearProblem& problem, const DecisionRule& rule,
                    const Eigen::VectorXd& x, double delta);

// Double average over R rules and T fresh covariate draws per rule.
double estimate_pcs_e(const std::vector<DecisionRule>& rules, const LinearProblem& problem,
                      double delta, int test_covariates, RngStream rng);

// Share of rules making a good selection at x0 (the maximizer of V).
double estimate_pcs_min(const std::vector<DecisionRule>& rules, const LinearProblem& problem,
                        double delta, const Eigen::VectorXd& x0);

// R independent procedure runs with per-replication substreams; deterministic
// for a fixed master seed regardless of the worker count.
ExperimentReport run_experiment(const ExperimentPlan& plan);

struct LfcArm {
    Eigen::MatrixXd beta;
    double pcs_e = 0.0;
    double mean_diff = 0.0;  // GSC pcs - this arm's pcs, paired by seed
    double diff_se = 0.0;
};

struct LfcReport {
    double gsc_pcs_e = 0.0;
    std::vector<LfcArm> arms;
};

// Stress test of the least-favorable-configuration property: the GSC arm is
// compared against perturbed configurations where at least one inferior
// intercept is lowered beyond delta, with common seeds across arms.
LfcReport lfc_stress_test(const DesignMatrix& design, int k, double delta,
                          const ProcedureConfig& config, int n_configs, int replications,
                          int test_covariates, RngStream rng, int workers = 1);

}  // namespace rscov
