#pragma once

#include <Eigen/Dense>
#include <array>

#include "rscov/design.hpp"
#include "rscov/procedures.hpp"

namespace rscov {

// Monthly-step Markov reward model of Barrett's esophagus progression under
// three regimens: surveillance only, aspirin chemoprevention, statin
// chemoprevention. Covariates x = (1, starting age, annual progression rate,
// aspirin effect, statin effect). All parameters are synthetic and
// user-adjustable; kernels are row-stochastic by construction with death
// absorbing.
struct MarkovRewardModel {
    enum State {
        kBarrett = 0,
        kLowGradeDysplasia = 1,
        kHighGradeDysplasia = 2,
        kCancerUndetected = 3,
        kCancerDetected = 4,
        kDeath = 5,
        kNumStates = 6,
    };
    static constexpr int kNumRegimens = 3;

    // per-state quality weight for one month alive
    std::array<double, kNumStates> qaly_weight{1.0, 0.97, 0.93, 0.85, 0.68, 0.0};
    // monthly utility multiplier while on each regimen (drug side effects)
    std::array<double, kNumRegimens> regimen_utility{1.0, 0.998, 0.996};
    double low_grade_accel = 2.0;       // LGD -> HGD progression multiplier
    double high_grade_accel = 3.0;      // HGD -> cancer progression multiplier
    double ablation_prob = 0.05;        // HGD -> BE, dysplasia treated under surveillance
    double detection_prob = 1.0 / 6.0;  // undetected cancer found per month
    double undetected_mortality = 0.01;
    double detected_mortality = 0.02;
    // all-cause mortality hazard per year: scale * exp(shape * age), death
    // certain at max_age
    double gompertz_scale = 5.0e-5;
    double gompertz_shape = 0.092;
    double max_age = 110.0;
    // covariate supports
    double age_lo = 55.0, age_hi = 80.0;
    double risk_hi = 0.1;

    void validate() const;
    double monthly_death_prob(double age) const;
    // p_eff = (1 - (1 - risk)^(1/12)) * (1 - drug effect)
    double monthly_progression(int regimen, const Eigen::VectorXd& x) const;
    Eigen::Matrix<double, kNumStates, kNumStates> kernel(int regimen, const Eigen::VectorXd& x,
                                                         double age) const;
    void validate_covariate(const Eigen::VectorXd& x) const;
};

// One patient trajectory from the starting age until death; returns
// accumulated quality-adjusted life years.
double simulate_patient(const MarkovRewardModel& model, int regimen, const Eigen::VectorXd& x,
                        RngStream& rng);

// Exact expected QALYs by propagating the state distribution month by month.
double expected_qalys(const MarkovRewardModel& model, int regimen, const Eigen::VectorXd& x);

struct CaseStudy {
    MarkovRewardModel model;
    SimulationOracle oracle;       // k = 3 regimens, samples QALYs per patient
    CovariateDistribution covariate_dist;
    CovariateSpace space;
    DesignMatrix design;           // 16 points
};

// The esophageal-cancer prevention instance: Table-3-style covariate
// marginals (discrete age with mean 64.78, Uniform(0, 0.1) risk, triangular
// drug effects with means 0.53 and 0.54) and the 2^4 factorial design over
// ages {60, 70}, risks {0.1/3, 0.2/3} and drug effects {1/3, 2/3}.
CaseStudy case_study_problem();
CaseStudy case_study_problem(const MarkovRewardModel& model);

// Personalized decision rule vs the two constant rules: best regimen at the
// mean covariate and best mean performance. Truth comes from the exact
// expected-QALY recursion; PCS terms use the strict indifference-zone
// indicator.
struct CaseStudyReport {
    double h = 0.0;
    int best_at_mean = 0;          // argmax_i y_i(E[X])
    int best_mean = 0;             // argmax_i E[y_i(X)]
    double pcs_personalized = 0.0;
    double pcs_best_at_mean = 0.0;
    double pcs_best_mean = 0.0;
    double qalys_personalized = 0.0;
    double qalys_best_at_mean = 0.0;
    double qalys_best_mean = 0.0;
    double expected_best = 0.0;      // E[max_i y_i(X)], exact scheme
    double mean_perf_best_mean = 0.0;  // E[y_{best_mean}(X)]
    double near_tie_share = 0.0;     // draws whose top-two gap is below delta
    double mean_total_samples = 0.0;
};

CaseStudyReport run_case_study(const CaseStudy& cs, ProcedureKind procedure,
                               const ProcedureConfig& config, int replications,
                               int test_covariates, std::uint64_t seed);

}  // namespace rscov
