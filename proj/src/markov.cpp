#include "rscov/markov.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace rscov {

namespace {

using Kernel = Eigen::Matrix<double, MarkovRewardModel::kNumStates, MarkovRewardModel::kNumStates>;

double drug_effect(int regimen, const Eigen::VectorXd& x) {
    switch (regimen) {
        case 0:
            return 0.0;
        case 1:
            return x(3);
        case 2:
            return x(4);
        default:
            throw std::invalid_argument("regimen must be 0, 1 or 2");
    }
}

}  // namespace

void MarkovRewardModel::validate() const {
    for (double w : qaly_weight) {
        if (!(w >= 0.0 && w <= 1.0)) {
            throw std::invalid_argument("MarkovRewardModel: QALY weights must be in [0, 1]");
        }
    }
    if (qaly_weight[kDeath] != 0.0) {
        throw std::invalid_argument("MarkovRewardModel: death must carry zero QALY weight");
    }
    for (double u : regimen_utility) {
        if (!(u >= 0.0 && u <= 1.0)) {
            throw std::invalid_argument("MarkovRewardModel: regimen utilities must be in [0, 1]");
        }
    }
    const double p_max = 1.0 - std::pow(1.0 - risk_hi, 1.0 / 12.0);
    if (low_grade_accel * p_max > 1.0 || high_grade_accel * p_max + ablation_prob > 1.0) {
        throw std::invalid_argument("MarkovRewardModel: progression multipliers too large for the risk support");
    }
    if (detection_prob + undetected_mortality > 1.0 || detected_mortality > 1.0 ||
        detection_prob < 0.0 || undetected_mortality < 0.0 || detected_mortality < 0.0 ||
        ablation_prob < 0.0) {
        throw std::invalid_argument("MarkovRewardModel: transition probabilities out of range");
    }
    if (!(gompertz_scale > 0.0) || !(gompertz_shape > 0.0)) {
        throw std::invalid_argument("MarkovRewardModel: Gompertz parameters must be positive");
    }
    if (!(age_lo < age_hi && age_hi < max_age)) {
        throw std::invalid_argument("MarkovRewardModel: need age_lo < age_hi < max_age");
    }
    if (!(risk_hi > 0.0 && risk_hi < 1.0)) {
        throw std::invalid_argument("MarkovRewardModel: risk_hi must be in (0, 1)");
    }
}

double MarkovRewardModel::monthly_death_prob(double age) const {
    if (age >= max_age) return 1.0;
    const double hazard = gompertz_scale * std::exp(gompertz_shape * age);
    return -std::expm1(-hazard / 12.0);
}

double MarkovRewardModel::monthly_progression(int regimen, const Eigen::VectorXd& x) const {
    const double annual = x(2);
    const double monthly = 1.0 - std::pow(1.0 - annual, 1.0 / 12.0);
    return monthly * (1.0 - drug_effect(regimen, x));
}

void MarkovRewardModel::validate_covariate(const Eigen::VectorXd& x) const {
    if (x.size() != 5 || x(0) != 1.0) {
        throw std::invalid_argument("invalid covariate: expected (1, age, risk, aspirin effect, statin effect)");
    }
    if (x(1) < age_lo || x(1) > age_hi || x(2) < 0.0 || x(2) > risk_hi || x(3) < 0.0 ||
        x(3) > 1.0 || x(4) < 0.0 || x(4) > 1.0) {
        throw std::invalid_argument("invalid covariate: outside the model's support");
    }
}

Kernel MarkovRewardModel::kernel(int regimen, const Eigen::VectorXd& x, double age) const {
    validate_covariate(x);
    const double p = monthly_progression(regimen, x);
    const double q = monthly_death_prob(age);

    Kernel k = Kernel::Zero();
    auto fill_row = [&](int s, std::initializer_list<std::pair<int, double>> moves) {
        double stay = 1.0;
        for (const auto& [to, prob] : moves) {
            k(s, to) += (1.0 - q) * prob;
            stay -= prob;
        }
        k(s, s) += (1.0 - q) * stay;
        k(s, kDeath) += q;
    };
    fill_row(kBarrett, {{kLowGradeDysplasia, p}});
    fill_row(kLowGradeDysplasia, {{kHighGradeDysplasia, low_grade_accel * p}});
    fill_row(kHighGradeDysplasia,
             {{kCancerUndetected, high_grade_accel * p}, {kBarrett, ablation_prob}});
    fill_row(kCancerUndetected,
             {{kCancerDetected, detection_prob}, {kDeath, undetected_mortality}});
    fill_row(kCancerDetected, {{kDeath, detected_mortality}});
    k(kDeath, kDeath) = 1.0;
    return k;
}

double simulate_patient(const MarkovRewardModel& model, int regimen, const Eigen::VectorXd& x,
                        RngStream& rng) {
    model.validate_covariate(x);
    const double p = model.monthly_progression(regimen, x);
    const double utility = model.regimen_utility.at(regimen);

    const double p_lgd = model.low_grade_accel * p;
    const double p_hgd = model.high_grade_accel * p;

    double hazard = model.gompertz_scale * std::exp(model.gompertz_shape * x(1));
    const double hazard_growth = std::exp(model.gompertz_shape / 12.0);
    const long max_months = static_cast<long>(std::ceil((model.max_age - x(1)) * 12.0));

    // end-of-cycle accrual: a month contributes only if it is survived
    int state = MarkovRewardModel::kBarrett;
    double qalys = 0.0;
    for (long t = 0; t < max_months && state != MarkovRewardModel::kDeath; ++t) {
        if (rng.uniform() < -std::expm1(-hazard / 12.0)) {
            break;
        }
        hazard *= hazard_growth;
        const double u = rng.uniform();
        switch (state) {
            case MarkovRewardModel::kBarrett:
                if (u < p) state = MarkovRewardModel::kLowGradeDysplasia;
                break;
            case MarkovRewardModel::kLowGradeDysplasia:
                if (u < p_lgd) state = MarkovRewardModel::kHighGradeDysplasia;
                break;
            case MarkovRewardModel::kHighGradeDysplasia:
                if (u < p_hgd) {
                    state = MarkovRewardModel::kCancerUndetected;
                } else if (u < p_hgd + model.ablation_prob) {
                    state = MarkovRewardModel::kBarrett;
                }
                break;
            case MarkovRewardModel::kCancerUndetected:
                if (u < model.detection_prob) {
                    state = MarkovRewardModel::kCancerDetected;
                } else if (u < model.detection_prob + model.undetected_mortality) {
                    state = MarkovRewardModel::kDeath;
                }
                break;
            case MarkovRewardModel::kCancerDetected:
                if (u < model.detected_mortality) state = MarkovRewardModel::kDeath;
                break;
            default:
                break;
        }
        if (state != MarkovRewardModel::kDeath) {
            qalys += model.qaly_weight[state] * utility / 12.0;
        }
    }
    return qalys;
}

double expected_qalys(const MarkovRewardModel& model, int regimen, const Eigen::VectorXd& x) {
    model.validate_covariate(x);
    const double utility = model.regimen_utility.at(regimen);
    const long max_months = static_cast<long>(std::ceil((model.max_age - x(1)) * 12.0));

    Eigen::Matrix<double, MarkovRewardModel::kNumStates, 1> dist;
    dist.setZero();
    dist(MarkovRewardModel::kBarrett) = 1.0;

    double qalys = 0.0;
    for (long t = 0; t < max_months; ++t) {
        const Kernel k = model.kernel(regimen, x, x(1) + t / 12.0);
        dist = k.transpose() * dist;
        double month_value = 0.0;
        for (int s = 0; s < MarkovRewardModel::kNumStates; ++s) {
            month_value += dist(s) * model.qaly_weight[s];
        }
        qalys += month_value * utility / 12.0;
        if (dist(MarkovRewardModel::kDeath) > 1.0 - 1e-12) break;
    }
    return qalys;
}

CaseStudy case_study_problem() { return case_study_problem(MarkovRewardModel{}); }

CaseStudy case_study_problem(const MarkovRewardModel& model) {
    model.validate();

    CaseStudy cs;
    cs.model = model;

    // discrete age pmf on {55..80}: weights proportional to (88.2 - age),
    // a linearly declining profile whose mean is 64.78
    FinitePmfMarginal age;
    double total = 0.0;
    for (int a = 55; a <= 80; ++a) total += 88.2 - a;
    for (int a = 55; a <= 80; ++a) {
        age.values.push_back(a);
        age.probs.push_back((88.2 - a) / total);
    }
    cs.covariate_dist.marginals = {age, UniformMarginal{0.0, 0.1},
                                   TriangularMarginal{0.0, 0.59, 1.0},
                                   TriangularMarginal{0.0, 0.62, 1.0}};
    cs.space = cs.covariate_dist.support();

    const double ages[2] = {60.0, 70.0};
    const double risks[2] = {0.1 / 3.0, 0.2 / 3.0};
    const double effects[2] = {1.0 / 3.0, 2.0 / 3.0};
    Eigen::MatrixXd pts(16, 5);
    int r = 0;
    for (double a : ages) {
        for (double rk : risks) {
            for (double e3 : effects) {
                for (double e4 : effects) {
                    pts.row(r++) << 1.0, a, rk, e3, e4;
                }
            }
        }
    }
    cs.design = DesignMatrix::build(pts);

    auto shared = std::make_shared<MarkovRewardModel>(model);
    cs.oracle.k = MarkovRewardModel::kNumRegimens;
    cs.oracle.descriptor = "markov:esophageal-cancer-prevention";
    cs.oracle.sample = [shared](int i, const Eigen::VectorXd& x, RngStream& rng) {
        return simulate_patient(*shared, i, x, rng);
    };
    return cs;
}

CaseStudyReport run_case_study(const CaseStudy& cs, ProcedureKind procedure,
                               const ProcedureConfig& config, int replications,
                               int test_covariates, std::uint64_t seed) {
    config.validate();
    if (replications < 1 || test_covariates < 1) {
        throw std::invalid_argument("run_case_study: need R >= 1 and T >= 1");
    }
    const int k = cs.oracle.k;
    const MarkovRewardModel& model = cs.model;

    CaseStudyReport report;
    report.h = config.h;

    // constant rules from the exact surfaces
    ExpectationScheme scheme;
    scheme.kind = ExpectationKind::TensorQuadrature;
    scheme.nodes_or_samples = 8;
    const ExpectationNodes nodes = expectation_nodes(cs.covariate_dist, scheme);
    std::vector<double> mean_perf(k, 0.0);
    for (long n = 0; n < nodes.points.rows(); ++n) {
        double row_best = -INFINITY;
        for (int i = 0; i < k; ++i) {
            const double y = expected_qalys(model, i, nodes.points.row(n));
            mean_perf[i] += nodes.weights[n] * y;
            row_best = std::max(row_best, y);
        }
        report.expected_best += nodes.weights[n] * row_best;
    }
    const Eigen::VectorXd mean_x = cs.covariate_dist.mean();
    double best_at_mean_value = -INFINITY;
    for (int i = 0; i < k; ++i) {
        if (mean_perf[i] > mean_perf[report.best_mean]) report.best_mean = i;
        const double y = expected_qalys(model, i, mean_x);
        if (y > best_at_mean_value) {
            best_at_mean_value = y;
            report.best_at_mean = i;
        }
    }
    report.mean_perf_best_mean = mean_perf[report.best_mean];

    const RngStream master(seed);
    long long total_samples = 0;
    double pcs_rule = 0.0, pcs_dag = 0.0, pcs_ddag = 0.0;
    double q_rule = 0.0, q_dag = 0.0, q_ddag = 0.0;
    double near_tie = 0.0;
    std::vector<double> y(k);
    for (int r = 0; r < replications; ++r) {
        RngStream proc_stream = master.child(11, static_cast<std::uint64_t>(r));
        auto [rule, budget] = procedure == ProcedureKind::FDHom
                                  ? run_fdhom(cs.oracle, cs.design, config, proc_stream)
                                  : run_fdhet(cs.oracle, cs.design, config, proc_stream);
        total_samples += budget.total_samples;
        RngStream eval_stream = master.child(12, static_cast<std::uint64_t>(r));
        for (int t = 0; t < test_covariates; ++t) {
            const Eigen::VectorXd x = sample_covariate(cs.covariate_dist, eval_stream);
            double best = -INFINITY, second = -INFINITY;
            for (int i = 0; i < k; ++i) {
                y[i] = expected_qalys(model, i, x);
                if (y[i] > best) {
                    second = best;
                    best = y[i];
                } else {
                    second = std::max(second, y[i]);
                }
            }
            const int sel = rule.select(x);
            pcs_rule += best - y[sel] < config.delta ? 1.0 : 0.0;
            pcs_dag += best - y[report.best_at_mean] < config.delta ? 1.0 : 0.0;
            pcs_ddag += best - y[report.best_mean] < config.delta ? 1.0 : 0.0;
            q_rule += y[sel];
            q_dag += y[report.best_at_mean];
            q_ddag += y[report.best_mean];
            near_tie += best - second < config.delta ? 1.0 : 0.0;
        }
    }
    const double n = static_cast<double>(replications) * test_covariates;
    report.pcs_personalized = pcs_rule / n;
    report.pcs_best_at_mean = pcs_dag / n;
    report.pcs_best_mean = pcs_ddag / n;
    report.qalys_personalized = q_rule / n;
    report.qalys_best_at_mean = q_dag / n;
    report.qalys_best_mean = q_ddag / n;
    report.near_tie_share = near_tie / n;
    report.mean_total_samples = static_cast<double>(total_samples) / replications;
    return report;
}

}  // namespace rscov
