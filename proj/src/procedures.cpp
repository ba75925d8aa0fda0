#include "rscov/procedures.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rscov {

namespace {

constexpr std::uint64_t kStage1Tag = 1;
constexpr std::uint64_t kStage2Tag = 2;

double checked_sample(const SimulationOracle& oracle, int i, const Eigen::VectorXd& x,
                      RngStream& rng) {
    const double y = oracle.sample(i, x, rng);
    if (!std::isfinite(y)) {
        throw NumericalError("oracle '" + oracle.descriptor + "' returned a non-finite sample for alternative " +
                             std::to_string(i + 1));
    }
    return y;
}

}  // namespace

void ProcedureConfig::validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("ProcedureConfig: delta must be > 0");
    if (n0 < 2) throw std::invalid_argument("ProcedureConfig: n0 must be >= 2");
    if (!(h > 0.0)) throw std::invalid_argument("ProcedureConfig: h must be > 0 (solve it first)");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("ProcedureConfig: alpha must be in (0, 1)");
    }
}

int DecisionRule::select(const Eigen::VectorXd& x) const {
    if (x.size() != betas.cols()) {
        throw std::invalid_argument("DecisionRule::select: dimension mismatch");
    }
    int best = 0;
    double best_val = betas.row(0).dot(x);
    for (int i = 1; i < k(); ++i) {
        const double v = betas.row(i).dot(x);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    return best;
}

Eigen::VectorXd pooled_ls_estimate(const std::vector<Eigen::VectorXd>& samples,
                                   const DesignMatrix& design) {
    if (samples.empty()) throw std::invalid_argument("pooled_ls_estimate: need n >= 1 samples");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(design.m());
    for (const auto& y : samples) {
        if (y.size() != design.m()) {
            throw std::invalid_argument("pooled_ls_estimate: replicate vector length mismatch");
        }
        sum += y;
    }
    return design.gram_inverse() * (design.rows().transpose() * sum) /
           static_cast<double>(samples.size());
}

double pooled_variance(const std::vector<Eigen::VectorXd>& samples,
                       const Eigen::VectorXd& beta_hat, const DesignMatrix& design, int n0) {
    const int dof = n0 * design.m() - design.d() - 1;
    if (dof < 1) throw std::invalid_argument("pooled_variance: n0*m - d - 1 must be >= 1");
    if (beta_hat.size() != design.d() + 1) {
        throw std::invalid_argument("pooled_variance: beta dimension mismatch");
    }
    const Eigen::VectorXd fitted = design.rows() * beta_hat;
    double ss = 0.0;
    for (const auto& y : samples) {
        if (y.size() != design.m()) {
            throw std::invalid_argument("pooled_variance: replicate vector length mismatch");
        }
        ss += (y - fitted).squaredNorm();
    }
    return ss / dof;
}

long long stage2_size(double h, double s2, double delta, int n0) {
    if (!(h > 0.0) || s2 < 0.0 || !(delta > 0.0) || n0 < 1) {
        throw std::invalid_argument("stage2_size: invalid inputs");
    }
    const double raw = h * h * s2 / (delta * delta);
    const double ceiled = std::ceil(raw);
    return std::max<long long>(static_cast<long long>(ceiled), n0);
}

std::pair<double, double> pointwise_stats(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("pointwise_stats: need at least 2 samples");
    double mean = 0.0;
    for (double y : samples) mean += y;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double y : samples) ss += (y - mean) * (y - mean);
    return {mean, ss / static_cast<double>(n - 1)};
}

std::pair<DecisionRule, BudgetReport> run_fdhom(const SimulationOracle& oracle,
                                                const DesignMatrix& design,
                                                const ProcedureConfig& config, RngStream rng) {
    config.validate();
    if (oracle.k < 1) throw std::invalid_argument("run_fdhom: oracle must cover k >= 1 alternatives");
    const int k = oracle.k;
    const int m = design.m();
    if (config.n0 * m - design.d() - 1 < 1) {
        throw std::invalid_argument("run_fdhom: n0*m - d - 1 must be >= 1");
    }

    BudgetReport budget;
    budget.mode = VarianceMode::Hom;
    budget.m = m;
    budget.sizes.resize(k);
    budget.first_stage_samples = static_cast<long long>(k) * m * config.n0;

    DecisionRule rule;
    rule.betas.resize(k, design.d() + 1);

    for (int i = 0; i < k; ++i) {
        // Stage 1: n0 replicate vectors across the design points.
        std::vector<Eigen::VectorXd> reps(config.n0, Eigen::VectorXd(m));
        Eigen::VectorXd colsum = Eigen::VectorXd::Zero(m);
        for (int j = 0; j < m; ++j) {
            RngStream s = rng.child(kStage1Tag, static_cast<std::uint64_t>(i),
                                    static_cast<std::uint64_t>(j));
            const Eigen::VectorXd xj = design.point(j);
            for (int l = 0; l < config.n0; ++l) {
                const double y = checked_sample(oracle, i, xj, s);
                reps[l](j) = y;
                colsum(j) += y;
            }
        }
        const Eigen::VectorXd beta1 = pooled_ls_estimate(reps, design);
        const double s2 = pooled_variance(reps, beta1, design, config.n0);
        const long long n_total = stage2_size(config.h, s2, config.delta, config.n0);
        budget.sizes[i] = n_total;

        // Stage 2: N_i - n0 more replicates at every design point.
        for (int j = 0; j < m; ++j) {
            RngStream s = rng.child(kStage2Tag, static_cast<std::uint64_t>(i),
                                    static_cast<std::uint64_t>(j));
            const Eigen::VectorXd xj = design.point(j);
            for (long long l = config.n0; l < n_total; ++l) {
                colsum(j) += checked_sample(oracle, i, xj, s);
            }
        }
        rule.betas.row(i) = design.gram_inverse() *
                            (design.rows().transpose() * colsum) /
                            static_cast<double>(n_total);
    }

    budget.total_samples = 0;
    for (long long n : budget.sizes) budget.total_samples += static_cast<long long>(m) * n;
    return {std::move(rule), std::move(budget)};
}

std::pair<DecisionRule, BudgetReport> run_fdhet(const SimulationOracle& oracle,
                                                const DesignMatrix& design,
                                                const ProcedureConfig& config, RngStream rng) {
    config.validate();
    if (oracle.k < 1) throw std::invalid_argument("run_fdhet: oracle must cover k >= 1 alternatives");
    const int k = oracle.k;
    const int m = design.m();

    BudgetReport budget;
    budget.mode = VarianceMode::Het;
    budget.m = m;
    budget.sizes.resize(static_cast<std::size_t>(k) * m);
    budget.first_stage_samples = static_cast<long long>(k) * m * config.n0;

    DecisionRule rule;
    rule.betas.resize(k, design.d() + 1);

    std::vector<double> stage1(config.n0);
    for (int i = 0; i < k; ++i) {
        Eigen::VectorXd y_hat(m);
        for (int j = 0; j < m; ++j) {
            const Eigen::VectorXd xj = design.point(j);
            RngStream s1 = rng.child(kStage1Tag, static_cast<std::uint64_t>(i),
                                     static_cast<std::uint64_t>(j));
            double sum = 0.0;
            for (int l = 0; l < config.n0; ++l) {
                stage1[l] = checked_sample(oracle, i, xj, s1);
                sum += stage1[l];
            }
            const auto [mean, s2] = pointwise_stats(stage1);
            const long long n_total = stage2_size(config.h, s2, config.delta, config.n0);
            budget.sizes[static_cast<std::size_t>(i) * m + j] = n_total;

            RngStream s2s = rng.child(kStage2Tag, static_cast<std::uint64_t>(i),
                                      static_cast<std::uint64_t>(j));
            for (long long l = config.n0; l < n_total; ++l) {
                sum += checked_sample(oracle, i, xj, s2s);
            }
            y_hat(j) = sum / static_cast<double>(n_total);
        }
        rule.betas.row(i) = design.gram_inverse() * (design.rows().transpose() * y_hat);
    }

    budget.total_samples = 0;
    for (long long n : budget.sizes) budget.total_samples += n;
    return {std::move(rule), std::move(budget)};
}

}  // namespace rscov
