// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Runs end to end on a single core in a couple of minutes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "rscov/config.hpp"
#include "rscov/evaluation.hpp"
#include "rscov/reference_tables.hpp"
#include "../support/oracles.hpp"

using namespace rscov;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void report(int criterion, bool ok, const std::string& what, double seconds) {
    std::printf("[%s] criterion %2d: %s (%.1f s)\n", ok ? "PASS" : "FAIL", criterion,
                what.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

HProblem make_hproblem(int id, VarianceMode mode, PcsForm form) {
    const LinearProblem lp = benchmark_problem(id);
    HProblem hp;
    hp.mode = mode;
    hp.form = form;
    hp.k = lp.k;
    hp.n0 = 50;
    hp.design = lp.design;
    hp.covariate_dist = lp.covariate_dist;
    hp.space = lp.space;
    hp.alpha = 0.05;
    hp.scheme = default_scheme_for(lp.d);
    return hp;
}

// solved constants shared across criteria
std::map<std::string, double> g_h;

double solved(int id, VarianceMode mode, PcsForm form) {
    const std::string key = std::to_string(id) + (mode == VarianceMode::Hom ? "hom" : "het") +
                            (form == PcsForm::Expectation ? "E" : "min");
    auto it = g_h.find(key);
    if (it != g_h.end()) return it->second;
    const double h = solve_h(make_hproblem(id, mode, form)).h;
    g_h[key] = h;
    return h;
}

ExperimentReport run_plan(int problem_id, ProcedureKind proc, PcsForm form, double h, int R,
                          int T, std::uint64_t seed) {
    ExperimentPlan plan;
    plan.problem = benchmark_problem(problem_id);
    plan.procedure = proc;
    plan.config = ProcedureConfig{0.05, 1.0, 50, form, h};
    plan.replications = R;
    plan.test_covariates = T;
    plan.master_seed = seed;
    return run_experiment(plan);
}

void criterion_1() {
    Timer timer;
    struct Row {
        int id;
        VarianceMode mode;
        PcsForm form;
        double ref;
        const char* label;
    };
    const Row rows[] = {
        {0, VarianceMode::Hom, PcsForm::Expectation, 3.423, "table1 benchmark hom"},
        {1, VarianceMode::Hom, PcsForm::Expectation, 2.363, "table1 k=2 hom"},
        {2, VarianceMode::Hom, PcsForm::Expectation, 3.822, "table1 k=8 hom"},
        {7, VarianceMode::Hom, PcsForm::Expectation, 4.612, "table1 d=1 hom"},
        {8, VarianceMode::Hom, PcsForm::Expectation, 2.141, "table1 d=5 hom"},
        {0, VarianceMode::Het, PcsForm::Expectation, 4.034, "table1 benchmark het"},
        {1, VarianceMode::Het, PcsForm::Expectation, 2.781, "table1 k=2 het"},
        {2, VarianceMode::Het, PcsForm::Expectation, 4.510, "table1 k=8 het"},
        {7, VarianceMode::Het, PcsForm::Expectation, 4.924, "table1 d=1 het"},
        {8, VarianceMode::Het, PcsForm::Expectation, 2.710, "table1 d=5 het"},
        {0, VarianceMode::Hom, PcsForm::Minimum, 5.927, "table2 benchmark hom"},
        {0, VarianceMode::Het, PcsForm::Minimum, 6.990, "table2 benchmark het"},
    };
    int bad = 0;
    for (const Row& row : rows) {
        const double h = solved(row.id, row.mode, row.form);
        const double dev = std::abs(h - row.ref);
        const bool ok = dev <= 0.01;
        if (!ok) ++bad;
        std::printf("    %-24s h=%7.4f ref=%6.3f |dh|=%6.4f %s\n", row.label, h, row.ref, dev,
                    ok ? "ok" : "OUT OF TOLERANCE");
    }
    report(1, bad == 0,
           "solved h within +/-0.01 of the published tables, " + std::to_string(12 - bad) +
               "/12 rows (runtime target < 60 s)",
           timer.seconds());
}

void criterion_2() {
    Timer timer;
    const double h_hom = solved(0, VarianceMode::Hom, PcsForm::Expectation);
    const double h_het = solved(0, VarianceMode::Het, PcsForm::Expectation);
    const ExperimentReport hom = run_plan(0, ProcedureKind::FDHom, PcsForm::Expectation, h_hom,
                                          100, 10, 1001);
    const ExperimentReport het = run_plan(0, ProcedureKind::FDHet, PcsForm::Expectation, h_het,
                                          100, 10, 1002);
    const double dev_hom = std::abs(hom.mean_total_samples - 46865.0) / 46865.0;
    const double dev_het = std::abs(het.mean_total_samples - 65138.0) / 65138.0;
    std::printf("    FDHom mean total %.1f vs 46865 (%.2f%%), FDHet %.1f vs 65138 (%.2f%%)\n",
                hom.mean_total_samples, 100.0 * dev_hom, het.mean_total_samples,
                100.0 * dev_het);
    report(2, dev_hom <= 0.03 && dev_het <= 0.03,
           "benchmark mean sample budgets within 3% of the published column (R=100)",
           timer.seconds());
}

void criterion_3() {
    Timer timer;
    const double h = solved(0, VarianceMode::Hom, PcsForm::Expectation);
    const ExperimentReport rep =
        run_plan(0, ProcedureKind::FDHom, PcsForm::Expectation, h, 200, 10000, 1003);
    std::printf("    PCS_E-hat = %.4f (se %.4f)\n", rep.pcs_e, rep.pcs_e_se);
    report(3, rep.pcs_e >= 0.946 && rep.pcs_e <= 0.976,
           "benchmark FDHom PCS_E-hat in [0.946, 0.976] (R=200, T=1e4)", timer.seconds());
}

void criterion_4() {
    Timer timer;
    const double h_hom = solved(0, VarianceMode::Hom, PcsForm::Expectation);
    const double h_het = solved(0, VarianceMode::Het, PcsForm::Expectation);
    const ExperimentReport hom =
        run_plan(6, ProcedureKind::FDHom, PcsForm::Expectation, h_hom, 200, 10000, 1004);
    const ExperimentReport het =
        run_plan(6, ProcedureKind::FDHet, PcsForm::Expectation, h_het, 200, 10000, 1005);
    std::printf("    heteroscedastic problem: FDHom PCS_E-hat = %.4f, FDHet PCS_E-hat = %.4f\n",
                hom.pcs_e, het.pcs_e);
    report(4, hom.pcs_e < 0.95 && het.pcs_e >= 0.95,
           "FDHom misses the 95% target under heteroscedastic noise, FDHet meets it",
           timer.seconds());
}

void criterion_5() {
    Timer timer;
    const double h = solved(0, VarianceMode::Hom, PcsForm::Minimum);
    const ExperimentReport rep =
        run_plan(0, ProcedureKind::FDHom, PcsForm::Minimum, h, 1000, 100, 1006);
    std::printf("    PCS_min-hat = %.4f at x0 = (1, 1, 1, 1)\n", rep.pcs_min);
    report(5, rep.pcs_min >= 0.935 && rep.pcs_min <= 0.985,
           "benchmark FDHom minimum-form PCS_min-hat in [0.935, 0.985] (R=1000)",
           timer.seconds());
}

void criterion_6() {
    Timer timer;
    bool ok = true;
    for (int id : {0, 1, 2, 7, 8}) {
        const double hom_e = solved(id, VarianceMode::Hom, PcsForm::Expectation);
        const double het_e = solved(id, VarianceMode::Het, PcsForm::Expectation);
        ok = ok && het_e >= hom_e;
    }
    const double hom_e = solved(0, VarianceMode::Hom, PcsForm::Expectation);
    const double hom_min = solved(0, VarianceMode::Hom, PcsForm::Minimum);
    const double het_e = solved(0, VarianceMode::Het, PcsForm::Expectation);
    const double het_min = solved(0, VarianceMode::Het, PcsForm::Minimum);
    ok = ok && hom_min >= hom_e && het_min >= het_e;

    const HProblem hp = make_hproblem(0, VarianceMode::Hom, PcsForm::Expectation);
    double prev = -1.0;
    for (int i = 0; i < 20; ++i) {
        const double b = pcs_bound_given_v(0.5 + 0.35 * i, 1.0, hp);
        ok = ok && b > prev;
        prev = b;
    }
    prev = 2.0;
    for (int i = 0; i < 20; ++i) {
        const double b = pcs_bound_given_v(3.4, 0.2 + 0.25 * i, hp);
        ok = ok && b < prev;
        prev = b;
    }
    report(6, ok,
           "orderings h_het >= h_hom and h_min >= h_E; bound monotone in h and v on 20-point "
           "grids",
           timer.seconds());
}

void criterion_7() {
    Timer timer;
    const int reps = 10000;
    const LinearProblem lp = benchmark_problem(0);
    const DesignMatrix& design = lp.design;
    const int m = design.m();
    const int n0 = 20;
    const double h = 3.0, delta = 1.0;
    Eigen::VectorXd x(4);
    x << 1.0, 0.3, 0.6, 0.9;
    const double vx = quadratic_form(x, design);

    // homoscedastic form: sqrt(N) (x'b - x'beta) / (sigma sqrt(V(x)))
    const double sigma = 4.0;
    Eigen::VectorXd beta(4);
    beta << 1.0, -0.5, 2.0, 0.25;
    const Eigen::VectorXd fitted = design.rows() * beta;
    std::vector<double> stats_hom(reps);
    RngStream rng(424242);
    for (int r = 0; r < reps; ++r) {
        RngStream stream = rng.child(r);
        std::vector<Eigen::VectorXd> stage1(n0, Eigen::VectorXd(m));
        Eigen::VectorXd colsum = Eigen::VectorXd::Zero(m);
        for (int l = 0; l < n0; ++l) {
            for (int j = 0; j < m; ++j) {
                stage1[l](j) = fitted(j) + sigma * stream.normal();
                colsum(j) += stage1[l](j);
            }
        }
        const Eigen::VectorXd b1 = pooled_ls_estimate(stage1, design);
        const double s2 = pooled_variance(stage1, b1, design, n0);
        const long long n_total = stage2_size(h, s2, delta, n0);
        for (long long l = n0; l < n_total; ++l) {
            for (int j = 0; j < m; ++j) colsum(j) += fitted(j) + sigma * stream.normal();
        }
        const Eigen::VectorXd bhat =
            design.gram_inverse() * (design.rows().transpose() * colsum) /
            static_cast<double>(n_total);
        stats_hom[r] = std::sqrt(static_cast<double>(n_total)) * (x.dot(bhat) - x.dot(beta)) /
                       (sigma * std::sqrt(vx));
    }
    const double d_hom = testsupport::ks_statistic_vs_normal(stats_hom);

    // heteroscedastic form with per-point variances and sizes
    Eigen::VectorXd sigmas(m);
    for (int j = 0; j < m; ++j) sigmas(j) = 2.0 + 0.5 * j;
    std::vector<double> stats_het(reps);
    RngStream rng2(515151);
    for (int r = 0; r < reps; ++r) {
        RngStream stream = rng2.child(r);
        Eigen::VectorXd y_hat(m), var_term(m);
        for (int j = 0; j < m; ++j) {
            std::vector<double> s1(n0);
            double sum = 0.0;
            for (int l = 0; l < n0; ++l) {
                s1[l] = fitted(j) + sigmas(j) * stream.normal();
                sum += s1[l];
            }
            const auto [mean, s2] = pointwise_stats(s1);
            const long long nj = stage2_size(h, s2, delta, n0);
            for (long long l = n0; l < nj; ++l) sum += fitted(j) + sigmas(j) * stream.normal();
            y_hat(j) = sum / static_cast<double>(nj);
            var_term(j) = sigmas(j) * sigmas(j) / static_cast<double>(nj);
        }
        const Eigen::VectorXd bhat = design.gram_inverse() * (design.rows().transpose() * y_hat);
        const Eigen::VectorXd a = design.rows() * (design.gram_inverse() * x);
        const double var = (a.array().square() * var_term.array()).sum();
        stats_het[r] = (x.dot(bhat) - x.dot(beta)) / std::sqrt(var);
    }
    const double d_het = testsupport::ks_statistic_vs_normal(stats_het);

    const double crit = testsupport::ks_critical(0.01, reps);
    std::printf("    KS distances: hom %.5f, het %.5f (critical %.5f at alpha=0.01, n=%d)\n",
                d_hom, d_het, crit, reps);
    report(7, d_hom <= crit && d_het <= crit,
           "standardized adaptive estimators pass the KS normality test (both variance forms)",
           timer.seconds());
}

void criterion_8() {
    Timer timer;
    bool ok = true;

    auto grid_max = [](const CovariateSpace& space, const DesignMatrix& design) {
        std::vector<std::vector<double>> values(space.d());
        for (int i = 0; i < space.d(); ++i) {
            const auto& iv = std::get<Interval>(space.dims[i]);
            for (double v = iv.lo; v <= iv.hi + 1e-12; v += 0.05) values[i].push_back(v);
        }
        Eigen::VectorXd x(space.d() + 1);
        x(0) = 1.0;
        std::vector<std::size_t> idx(space.d(), 0);
        double best = -1.0;
        while (true) {
            for (int i = 0; i < space.d(); ++i) x(i + 1) = values[i][idx[i]];
            best = std::max(best, quadratic_form(x, design));
            int i = space.d() - 1;
            for (; i >= 0; --i) {
                if (++idx[i] < values[i].size()) break;
                idx[i] = 0;
            }
            if (i < 0) break;
        }
        return best;
    };

    const LinearProblem bench = benchmark_problem(0);
    ok = ok && std::abs(max_quadratic(bench.space, bench.design).v_max -
                        grid_max(bench.space, bench.design)) <= 1e-9;

    RngStream rng(883);
    int built = 0;
    while (built < 10) {
        const int d = 1 + static_cast<int>(rng.uniform() * 3);
        const int m = d + 1 + static_cast<int>(rng.uniform() * 4);
        Eigen::MatrixXd pts(m, d + 1);
        for (int r = 0; r < m; ++r) {
            pts(r, 0) = 1.0;
            for (int c = 1; c <= d; ++c) pts(r, c) = std::round(rng.uniform() * 20.0) / 20.0;
        }
        DesignMatrix dm;
        try {
            dm = DesignMatrix::build(pts);
        } catch (const std::invalid_argument&) {
            continue;
        }
        ++built;
        CovariateSpace space;
        for (int c = 0; c < d; ++c) space.dims.emplace_back(Interval{0.0, 1.0});
        const double corner = max_quadratic(space, dm).v_max;
        const double scan = grid_max(space, dm);
        if (std::abs(corner - scan) > 1e-9) {
            ok = false;
            std::printf("    mismatch on random design %d: corner %.12f vs grid %.12f\n", built,
                        corner, scan);
        }
    }
    report(8, ok,
           "corner enumeration equals the 0.05-step grid maximum of V on the benchmark and 10 "
           "random designs",
           timer.seconds());
}

void criterion_9() {
    Timer timer;
    const double h = solved(0, VarianceMode::Hom, PcsForm::Expectation);
    const LinearProblem bench = benchmark_problem(0);
    const ProcedureConfig config{0.05, 1.0, 50, PcsForm::Expectation, h};
    const LfcReport lfc =
        lfc_stress_test(bench.design, 5, 1.0, config, 5, 200, 2000, RngStream(31337));
    bool ok = true;
    for (std::size_t i = 0; i < lfc.arms.size(); ++i) {
        const LfcArm& arm = lfc.arms[i];
        const bool arm_ok = arm.mean_diff <= 2.0 * arm.diff_se;
        ok = ok && arm_ok;
        std::printf("    perturbation %zu: PCS %.4f, GSC-minus-perturbed %+.4f (se %.4f) %s\n",
                    i + 1, arm.pcs_e, arm.mean_diff, arm.diff_se, arm_ok ? "ok" : "VIOLATION");
    }
    const ExperimentReport bench_rep =
        run_plan(0, ProcedureKind::FDHom, PcsForm::Expectation, h, 200, 10000, 1009);
    const ExperimentReport p3 =
        run_plan(3, ProcedureKind::FDHom, PcsForm::Expectation, h, 200, 10000, 1009);
    std::printf("    non-GSC problem PCS_E-hat %.4f vs GSC benchmark %.4f\n", p3.pcs_e,
                bench_rep.pcs_e);
    ok = ok && (p3.pcs_e - bench_rep.pcs_e >= 0.02);
    report(9, ok,
           "GSC is least favorable: 5 paired perturbations within 2 se, non-GSC beats GSC by >= "
           "0.02",
           timer.seconds());
}

void criterion_10() {
    Timer timer;
    const CaseStudy cs = case_study_problem();
    bool ok = true;

    // kernel rows are stochastic, death absorbing
    for (int regimen = 0; regimen < 3; ++regimen) {
        for (double age : {55.0, 70.0, 105.0}) {
            const auto k = cs.model.kernel(regimen, cs.design.point(regimen * 5), age);
            for (int s = 0; s < MarkovRewardModel::kNumStates; ++s) {
                ok = ok && std::abs(k.row(s).sum() - 1.0) <= 1e-12;
            }
            ok = ok && k(MarkovRewardModel::kDeath, MarkovRewardModel::kDeath) == 1.0;
        }
    }

    // 1e5 simulated patients stay finite
    RngStream rng(606);
    for (int t = 0; t < 100000; ++t) {
        const Eigen::VectorXd x = sample_covariate(cs.covariate_dist, rng);
        const double q = simulate_patient(cs.model, t % 3, x, rng);
        if (!std::isfinite(q) || q < 0.0) {
            ok = false;
            break;
        }
    }

    HProblem hp;
    hp.mode = VarianceMode::Het;
    hp.form = PcsForm::Expectation;
    hp.k = cs.oracle.k;
    hp.n0 = 50;
    hp.design = cs.design;
    hp.covariate_dist = cs.covariate_dist;
    hp.space = cs.space;
    hp.alpha = 0.05;
    hp.scheme = ExpectationScheme{ExpectationKind::TensorQuadrature, 8, std::nullopt};
    const double h = solve_h(hp).h;
    const ProcedureConfig config{0.05, 0.5, 50, PcsForm::Expectation, h};
    const CaseStudyReport rep = run_case_study(cs, ProcedureKind::FDHet, config, 10, 2000, 77);

    std::printf("    h = %.4f, personalized PCS %.4f vs constant rules %.4f / %.4f\n", h,
                rep.pcs_personalized, rep.pcs_best_at_mean, rep.pcs_best_mean);
    std::printf("    E[best-possible QALYs] %.4f >= E[best-mean rule] %.4f\n", rep.expected_best,
                rep.mean_perf_best_mean);
    ok = ok && rep.pcs_personalized >= std::max(rep.pcs_best_at_mean, rep.pcs_best_mean);
    ok = ok && rep.expected_best >= rep.mean_perf_best_mean - 1e-9;
    report(10, ok,
           "case study: kernels stochastic, QALYs finite, personalized rule at least as good as "
           "the constant rules",
           timer.seconds());
}

}  // namespace

int main() {
    Timer total;
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    std::printf("%d/10 criteria passed (total %.1f s)\n", 10 - g_failures, total.seconds());
    return g_failures == 0 ? 0 : 1;
}
