#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rscov/config.hpp"

namespace py = pybind11;
using namespace rscov;

namespace {

ProcedureKind parse_procedure(const std::string& name) {
    if (name == "fdhom") return ProcedureKind::FDHom;
    if (name == "fdhet") return ProcedureKind::FDHet;
    throw std::invalid_argument("procedure must be 'fdhom' or 'fdhet'");
}

PcsForm parse_form(const std::string& name) {
    if (name == "expectation") return PcsForm::Expectation;
    if (name == "minimum") return PcsForm::Minimum;
    throw std::invalid_argument("form must be 'expectation' or 'minimum'");
}

HProblem build_hproblem(int problem, const std::string& procedure, const std::string& form,
                        double alpha, int n0) {
    const LinearProblem lp = benchmark_problem(problem);
    HProblem hp;
    hp.mode = mode_of(parse_procedure(procedure));
    hp.form = parse_form(form);
    hp.k = lp.k;
    hp.n0 = n0;
    hp.design = lp.design;
    hp.covariate_dist = lp.covariate_dist;
    hp.space = lp.space;
    hp.alpha = alpha;
    hp.scheme = default_scheme_for(lp.d);
    return hp;
}

py::dict solve_h_py(int problem, const std::string& procedure, const std::string& form,
                    double alpha, int n0) {
    const HProblem hp = build_hproblem(problem, procedure, form, alpha, n0);
    const HSolution sol = solve_h(hp);
    py::dict out;
    out["h"] = sol.h;
    out["dof"] = sol.dof;
    if (hp.form == PcsForm::Minimum) {
        out["v_max"] = sol.v_max;
        out["x0"] = sol.x0;
    } else {
        out["nodes"] = sol.node_count;
    }
    return out;
}

double pcs_bound_py(double h, double v, int problem, const std::string& procedure, double alpha,
                    int n0) {
    return pcs_bound_given_v(h, v, build_hproblem(problem, procedure, "expectation", alpha, n0));
}

py::dict run_experiment_py(int problem, const std::string& procedure, const std::string& form,
                           double h, int replications, int test_covariates, std::uint64_t seed,
                           double alpha, double delta, int n0, int workers) {
    ExperimentPlan plan;
    plan.problem = benchmark_problem(problem);
    plan.procedure = parse_procedure(procedure);
    plan.config = ProcedureConfig{alpha, delta, n0, parse_form(form), h};
    plan.replications = replications;
    plan.test_covariates = test_covariates;
    plan.master_seed = seed;
    plan.workers = workers;
    const ExperimentReport rep = run_experiment(plan);
    py::dict out;
    out["h"] = rep.h_used;
    out["mean_total_samples"] = rep.mean_total_samples;
    out["pcs_e_hat"] = rep.pcs_e;
    out["pcs_min_hat"] = rep.pcs_min;
    out["pcs_e_se"] = rep.pcs_e_se;
    out["x0"] = rep.x0;
    return out;
}

py::dict benchmark_info_py(int problem) {
    const LinearProblem lp = benchmark_problem(problem);
    py::dict out;
    out["name"] = lp.name;
    out["k"] = lp.k;
    out["d"] = lp.d;
    out["m"] = lp.design.m();
    out["beta"] = lp.beta;
    out["design_points"] = lp.design.rows();
    out["heteroscedastic"] = lp.noise == NoiseKind::Het;
    return out;
}

py::dict case_study_py(const std::string& procedure, double h, double alpha, double delta,
                       int n0, int replications, int test_covariates, std::uint64_t seed) {
    const CaseStudy cs = case_study_problem();
    if (h <= 0.0) {
        HProblem hp;
        hp.mode = mode_of(parse_procedure(procedure));
        hp.form = PcsForm::Expectation;
        hp.k = cs.oracle.k;
        hp.n0 = n0;
        hp.design = cs.design;
        hp.covariate_dist = cs.covariate_dist;
        hp.space = cs.space;
        hp.alpha = alpha;
        hp.scheme = ExpectationScheme{ExpectationKind::TensorQuadrature, 8, std::nullopt};
        h = solve_h(hp).h;
    }
    const ProcedureConfig config{alpha, delta, n0, PcsForm::Expectation, h};
    const CaseStudyReport rep = run_case_study(cs, parse_procedure(procedure), config,
                                               replications, test_covariates, seed);
    py::dict out;
    out["h"] = rep.h;
    out["best_at_mean"] = rep.best_at_mean + 1;
    out["best_mean"] = rep.best_mean + 1;
    out["pcs_personalized"] = rep.pcs_personalized;
    out["pcs_best_at_mean"] = rep.pcs_best_at_mean;
    out["pcs_best_mean"] = rep.pcs_best_mean;
    out["qalys_personalized"] = rep.qalys_personalized;
    out["qalys_best_at_mean"] = rep.qalys_best_at_mean;
    out["qalys_best_mean"] = rep.qalys_best_mean;
    out["expected_best"] = rep.expected_best;
    out["near_tie_share"] = rep.near_tie_share;
    out["mean_total_samples"] = rep.mean_total_samples;
    return out;
}

double expected_qalys_py(int regimen, const Eigen::VectorXd& x) {
    const MarkovRewardModel model;
    if (regimen < 1 || regimen > 3) throw std::invalid_argument("regimen must be 1, 2 or 3");
    return expected_qalys(model, regimen - 1, x);
}

}  // namespace

PYBIND11_MODULE(_rscov, m) {
    m.doc() = "ranking and selection with covariates: constants, procedures, experiments";

    m.def("normal_cdf", &normal_cdf, py::arg("z"));
    m.def("chisq_pdf", &chisq_pdf, py::arg("t"), py::arg("dof"));
    m.def("chisq_cdf", &chisq_cdf, py::arg("t"), py::arg("dof"));
    m.def("min_order_stat_pdf", &min_order_stat_pdf, py::arg("t"), py::arg("dof"), py::arg("m"));

    m.def("make_gsc", &make_gsc, py::arg("k"), py::arg("d"), py::arg("delta"),
          py::arg("base_beta1"),
          "coefficient matrix with every inferior intercept exactly delta below the best");

    m.def("benchmark_info", &benchmark_info_py, py::arg("problem"));

    m.def("solve_h", &solve_h_py, py::arg("problem"), py::arg("procedure") = "fdhom",
          py::arg("form") = "expectation", py::arg("alpha") = 0.05, py::arg("n0") = 50,
          "critical constant for a built-in problem");

    m.def("pcs_bound", &pcs_bound_py, py::arg("h"), py::arg("v"), py::arg("problem") = 0,
          py::arg("procedure") = "fdhom", py::arg("alpha") = 0.05, py::arg("n0") = 50,
          "lower bound on the conditional PCS given V(x) = v");

    m.def("run_experiment", &run_experiment_py, py::arg("problem"),
          py::arg("procedure") = "fdhom", py::arg("form") = "expectation", py::arg("h"),
          py::arg("replications") = 10, py::arg("test_covariates") = 1000, py::arg("seed") = 1,
          py::arg("alpha") = 0.05, py::arg("delta") = 1.0, py::arg("n0") = 50,
          py::arg("workers") = 1,
          "macro-replicated procedure runs with PCS estimates and sample budgets");

    m.def("case_study", &case_study_py, py::arg("procedure") = "fdhet", py::arg("h") = 0.0,
          py::arg("alpha") = 0.05, py::arg("delta") = 0.5, py::arg("n0") = 50,
          py::arg("replications") = 5, py::arg("test_covariates") = 1000, py::arg("seed") = 7,
          "personalized vs constant regimen selection on the synthetic Markov model");

    m.def("expected_qalys", &expected_qalys_py, py::arg("regimen"), py::arg("x"),
          "exact expected QALYs for covariates (1, age, risk, aspirin effect, statin effect)");
}
