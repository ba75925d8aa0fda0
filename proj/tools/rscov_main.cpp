#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "rscov/config.hpp"
#include "rscov/reference_tables.hpp"

namespace {

using nlohmann::json;
using namespace rscov;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out;
};

RunConfig effective_config(const CliOptions& opts, bool config_required) {
    RunConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = load_config(opts.config_path);
    } else if (config_required) {
        throw std::invalid_argument("missing --config PATH");
    }
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.workers) cfg.workers = *opts.workers;
    if (opts.out) cfg.out = *opts.out;
    cfg.validate();
    return cfg;
}

LinearProblem resolve_linear(const RunConfig& cfg) {
    if (const int* id = std::get_if<int>(&cfg.problem)) return benchmark_problem(*id);
    if (const auto* lp = std::get_if<LinearProblem>(&cfg.problem)) return *lp;
    throw std::invalid_argument("this command needs a linear problem; use `case-study` for the Markov model");
}

HProblem hproblem_for(const RunConfig& cfg, const DesignMatrix& design,
                      const CovariateDistribution& dist, const CovariateSpace& space, int k) {
    HProblem hp;
    hp.mode = mode_of(cfg.procedure);
    hp.form = cfg.pcs_form;
    hp.k = k;
    hp.n0 = cfg.n0;
    hp.design = design;
    hp.covariate_dist = dist;
    hp.space = space;
    hp.alpha = cfg.alpha;
    hp.scheme = cfg.expectation.value_or(default_scheme_for(design.d()));
    hp.quad = cfg.quadrature.value_or(QuadratureSpec{});
    return hp;
}

std::string hproblem_cache_key(const HProblem& hp) {
    json key;
    key["mode"] = hp.mode == VarianceMode::Hom ? "hom" : "het";
    key["form"] = hp.form == PcsForm::Expectation ? "expectation" : "minimum";
    key["k"] = hp.k;
    key["n0"] = hp.n0;
    key["alpha"] = hp.alpha;
    std::ostringstream rows;
    rows.precision(17);
    const Eigen::MatrixXd& x = hp.design.rows();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) rows << x(r, c) << ',';
    }
    key["design"] = rows.str();
    if (hp.form == PcsForm::Expectation) {
        json marginals = json::array();
        for (const auto& m : hp.covariate_dist->marginals) {
            if (const auto* uni = std::get_if<UniformMarginal>(&m)) {
                marginals.push_back({{"u", {uni->lo, uni->hi}}});
            } else if (const auto* tri = std::get_if<TriangularMarginal>(&m)) {
                marginals.push_back({{"t", {tri->lo, tri->mode, tri->hi}}});
            } else {
                const auto& pmf = std::get<FinitePmfMarginal>(m);
                marginals.push_back({{"p", {pmf.values, pmf.probs}}});
            }
        }
        key["dist"] = marginals;
        key["scheme_kind"] = static_cast<int>(hp.scheme.kind);
        key["scheme_nodes"] = hp.scheme.nodes_or_samples;
        key["scheme_seed"] = hp.scheme.seed.value_or(0);
    }
    return key.dump();
}

// disk cache for solved constants, keyed by a content hash of the inputs
class HCache {
  public:
    explicit HCache(const std::string& path) : path_(path) {
        std::ifstream in(path_);
        if (in) {
            try {
                in >> store_;
            } catch (const json::exception&) {
                store_ = json::object();
            }
        }
        if (!store_.is_object()) store_ = json::object();
    }

    std::optional<double> lookup(const std::string& key) const {
        const std::string id = std::to_string(std::hash<std::string>{}(key));
        if (!store_.contains(id)) return std::nullopt;
        const json& entry = store_.at(id);
        if (entry.value("key", std::string()) != key) return std::nullopt;
        return entry.at("h").get<double>();
    }

    void put(const std::string& key, double h) {
        const std::string id = std::to_string(std::hash<std::string>{}(key));
        store_[id] = {{"key", key}, {"h", h}};
        std::ofstream out(path_);
        out << store_.dump(1) << '\n';
    }

  private:
    std::string path_;
    json store_;
};

double solve_or_cached(const HProblem& hp, HCache* cache) {
    const std::string key = hproblem_cache_key(hp);
    if (cache) {
        if (auto hit = cache->lookup(key)) return *hit;
    }
    const HSolution sol = solve_h(hp);
    if (cache) cache->put(key, sol.h);
    return sol.h;
}

std::string format_row(const char* label, double h, double sample, double pcs_e,
                       double pcs_min) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-16s %8.3f %12.1f %9.4f %9.4f", label, h, sample, pcs_e,
                  pcs_min);
    return buf;
}

int cmd_solve_h(const CliOptions& opts) {
    const RunConfig cfg = effective_config(opts, true);
    HProblem hp;
    if (std::holds_alternative<MarkovRewardModel>(cfg.problem)) {
        const CaseStudy cs = case_study_problem(std::get<MarkovRewardModel>(cfg.problem));
        hp = hproblem_for(cfg, cs.design, cs.covariate_dist, cs.space, cs.oracle.k);
    } else {
        const LinearProblem lp = resolve_linear(cfg);
        hp = hproblem_for(cfg, lp.design, lp.covariate_dist, lp.space, lp.k);
    }
    const HSolution sol = solve_h(hp);
    std::printf("h = %.4f\n", sol.h);
    std::printf("dof = %d\n", sol.dof);
    std::printf("mode = %s\n", hp.mode == VarianceMode::Hom ? "hom" : "het");
    std::printf("form = %s\n", hp.form == PcsForm::Expectation ? "expectation" : "minimum");
    if (hp.form == PcsForm::Minimum) {
        std::printf("v_max = %.6f\n", sol.v_max);
        std::printf("x0 =");
        for (Eigen::Index i = 0; i < sol.x0.size(); ++i) std::printf(" %g", sol.x0(i));
        std::printf("\n");
    } else {
        std::printf("nodes = %ld\n", sol.node_count);
    }
    return kExitOk;
}

int cmd_run(const CliOptions& opts) {
    const RunConfig cfg = effective_config(opts, true);
    const LinearProblem problem = resolve_linear(cfg);

    HProblem hp = hproblem_for(cfg, problem.design, problem.covariate_dist, problem.space,
                               problem.k);
    const double h = cfg.h ? *cfg.h : solve_h(hp).h;

    ExperimentPlan plan;
    plan.problem = problem;
    plan.procedure = cfg.procedure;
    plan.config = ProcedureConfig{cfg.alpha, cfg.delta, cfg.n0, cfg.pcs_form, h};
    plan.replications = cfg.replications;
    plan.test_covariates = cfg.test_covariates;
    plan.master_seed = cfg.seed;
    plan.workers = cfg.workers;
    const ExperimentReport report = run_experiment(plan);

    std::printf("%-16s %8s %12s %9s %9s\n", "Problem", "h", "Sample", "PCS_E", "PCS_min");
    std::printf("%s\n", format_row(problem.name.c_str(), report.h_used,
                                   report.mean_total_samples, report.pcs_e, report.pcs_min)
                            .c_str());
    std::printf("x0 =");
    for (Eigen::Index i = 0; i < report.x0.size(); ++i) std::printf(" %g", report.x0(i));
    std::printf("\n");

    char line[256];
    std::snprintf(line, sizeof(line), "%s,%s,%s,%.4f,%.1f,%.4f,%.4f\n", problem.name.c_str(),
                  cfg.procedure == ProcedureKind::FDHom ? "fdhom" : "fdhet",
                  cfg.pcs_form == PcsForm::Expectation ? "expectation" : "minimum", report.h_used,
                  report.mean_total_samples, report.pcs_e, report.pcs_min);
    const std::string csv =
        std::string("problem,procedure,pcs_form,h,mean_total_samples,pcs_e_hat,pcs_min_hat\n") +
        line;
    if (!cfg.out.empty()) {
        std::ofstream out(cfg.out);
        if (!out) throw std::invalid_argument("cannot write output file '" + cfg.out + "'");
        out << csv;
        std::printf("wrote %s\n", cfg.out.c_str());
    } else {
        std::fputs(csv.c_str(), stdout);
    }
    return kExitOk;
}

int cmd_reproduce(const CliOptions& opts, int table, double scale) {
    RunConfig cfg = effective_config(opts, false);
    if (!(scale > 0.0 && scale <= 1.0)) {
        throw std::invalid_argument("reproduce: --scale must be in (0, 1]");
    }
    const auto& ref = table == 1 ? kReferenceTable1 : kReferenceTable2;
    const PcsForm form = table == 1 ? PcsForm::Expectation : PcsForm::Minimum;
    const int R = static_cast<int>(std::ceil(scale * 1e4));
    const int T = static_cast<int>(std::ceil(scale * 1e5));

    const std::string out_path =
        !cfg.out.empty() ? cfg.out : "reproduce_table" + std::to_string(table) + ".csv";
    const std::string cache_path =
        (std::filesystem::path(out_path).parent_path() / "h_cache.json").string();
    HCache cache(cache_path.empty() ? "h_cache.json" : cache_path);

    std::ostringstream csv;
    csv << "problem,procedure,h,h_ref,h_dev,sample,sample_ref,pcs_e_hat,pcs_e_ref,"
           "pcs_min_hat,pcs_min_ref\n";

    std::printf("table %d reproduction at scale %g (R=%d, T=%d, seed=%llu)\n", table, scale, R, T,
                static_cast<unsigned long long>(cfg.seed));
    for (ProcedureKind proc : {ProcedureKind::FDHom, ProcedureKind::FDHet}) {
        const char* proc_name = proc == ProcedureKind::FDHom ? "FDHom" : "FDHet";
        std::printf("\n[%s]\n", proc_name);
        std::printf("%-16s %8s %8s %8s %12s %12s %8s %8s %8s %8s\n", "Problem", "h", "h_ref",
                    "|dh|", "Sample", "Sample_ref", "PCS_E", "E_ref", "PCS_min", "min_ref");
        for (int id = 0; id <= 8; ++id) {
            const LinearProblem problem = benchmark_problem(id);
            RunConfig row_cfg = cfg;
            row_cfg.procedure = proc;
            row_cfg.pcs_form = form;
            HProblem hp = hproblem_for(row_cfg, problem.design, problem.covariate_dist,
                                       problem.space, problem.k);
            const double h = solve_or_cached(hp, &cache);

            ExperimentPlan plan;
            plan.problem = problem;
            plan.procedure = proc;
            plan.config = ProcedureConfig{cfg.alpha, cfg.delta, cfg.n0, form, h};
            plan.replications = R;
            plan.test_covariates = T;
            plan.master_seed = RngStream(cfg.seed)
                                   .child(static_cast<std::uint64_t>(table),
                                          static_cast<std::uint64_t>(id),
                                          proc == ProcedureKind::FDHom ? 0 : 1)
                                   .key();
            plan.workers = cfg.workers;
            const ExperimentReport rep = run_experiment(plan);

            const bool hom = proc == ProcedureKind::FDHom;
            const double h_ref = hom ? ref[id].h_hom : ref[id].h_het;
            const double sample_ref = hom ? ref[id].sample_hom : ref[id].sample_het;
            const double pcs_e_ref = hom ? ref[id].pcs_e_hom : ref[id].pcs_e_het;
            const double pcs_min_ref = hom ? ref[id].pcs_min_hom : ref[id].pcs_min_het;

            std::printf("%-16s %8.3f %8.3f %8.3f %12.1f %12.1f %8.4f %8.4f %8.4f %8.4f\n",
                        ref[id].label, h, h_ref, std::abs(h - h_ref), rep.mean_total_samples,
                        sample_ref, rep.pcs_e, pcs_e_ref, rep.pcs_min, pcs_min_ref);
            char line[320];
            std::snprintf(line, sizeof(line),
                          "%s,%s,%.4f,%.3f,%.4f,%.1f,%.0f,%.4f,%.4f,%.4f,%.4f\n", ref[id].label,
                          proc_name, h, h_ref, std::abs(h - h_ref), rep.mean_total_samples,
                          sample_ref, rep.pcs_e, pcs_e_ref, rep.pcs_min, pcs_min_ref);
            csv << line;
        }
    }
    std::ofstream out(out_path);
    if (!out) throw std::invalid_argument("cannot write output file '" + out_path + "'");
    out << csv.str();
    std::printf("\nwrote %s\n", out_path.c_str());
    return kExitOk;
}

int cmd_case_study(const CliOptions& opts) {
    RunConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = effective_config(opts, true);
    } else {
        // desk-scale defaults
        cfg.problem = MarkovRewardModel{};
        cfg.procedure = ProcedureKind::FDHet;
        cfg.delta = 0.5;
        cfg.n0 = 50;
        cfg.replications = 10;
        cfg.test_covariates = 2000;
        cfg.seed = 7;
        if (opts.seed) cfg.seed = *opts.seed;
        if (opts.workers) cfg.workers = *opts.workers;
        if (opts.out) cfg.out = *opts.out;
    }
    const MarkovRewardModel model = std::holds_alternative<MarkovRewardModel>(cfg.problem)
                                        ? std::get<MarkovRewardModel>(cfg.problem)
                                        : MarkovRewardModel{};
    const CaseStudy cs = case_study_problem(model);
    const int k = cs.oracle.k;

    HProblem hp = hproblem_for(cfg, cs.design, cs.covariate_dist, cs.space, k);
    if (!cfg.expectation) {
        hp.scheme.nodes_or_samples = 8;  // d=4 tensor grid, keep the node count moderate
    }
    const double h = cfg.h ? *cfg.h : solve_h(hp).h;
    const ProcedureConfig pconfig{cfg.alpha, cfg.delta, cfg.n0, cfg.pcs_form, h};
    const CaseStudyReport rep = run_case_study(cs, cfg.procedure, pconfig, cfg.replications,
                                               cfg.test_covariates, cfg.seed);

    std::printf("case study: %s, %d regimens, 16 design points\n", cs.oracle.descriptor.c_str(),
                k);
    std::printf("h = %.4f  (procedure %s, delta=%g, n0=%d, R=%d, T=%d)\n", rep.h,
                cfg.procedure == ProcedureKind::FDHom ? "FDHom" : "FDHet", cfg.delta, cfg.n0,
                cfg.replications, cfg.test_covariates);
    std::printf("mean total samples per replication = %.1f\n", rep.mean_total_samples);
    std::printf("constant rules: best-at-mean-covariate = regimen %d, best-mean = regimen %d\n",
                rep.best_at_mean + 1, rep.best_mean + 1);
    std::printf("%-34s %10s %12s\n", "rule", "PCS_E", "mean QALYs");
    std::printf("%-34s %10.4f %12.4f\n", "personalized (decision rule)", rep.pcs_personalized,
                rep.qalys_personalized);
    std::printf("%-34s %10.4f %12.4f\n", "constant: best at mean covariate",
                rep.pcs_best_at_mean, rep.qalys_best_at_mean);
    std::printf("%-34s %10.4f %12.4f\n", "constant: best mean performance", rep.pcs_best_mean,
                rep.qalys_best_mean);
    std::printf("E[best-possible QALYs] = %.4f (vs %.4f under the best-mean rule)\n",
                rep.expected_best, rep.mean_perf_best_mean);
    std::printf("share of covariates with a near-tie (gap < delta): %.4f\n",
                rep.near_tie_share);
    std::printf("personalized PCS_E >= constant-rule PCS_E: %s\n",
                rep.pcs_personalized >= std::max(rep.pcs_best_at_mean, rep.pcs_best_mean)
                    ? "yes"
                    : "NO");

    if (!cfg.out.empty()) {
        std::ofstream out(cfg.out);
        if (!out) throw std::invalid_argument("cannot write output file '" + cfg.out + "'");
        out << "rule,pcs_e_hat,mean_qalys\n";
        char line[160];
        std::snprintf(line, sizeof(line), "personalized,%.4f,%.4f\n", rep.pcs_personalized,
                      rep.qalys_personalized);
        out << line;
        std::snprintf(line, sizeof(line), "best_at_mean,%.4f,%.4f\n", rep.pcs_best_at_mean,
                      rep.qalys_best_at_mean);
        out << line;
        std::snprintf(line, sizeof(line), "best_mean,%.4f,%.4f\n", rep.pcs_best_mean,
                      rep.qalys_best_mean);
        out << line;
        std::printf("wrote %s\n", cfg.out.c_str());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ranking and selection with covariates: constants, procedures, experiments"};
    app.require_subcommand(1);

    CliOptions opts;
    app.add_option("--config", opts.config_path, "JSON run configuration")->expected(1);
    app.add_option("--seed", opts.seed, "override the config seed");
    app.add_option("--workers", opts.workers, "worker threads for macro-replications");
    app.add_option("--out", opts.out, "override the config output path");

    auto* solve = app.add_subcommand("solve-h", "solve the procedure constant h");
    auto* run = app.add_subcommand("run", "run a full experiment from a config");
    auto* repro = app.add_subcommand("reproduce", "re-run the published benchmark tables");
    int table = 1;
    double scale = 0.02;
    repro->add_option("--table", table, "which table to reproduce (1 or 2)")
        ->check(CLI::IsMember({1, 2}));
    repro->add_option("--scale", scale, "fraction of the published R=1e4, T=1e5 budget");
    auto* study = app.add_subcommand("case-study", "personalized vs constant regimen selection");
    for (CLI::App* sub : {solve, run, repro, study}) sub->fallthrough();

    try {
        app.parse(argc, argv);
        if (solve->parsed()) return cmd_solve_h(opts);
        if (run->parsed()) return cmd_run(opts);
        if (repro->parsed()) return cmd_reproduce(opts, table, scale);
        if (study->parsed()) return cmd_case_study(opts);
        return kExitValidation;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}
