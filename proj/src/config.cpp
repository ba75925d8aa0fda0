#include "rscov/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>

namespace rscov {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
    if (!obj.is_object()) {
        throw std::invalid_argument("config: " + where + " must be an object");
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
        }
    }
}

Eigen::MatrixXd parse_matrix(const json& doc, const std::string& where) {
    if (!doc.is_array() || doc.empty()) {
        throw std::invalid_argument("config: " + where + " must be a non-empty array of rows");
    }
    const std::size_t cols = doc.at(0).size();
    Eigen::MatrixXd out(doc.size(), cols);
    for (std::size_t r = 0; r < doc.size(); ++r) {
        if (doc.at(r).size() != cols) {
            throw std::invalid_argument("config: ragged rows in " + where);
        }
        for (std::size_t c = 0; c < cols; ++c) out(r, c) = doc.at(r).at(c).get<double>();
    }
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& mat) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < mat.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < mat.cols(); ++c) row.push_back(mat(r, c));
        rows.push_back(row);
    }
    return rows;
}

Marginal parse_marginal(const json& doc) {
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "uniform") {
        require_keys(doc, {"kind", "lo", "hi"}, "covariate marginal");
        return UniformMarginal{doc.at("lo").get<double>(), doc.at("hi").get<double>()};
    }
    if (kind == "triangular") {
        require_keys(doc, {"kind", "lo", "mode", "hi"}, "covariate marginal");
        return TriangularMarginal{doc.at("lo").get<double>(), doc.at("mode").get<double>(),
                                  doc.at("hi").get<double>()};
    }
    if (kind == "pmf") {
        require_keys(doc, {"kind", "values", "probs"}, "covariate marginal");
        return FinitePmfMarginal{doc.at("values").get<std::vector<double>>(),
                                 doc.at("probs").get<std::vector<double>>()};
    }
    throw std::invalid_argument("config: unknown covariate marginal kind '" + kind + "'");
}

json marginal_to_json(const Marginal& m) {
    json out;
    if (const auto* uni = std::get_if<UniformMarginal>(&m)) {
        out["kind"] = "uniform";
        out["lo"] = uni->lo;
        out["hi"] = uni->hi;
    } else if (const auto* tri = std::get_if<TriangularMarginal>(&m)) {
        out["kind"] = "triangular";
        out["lo"] = tri->lo;
        out["mode"] = tri->mode;
        out["hi"] = tri->hi;
    } else {
        const auto& pmf = std::get<FinitePmfMarginal>(m);
        out["kind"] = "pmf";
        out["values"] = pmf.values;
        out["probs"] = pmf.probs;
    }
    return out;
}

ExpectationScheme parse_scheme(const json& doc) {
    require_keys(doc, {"kind", "nodes", "seed"}, "expectation");
    ExpectationScheme scheme;
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "tensor") {
        scheme.kind = ExpectationKind::TensorQuadrature;
    } else if (kind == "qmc") {
        scheme.kind = ExpectationKind::QuasiMonteCarlo;
    } else if (kind == "mc") {
        scheme.kind = ExpectationKind::PlainMonteCarlo;
    } else {
        throw std::invalid_argument("config: unknown expectation kind '" + kind + "'");
    }
    if (doc.contains("nodes")) scheme.nodes_or_samples = doc.at("nodes").get<int>();
    if (doc.contains("seed")) scheme.seed = doc.at("seed").get<std::uint64_t>();
    return scheme;
}

json scheme_to_json(const ExpectationScheme& scheme) {
    json out;
    switch (scheme.kind) {
        case ExpectationKind::TensorQuadrature:
            out["kind"] = "tensor";
            break;
        case ExpectationKind::QuasiMonteCarlo:
            out["kind"] = "qmc";
            break;
        case ExpectationKind::PlainMonteCarlo:
            out["kind"] = "mc";
            break;
    }
    out["nodes"] = scheme.nodes_or_samples;
    if (scheme.seed) out["seed"] = *scheme.seed;
    return out;
}

}  // namespace

VarianceMode mode_of(ProcedureKind kind) {
    return kind == ProcedureKind::FDHom ? VarianceMode::Hom : VarianceMode::Het;
}

LinearProblem parse_linear_problem(const json& doc) {
    require_keys(doc, {"kind", "name", "k", "beta", "noise", "covariates", "design_points"},
                 "problem");
    LinearProblem p;
    p.beta = parse_matrix(doc.at("beta"), "problem.beta");
    p.k = static_cast<int>(p.beta.rows());
    p.d = static_cast<int>(p.beta.cols()) - 1;
    if (doc.contains("k") && doc.at("k").get<int>() != p.k) {
        throw std::invalid_argument("config: problem.k disagrees with the beta matrix");
    }
    p.name = doc.value("name", std::string("inline"));

    const json& noise = doc.at("noise");
    const std::string noise_kind = noise.at("kind").get<std::string>();
    if (noise_kind == "hom") {
        require_keys(noise, {"kind", "sigma"}, "problem.noise");
        p.noise = NoiseKind::Hom;
        p.sigma = noise.at("sigma").get<std::vector<double>>();
    } else if (noise_kind == "het") {
        require_keys(noise, {"kind", "scale"}, "problem.noise");
        p.noise = NoiseKind::Het;
        p.het_scale = noise.at("scale").get<double>();
    } else {
        throw std::invalid_argument("config: unknown noise kind '" + noise_kind + "'");
    }

    for (const auto& m : doc.at("covariates")) {
        p.covariate_dist.marginals.push_back(parse_marginal(m));
    }
    if (p.covariate_dist.d() != p.d) {
        throw std::invalid_argument("config: covariate marginal count disagrees with beta");
    }
    p.space = p.covariate_dist.support();
    p.design = DesignMatrix::build(parse_matrix(doc.at("design_points"), "problem.design_points"));
    p.validate();
    return p;
}

json serialize_problem(const LinearProblem& problem) {
    json out;
    out["kind"] = "linear";
    out["name"] = problem.name;
    out["k"] = problem.k;
    out["beta"] = matrix_to_json(problem.beta);
    if (problem.noise == NoiseKind::Hom) {
        out["noise"] = {{"kind", "hom"}, {"sigma", problem.sigma}};
    } else {
        out["noise"] = {{"kind", "het"}, {"scale", problem.het_scale}};
    }
    json marginals = json::array();
    for (const auto& m : problem.covariate_dist.marginals) {
        marginals.push_back(marginal_to_json(m));
    }
    out["covariates"] = marginals;
    out["design_points"] = matrix_to_json(problem.design.rows());
    return out;
}

MarkovRewardModel parse_markov(const json& doc) {
    require_keys(doc,
                 {"kind", "qaly_weights", "regimen_utility", "low_grade_accel",
                  "high_grade_accel", "ablation_prob", "detection_prob", "undetected_mortality",
                  "detected_mortality", "gompertz_scale", "gompertz_shape", "max_age"},
                 "markov model");
    MarkovRewardModel model;
    if (doc.contains("qaly_weights")) {
        const auto w = doc.at("qaly_weights").get<std::vector<double>>();
        if (w.size() != model.qaly_weight.size()) {
            throw std::invalid_argument("config: qaly_weights must list all 6 states");
        }
        std::copy(w.begin(), w.end(), model.qaly_weight.begin());
    }
    if (doc.contains("regimen_utility")) {
        const auto u = doc.at("regimen_utility").get<std::vector<double>>();
        if (u.size() != model.regimen_utility.size()) {
            throw std::invalid_argument("config: regimen_utility must list all 3 regimens");
        }
        std::copy(u.begin(), u.end(), model.regimen_utility.begin());
    }
    if (doc.contains("low_grade_accel")) model.low_grade_accel = doc.at("low_grade_accel").get<double>();
    if (doc.contains("high_grade_accel")) {
        model.high_grade_accel = doc.at("high_grade_accel").get<double>();
    }
    if (doc.contains("ablation_prob")) model.ablation_prob = doc.at("ablation_prob").get<double>();
    if (doc.contains("detection_prob")) model.detection_prob = doc.at("detection_prob").get<double>();
    if (doc.contains("undetected_mortality")) {
        model.undetected_mortality = doc.at("undetected_mortality").get<double>();
    }
    if (doc.contains("detected_mortality")) {
        model.detected_mortality = doc.at("detected_mortality").get<double>();
    }
    if (doc.contains("gompertz_scale")) model.gompertz_scale = doc.at("gompertz_scale").get<double>();
    if (doc.contains("gompertz_shape")) model.gompertz_shape = doc.at("gompertz_shape").get<double>();
    if (doc.contains("max_age")) model.max_age = doc.at("max_age").get<double>();
    model.validate();
    return model;
}

json serialize_markov(const MarkovRewardModel& model) {
    json out;
    out["kind"] = "markov";
    out["qaly_weights"] = std::vector<double>(model.qaly_weight.begin(), model.qaly_weight.end());
    out["regimen_utility"] =
        std::vector<double>(model.regimen_utility.begin(), model.regimen_utility.end());
    out["low_grade_accel"] = model.low_grade_accel;
    out["high_grade_accel"] = model.high_grade_accel;
    out["ablation_prob"] = model.ablation_prob;
    out["detection_prob"] = model.detection_prob;
    out["undetected_mortality"] = model.undetected_mortality;
    out["detected_mortality"] = model.detected_mortality;
    out["gompertz_scale"] = model.gompertz_scale;
    out["gompertz_shape"] = model.gompertz_shape;
    out["max_age"] = model.max_age;
    return out;
}

void RunConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("config: alpha must be in (0, 1)");
    }
    if (!(delta > 0.0)) throw std::invalid_argument("config: delta must be > 0");
    if (n0 < 2) throw std::invalid_argument("config: n0 must be >= 2");
    if (replications < 1) throw std::invalid_argument("config: replications must be >= 1");
    if (test_covariates < 1) throw std::invalid_argument("config: test_covariates must be >= 1");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (!(scale > 0.0 && scale <= 1.0)) {
        throw std::invalid_argument("config: scale must be in (0, 1]");
    }
    if (h && !(*h > 0.0)) throw std::invalid_argument("config: h must be > 0");
    if (const int* id = std::get_if<int>(&problem)) {
        if (*id < 0 || *id > 8) {
            throw std::invalid_argument("config: builtin problem id must be 0..8");
        }
    }
    if (expectation) expectation->validate();
    if (quadrature) quadrature->validate();
}

RunConfig parse_config(const json& doc) {
    require_keys(doc,
                 {"problem", "procedure", "pcs_form", "alpha", "delta", "n0", "replications",
                  "test_covariates", "seed", "workers", "out", "scale", "h", "expectation",
                  "quadrature"},
                 "top level");
    RunConfig cfg;
    if (doc.contains("problem")) {
        const json& prob = doc.at("problem");
        if (prob.is_number_integer()) {
            cfg.problem = prob.get<int>();
        } else if (prob.is_object() && prob.contains("builtin")) {
            require_keys(prob, {"builtin"}, "problem");
            cfg.problem = prob.at("builtin").get<int>();
        } else {
            const std::string kind = prob.at("kind").get<std::string>();
            if (kind == "linear") {
                cfg.problem = parse_linear_problem(prob);
            } else if (kind == "markov") {
                cfg.problem = parse_markov(prob);
            } else {
                throw std::invalid_argument("config: unknown problem kind '" + kind + "'");
            }
        }
    }
    if (doc.contains("procedure")) {
        const std::string proc = doc.at("procedure").get<std::string>();
        if (proc == "fdhom") {
            cfg.procedure = ProcedureKind::FDHom;
        } else if (proc == "fdhet") {
            cfg.procedure = ProcedureKind::FDHet;
        } else {
            throw std::invalid_argument("config: procedure must be 'fdhom' or 'fdhet'");
        }
    }
    if (doc.contains("pcs_form")) {
        const std::string form = doc.at("pcs_form").get<std::string>();
        if (form == "expectation") {
            cfg.pcs_form = PcsForm::Expectation;
        } else if (form == "minimum") {
            cfg.pcs_form = PcsForm::Minimum;
        } else {
            throw std::invalid_argument("config: pcs_form must be 'expectation' or 'minimum'");
        }
    }
    if (doc.contains("alpha")) cfg.alpha = doc.at("alpha").get<double>();
    if (doc.contains("delta")) cfg.delta = doc.at("delta").get<double>();
    if (doc.contains("n0")) cfg.n0 = doc.at("n0").get<int>();
    if (doc.contains("replications")) cfg.replications = doc.at("replications").get<int>();
    if (doc.contains("test_covariates")) cfg.test_covariates = doc.at("test_covariates").get<int>();
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("workers")) cfg.workers = doc.at("workers").get<int>();
    if (doc.contains("out")) cfg.out = doc.at("out").get<std::string>();
    if (doc.contains("scale")) cfg.scale = doc.at("scale").get<double>();
    if (doc.contains("h")) cfg.h = doc.at("h").get<double>();
    if (doc.contains("expectation")) cfg.expectation = parse_scheme(doc.at("expectation"));
    if (doc.contains("quadrature")) {
        const json& q = doc.at("quadrature");
        require_keys(q, {"abs_tol", "rel_tol", "max_subdivisions"}, "quadrature");
        QuadratureSpec spec;
        if (q.contains("abs_tol")) spec.abs_tol = q.at("abs_tol").get<double>();
        if (q.contains("rel_tol")) spec.rel_tol = q.at("rel_tol").get<double>();
        if (q.contains("max_subdivisions")) {
            spec.max_subdivisions = q.at("max_subdivisions").get<int>();
        }
        cfg.quadrature = spec;
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::invalid_argument("config: parse error in '" + path + "': " + e.what());
    }
    return parse_config(doc);
}

json serialize_config(const RunConfig& config) {
    json out;
    if (const int* id = std::get_if<int>(&config.problem)) {
        out["problem"] = *id;
    } else if (const auto* lp = std::get_if<LinearProblem>(&config.problem)) {
        out["problem"] = serialize_problem(*lp);
    } else {
        out["problem"] = serialize_markov(std::get<MarkovRewardModel>(config.problem));
    }
    out["procedure"] = config.procedure == ProcedureKind::FDHom ? "fdhom" : "fdhet";
    out["pcs_form"] = config.pcs_form == PcsForm::Expectation ? "expectation" : "minimum";
    out["alpha"] = config.alpha;
    out["delta"] = config.delta;
    out["n0"] = config.n0;
    out["replications"] = config.replications;
    out["test_covariates"] = config.test_covariates;
    out["seed"] = config.seed;
    out["workers"] = config.workers;
    out["out"] = config.out;
    out["scale"] = config.scale;
    if (config.h) out["h"] = *config.h;
    if (config.expectation) out["expectation"] = scheme_to_json(*config.expectation);
    if (config.quadrature) {
        out["quadrature"] = {{"abs_tol", config.quadrature->abs_tol},
                             {"rel_tol", config.quadrature->rel_tol},
                             {"max_subdivisions", config.quadrature->max_subdivisions}};
    }
    return out;
}

}  // namespace rscov
