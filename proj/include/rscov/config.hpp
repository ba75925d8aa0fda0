#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <variant>

#include "rscov/evaluation.hpp"
#include "rscov/markov.hpp"

namespace rscov {

// Declarative run configuration. A problem is either a built-in id (0..8), an
// inline linear problem, or a Markov case-study model.
struct RunConfig {
    std::variant<int, LinearProblem, MarkovRewardModel> problem = 0;
    ProcedureKind procedure = ProcedureKind::FDHom;
    PcsForm pcs_form = PcsForm::Expectation;
    double alpha = 0.05;
    double delta = 1.0;
    int n0 = 50;
    int replications = 200;
    int test_covariates = 10000;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out;
    double scale = 1.0;
    std::optional<double> h;  // skip solve_h when given
    std::optional<ExpectationScheme> expectation;
    std::optional<QuadratureSpec> quadrature;

    void validate() const;
};

// Strict parsing: unknown keys are rejected at every level.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);
nlohmann::json serialize_config(const RunConfig& config);

nlohmann::json serialize_problem(const LinearProblem& problem);
LinearProblem parse_linear_problem(const nlohmann::json& doc);
nlohmann::json serialize_markov(const MarkovRewardModel& model);
MarkovRewardModel parse_markov(const nlohmann::json& doc);

VarianceMode mode_of(ProcedureKind kind);

}  // namespace rscov
