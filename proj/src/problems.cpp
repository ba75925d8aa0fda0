#include "rscov/problems.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rscov {

namespace {

// full factorial design: every entry of a d-dimensional point 0 or `level`
Eigen::MatrixXd factorial_points(int d, double level) {
    const int m = 1 << d;
    Eigen::MatrixXd pts(m, d + 1);
    for (int r = 0; r < m; ++r) {
        pts(r, 0) = 1.0;
        for (int c = 0; c < d; ++c) {
            pts(r, c + 1) = ((r >> (d - 1 - c)) & 1) ? level : 0.0;
        }
    }
    return pts;
}

LinearProblem gsc_uniform_problem(int k, int d, std::vector<double> sigma,
                                  const std::string& name) {
    LinearProblem p;
    p.k = k;
    p.d = d;
    p.beta = make_gsc(k, d, 1.0, Eigen::VectorXd::Ones(d + 1));
    p.noise = NoiseKind::Hom;
    p.sigma = std::move(sigma);
    p.covariate_dist = uniform_box(d);
    p.space = p.covariate_dist.support();
    p.design = DesignMatrix::build(factorial_points(d, 0.5));
    p.name = name;
    return p;
}

}  // namespace

double LinearProblem::sigma_at(int i, const Eigen::VectorXd& x) const {
    if (noise == NoiseKind::Hom) return sigma.at(i);
    if (het_sigma_fn) return het_sigma_fn(i, x);
    return het_scale * mean_at(i, x);
}

void LinearProblem::validate() const {
    if (k < 1 || d < 1) throw std::invalid_argument("LinearProblem: k and d must be >= 1");
    if (beta.rows() != k || beta.cols() != d + 1) {
        throw std::invalid_argument("LinearProblem: beta must be k x (d+1)");
    }
    if (design.d() != d) throw std::invalid_argument("LinearProblem: design dimension mismatch");
    covariate_dist.validate();
    space.validate();
    if (covariate_dist.d() != d || space.d() != d) {
        throw std::invalid_argument("LinearProblem: covariate dimension mismatch");
    }
    if (noise == NoiseKind::Hom) {
        if (static_cast<int>(sigma.size()) != k) {
            throw std::invalid_argument("LinearProblem: need one sigma per alternative");
        }
        for (double s : sigma) {
            if (!(s > 0.0)) throw std::invalid_argument("LinearProblem: sigma must be > 0");
        }
    } else if (!het_sigma_fn) {
        if (!(het_scale > 0.0)) {
            throw std::invalid_argument("LinearProblem: het_scale must be > 0");
        }
        // sigma_i(x) = scale * x' beta_i is linear in x, so checking the
        // extreme points of Theta bounds it on all of Theta. Zero at a corner
        // is allowed (degenerate but simulable); negative is not.
        std::vector<std::vector<double>> cand(d);
        for (int c = 0; c < d; ++c) {
            if (const auto* iv = std::get_if<Interval>(&space.dims[c])) {
                cand[c] = {iv->lo, iv->hi};
            } else {
                const auto& set = std::get<FiniteSet>(space.dims[c]);
                const auto [mn, mx] = std::minmax_element(set.begin(), set.end());
                cand[c] = {*mn, *mx};
            }
        }
        Eigen::VectorXd x(d + 1);
        x(0) = 1.0;
        std::vector<std::size_t> idx(d, 0);
        while (true) {
            for (int c = 0; c < d; ++c) x(c + 1) = cand[c][idx[c]];
            for (int i = 0; i < k; ++i) {
                if (sigma_at(i, x) < 0.0) {
                    throw std::invalid_argument(
                        "LinearProblem: heteroscedastic sigma is negative at a corner of Theta");
                }
            }
            int c = d - 1;
            for (; c >= 0; --c) {
                if (++idx[c] < cand[c].size()) break;
                idx[c] = 0;
            }
            if (c < 0) break;
        }
    }
}

Eigen::MatrixXd make_gsc(int k, int d, double delta, const Eigen::VectorXd& base_beta1) {
    if (k < 2) throw std::invalid_argument("make_gsc: k must be >= 2");
    if (!(delta > 0.0)) throw std::invalid_argument("make_gsc: delta must be > 0");
    if (base_beta1.size() != d + 1) {
        throw std::invalid_argument("make_gsc: base beta must have d+1 coordinates");
    }
    Eigen::MatrixXd beta(k, d + 1);
    beta.row(0) = base_beta1;
    for (int i = 1; i < k; ++i) {
        beta.row(i) = base_beta1;
        beta(i, 0) = base_beta1(0) - delta;
    }
    return beta;
}

LinearProblem benchmark_problem(int id) {
    switch (id) {
        case 0:
            return gsc_uniform_problem(5, 3, std::vector<double>(5, 10.0), "benchmark");
        case 1:
            return gsc_uniform_problem(2, 3, std::vector<double>(2, 10.0), "k=2");
        case 2:
            return gsc_uniform_problem(8, 3, std::vector<double>(8, 10.0), "k=8");
        case 3: {
            LinearProblem p = gsc_uniform_problem(5, 3, std::vector<double>(5, 10.0), "non-GSC");
            RngStream rng(kProblem3BetaSeed);
            for (int i = 0; i < p.k; ++i) {
                for (int c = 0; c <= p.d; ++c) p.beta(i, c) = rng.uniform(0.0, 5.0);
            }
            return p;
        }
        case 4:
            return gsc_uniform_problem(5, 3, {5.0, 7.5, 10.0, 12.5, 15.0}, "IV");
        case 5:
            return gsc_uniform_problem(5, 3, {15.0, 12.5, 10.0, 7.5, 5.0}, "DV");
        case 6: {
            LinearProblem p = gsc_uniform_problem(5, 3, {}, "het");
            p.noise = NoiseKind::Het;
            p.het_scale = 10.0;
            return p;
        }
        case 7:
            return gsc_uniform_problem(5, 1, std::vector<double>(5, 10.0), "d=1");
        case 8:
            return gsc_uniform_problem(5, 5, std::vector<double>(5, 10.0), "d=5");
        default:
            throw std::invalid_argument("benchmark_problem: unknown id " + std::to_string(id) +
                                        " (valid: 0..8)");
    }
}

std::vector<int> true_best(const LinearProblem& problem, const Eigen::VectorXd& x) {
    if (x.size() != problem.d + 1) {
        throw std::invalid_argument("true_best: covariate dimension mismatch");
    }
    double best = -INFINITY;
    for (int i = 0; i < problem.k; ++i) best = std::max(best, problem.mean_at(i, x));
    std::vector<int> out;
    for (int i = 0; i < problem.k; ++i) {
        if (problem.mean_at(i, x) == best) out.push_back(i);
    }
    return out;
}

SimulationOracle linear_oracle(const LinearProblem& problem) {
    problem.validate();
    auto shared = std::make_shared<LinearProblem>(problem);
    SimulationOracle oracle;
    oracle.k = problem.k;
    oracle.descriptor = "linear:" + problem.name;
    oracle.sample = [shared](int i, const Eigen::VectorXd& x, RngStream& rng) {
        return shared->mean_at(i, x) + shared->sigma_at(i, x) * rng.normal();
    };
    return oracle;
}

}  // namespace rscov
