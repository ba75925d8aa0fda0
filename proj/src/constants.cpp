#include "rscov/constants.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace rscov {

namespace {

// The double integral in the h equations depends on (h, v) only through
// c = h / sqrt(nu * v), since the normal argument is
// h / sqrt(nu (1/t + 1/s) v) = c / sqrt(1/t + 1/s). Everything below works on
//   G(c) = int [ int Phi(c / sqrt(1/t + 1/s)) p(s) ds ]^(k-1) p(t) dt
// with p the mode's mixing density.
class BoundEvaluator {
  public:
    BoundEvaluator(VarianceMode mode, int dof, int m, int k) : k_(k) {
        const int panels = 32, points = 12;
        if (mode == VarianceMode::Hom) {
            rule_ = make_distribution_rule(
                [dof](double p) { return chisq_quantile(p, dof); }, panels, points);
        } else {
            rule_ = make_distribution_rule(
                [dof, m](double p) { return min_order_stat_quantile(p, dof, m); }, panels,
                points);
        }
        const std::size_t n = rule_.nodes.size();
        inv_nodes_.resize(n);
        for (std::size_t i = 0; i < n; ++i) inv_nodes_[i] = 1.0 / rule_.nodes[i];
        // scale[p][q] = 1 / sqrt(1/t_p + 1/s_q)
        scale_.resize(n * n);
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = 0; q < n; ++q) {
                scale_[p * n + q] = 1.0 / std::sqrt(inv_nodes_[p] + inv_nodes_[q]);
            }
        }
    }

    double operator()(double c) const {
        const std::size_t n = rule_.nodes.size();
        double outer = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            const double* row = scale_.data() + p * n;
            double inner = 0.0;
            for (std::size_t q = 0; q < n; ++q) {
                inner += rule_.weights[q] * normal_cdf(c * row[q]);
            }
            outer += rule_.weights[p] * std::pow(inner, k_ - 1);
        }
        return outer;
    }

  private:
    int k_;
    DistributionRule rule_;
    std::vector<double> inv_nodes_;
    std::vector<double> scale_;
};

constexpr double kBracketLo = 1e-3;
constexpr double kBracketHi = 50.0;
constexpr double kBracketMax = 1e6;
constexpr double kRootTol = 1e-6;  // well under the 1e-4 reporting tolerance on h

// widen [lo, hi] geometrically until f changes sign (f is increasing in h)
RootBracket widen_bracket(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    double fhi = f(hi);
    while ((flo > 0.0) == (fhi > 0.0)) {
        if (hi >= kBracketMax) {
            throw NumericalError("solve_h: no sign change up to h = " + std::to_string(hi));
        }
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        fhi = f(hi);
    }
    return {lo, hi};
}

}  // namespace

int HProblem::dof() const {
    if (mode == VarianceMode::Hom) return n0 * design.m() - design.d() - 1;
    return n0 - 1;
}

void HProblem::validate() const {
    if (k < 2) throw std::invalid_argument("HProblem: k must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0 - 1.0 / k)) {
        throw std::invalid_argument("HProblem: alpha must satisfy 0 < alpha < 1 - 1/k");
    }
    if (mode == VarianceMode::Hom) {
        if (dof() < 1) {
            throw std::invalid_argument("HProblem: hom mode requires n0*m - d - 1 >= 1");
        }
    } else if (n0 < 2) {
        throw std::invalid_argument("HProblem: het mode requires n0 >= 2");
    }
    if (form == PcsForm::Expectation) {
        if (!covariate_dist) {
            throw std::invalid_argument("HProblem: expectation form requires a covariate distribution");
        }
        covariate_dist->validate();
        if (covariate_dist->d() != design.d()) {
            throw std::invalid_argument("HProblem: covariate distribution dimension mismatch");
        }
    } else {
        if (!space) throw std::invalid_argument("HProblem: minimum form requires a covariate space");
        space->validate();
        if (space->d() != design.d()) {
            throw std::invalid_argument("HProblem: covariate space dimension mismatch");
        }
    }
    scheme.validate();
    quad.validate();
}

double pcs_bound_given_v(double h, double v, const HProblem& prob) {
    if (!(h > 0.0)) throw std::invalid_argument("pcs_bound_given_v: h must be > 0");
    if (!(v > 0.0)) throw std::invalid_argument("pcs_bound_given_v: v must be > 0");
    if (prob.k < 2) throw std::invalid_argument("pcs_bound_given_v: k must be >= 2");
    const int nu = prob.dof();
    if (nu < 1) throw std::invalid_argument("pcs_bound_given_v: degrees of freedom < 1");
    BoundEvaluator bound(prob.mode, nu, prob.design.m(), prob.k);
    return bound(h / std::sqrt(nu * v));
}

HSolution solve_h(const HProblem& prob, double target) {
    prob.validate();
    if (!(target > 0.0 && target < 1.0)) {
        throw std::invalid_argument("solve_h: target must be in (0, 1)");
    }
    const int nu = prob.dof();
    BoundEvaluator bound(prob.mode, nu, prob.design.m(), prob.k);

    HSolution out;
    out.dof = nu;

    if (prob.form == PcsForm::Minimum) {
        // The bound is decreasing in v, so the binding x is the maximizer of V.
        const MaxQuadraticResult mx = max_quadratic(*prob.space, prob.design);
        out.x0 = mx.x0;
        out.v_max = mx.v_max;
        const double s = std::sqrt(nu * mx.v_max);
        auto f = [&](double h) { return bound(h / s) - target; };
        const RootBracket br = widen_bracket(f, kBracketLo, kBracketHi);
        out.h = find_root(f, br, kRootTol);
        return out;
    }

    // Expectation form: V(X) at the scheme's nodes is fixed across root
    // iterations, and G is interpolated in c so each iterate costs one
    // weighted sum instead of a fresh double integral.
    const ExpectationNodes nodes = expectation_nodes(*prob.covariate_dist, prob.scheme);
    const long n = nodes.points.rows();
    std::vector<double> inv_scale(n);  // 1 / sqrt(nu * V(x_i))
    double v_lo = INFINITY, v_hi = 0.0;
    for (long i = 0; i < n; ++i) {
        const double v = quadratic_form(nodes.points.row(i), prob.design);
        if (!(v > 0.0)) throw NumericalError("solve_h: nonpositive quadratic form at a node");
        v_lo = std::min(v_lo, v);
        v_hi = std::max(v_hi, v);
        inv_scale[i] = 1.0 / std::sqrt(nu * v);
    }
    out.node_count = n;
    out.v_max = v_hi;

    double hi = kBracketHi;
    while (true) {
        const double c_max = hi / std::sqrt(nu * v_lo);
        ChebyshevInterpolant g_interp([&](double c) { return bound(c); }, 0.0, c_max, 97);
        auto f = [&](double h) {
            double acc = 0.0;
            for (long i = 0; i < n; ++i) {
                acc += nodes.weights[i] * g_interp(h * inv_scale[i]);
            }
            return acc - target;
        };
        if (f(hi) <= 0.0) {
            if (hi >= kBracketMax) {
                throw NumericalError("solve_h: no sign change up to h = " + std::to_string(hi));
            }
            hi *= 2.0;
            continue;
        }
        const RootBracket br = widen_bracket(f, kBracketLo, hi);
        out.h = find_root(f, br, kRootTol);
        return out;
    }
}

HSolution solve_h(const HProblem& prob) { return solve_h(prob, 1.0 - prob.alpha); }

}  // namespace rscov
