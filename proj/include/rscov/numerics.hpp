#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace rscov {

// Thrown when an iterative method fails to reach its tolerance (quadrature
// subdivision limit, root finder iteration limit, ...). Invalid inputs throw
// std::invalid_argument instead.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct QuadratureSpec {
    double abs_tol = 1e-9;
    double rel_tol = 1e-8;
    int max_subdivisions = 256;

    void validate() const;
};

struct RootBracket {
    double lo;
    double hi;
};

// --- special functions -----------------------------------------------------

double normal_pdf(double z);
double normal_cdf(double z);
double normal_quantile(double p);

// regularized incomplete gamma P(a, x) and its complement Q(a, x)
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

double chisq_pdf(double t, int dof);
double chisq_cdf(double t, int dof);
double chisq_quantile(double p, int dof);

// density of the smallest of m iid chi-squared(dof) variables,
// m * pdf(t) * (1 - cdf(t))^(m-1)
double min_order_stat_pdf(double t, int dof, int m);
double min_order_stat_cdf(double t, int dof, int m);
double min_order_stat_quantile(double p, int dof, int m);

// --- quadrature -------------------------------------------------------------

// Adaptive Gauss-Kronrod 15(7) on a finite interval.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSpec& spec = {});

// Integral over [0, inf) via the substitution t = u / (1 - u).
double integrate_semi_infinite(const std::function<double(double)>& f,
                               const QuadratureSpec& spec = {});

// Fixed quadrature rule for integrals against a probability distribution,
// built from its quantile function: sum_i weight[i] * f(node[i]) ~ E[f(T)].
// Panels are equal-mass with dyadic refinement toward both tails.
struct DistributionRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
DistributionRule make_distribution_rule(const std::function<double(double)>& quantile,
                                        int panels = 24, int points_per_panel = 12);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// --- root finding -----------------------------------------------------------

// Brent's method. The bracket must straddle a sign change; converges to
// bracket width <= tol (plus machine-precision floor).
double find_root(const std::function<double(double)>& f, RootBracket bracket,
                 double tol = 1e-10);

// --- interpolation ----------------------------------------------------------

// Chebyshev-Lobatto interpolant of f on [a, b], barycentric evaluation.
class ChebyshevInterpolant {
  public:
    ChebyshevInterpolant(const std::function<double(double)>& f, double a, double b, int n);

    double operator()(double x) const;
    int size() const { return static_cast<int>(values_.size()); }

  private:
    double a_;
    double b_;
    std::vector<double> values_;
};

}  // namespace rscov
