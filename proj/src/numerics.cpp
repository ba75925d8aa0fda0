#include "rscov/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <string>

namespace rscov {

namespace {

constexpr double kSqrt1_2 = 0.70710678118654752440;

// 15-point Kronrod nodes on [0,1] side (symmetric) and weights, with the
// embedded 7-point Gauss weights (QUADPACK dqk15 constants).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelResult {
    double integral;
    double error;
};

PanelResult gauss_kronrod_15(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    double fv[15];
    fv[7] = f(center);
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kXgk[i];
        fv[i] = f(center - dx);
        fv[14 - i] = f(center + dx);
    }

    double resk = kWgk[7] * fv[7];
    double resg = kWg[3] * fv[7];
    for (int i = 0; i < 7; ++i) {
        resk += kWgk[i] * (fv[i] + fv[14 - i]);
        if (i % 2 == 1) resg += kWg[i / 2] * (fv[i] + fv[14 - i]);
    }
    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fv[7] - reskh);
    for (int i = 0; i < 7; ++i) {
        resasc += kWgk[i] * (std::abs(fv[i] - reskh) + std::abs(fv[14 - i] - reskh));
    }
    resasc *= std::abs(half);

    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    return {resk * half, err};
}

struct Segment {
    double a;
    double b;
    double integral;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

double adaptive(const std::function<double(double)>& f, double a, double b,
                const QuadratureSpec& spec) {
    std::priority_queue<Segment> heap;
    auto first = gauss_kronrod_15(f, a, b);
    if (!std::isfinite(first.integral)) {
        throw NumericalError("integrate: integrand produced a non-finite value");
    }
    heap.push({a, b, first.integral, first.error});
    double total = first.integral;
    double total_err = first.error;

    int used = 1;
    while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
        if (used >= spec.max_subdivisions) {
            throw NumericalError("integrate: no convergence after " +
                                 std::to_string(spec.max_subdivisions) +
                                 " subdivisions (error " + std::to_string(total_err) + ")");
        }
        Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval exhausted at machine precision; accept its estimate
            total_err -= worst.error;
            if (heap.empty()) break;
            continue;
        }
        auto left = gauss_kronrod_15(f, worst.a, mid);
        auto right = gauss_kronrod_15(f, mid, worst.b);
        if (!std::isfinite(left.integral) || !std::isfinite(right.integral)) {
            throw NumericalError("integrate: integrand produced a non-finite value");
        }
        total += left.integral + right.integral - worst.integral;
        total_err += left.error + right.error - worst.error;
        heap.push({worst.a, mid, left.integral, left.error});
        heap.push({mid, worst.b, right.integral, right.error});
        ++used;
    }
    return total;
}

}  // namespace

void QuadratureSpec::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
        throw std::invalid_argument("QuadratureSpec: tolerances must be positive");
    }
    if (max_subdivisions < 1) {
        throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
    }
}

double normal_pdf(double z) {
    return 0.39894228040143267794 * std::exp(-0.5 * z * z);
}

double normal_cdf(double z) {
    if (!std::isfinite(z)) throw std::invalid_argument("normal_cdf: z must be finite");
    return 0.5 * std::erfc(-z * kSqrt1_2);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("normal_quantile: p must be in (0, 1)");
    }
    // Acklam's rational approximation, then two Newton corrections.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int i = 0; i < 2; ++i) {
        const double e = normal_cdf(x) - p;
        const double u = e / normal_pdf(x);
        x = x - u / (1.0 + 0.5 * x * u);
    }
    return x;
}

namespace {

double gamma_p_series(double a, double x) {
    double sum = 1.0 / a;
    double term = sum;
    for (int n = 1; n < 10000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw NumericalError("regularized_gamma_p: series did not converge");
}

double gamma_q_cont_fraction(double a, double x) {
    // modified Lentz
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw NumericalError("regularized_gamma_q: continued fraction did not converge");
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0)) throw std::invalid_argument("regularized_gamma_p: a must be > 0");
    if (x < 0.0) throw std::invalid_argument("regularized_gamma_p: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cont_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0)) throw std::invalid_argument("regularized_gamma_q: a must be > 0");
    if (x < 0.0) throw std::invalid_argument("regularized_gamma_q: x must be >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cont_fraction(a, x);
}

double chisq_pdf(double t, int dof) {
    if (dof < 1) throw std::invalid_argument("chisq_pdf: dof must be >= 1");
    if (t < 0.0) throw std::invalid_argument("chisq_pdf: t must be >= 0");
    const double a = 0.5 * dof;
    if (t == 0.0) {
        if (dof == 1) return std::numeric_limits<double>::infinity();
        if (dof == 2) return 0.5;
        return 0.0;
    }
    if (std::isinf(t)) return 0.0;
    const double logp = (a - 1.0) * std::log(t) - 0.5 * t - std::lgamma(a) - a * 0.6931471805599453;
    return std::exp(logp);
}

double chisq_cdf(double t, int dof) {
    if (dof < 1) throw std::invalid_argument("chisq_cdf: dof must be >= 1");
    if (t < 0.0) throw std::invalid_argument("chisq_cdf: t must be >= 0");
    return regularized_gamma_p(0.5 * dof, 0.5 * t);
}

double chisq_quantile(double p, int dof) {
    if (dof < 1) throw std::invalid_argument("chisq_quantile: dof must be >= 1");
    if (!(p >= 0.0 && p < 1.0)) {
        throw std::invalid_argument("chisq_quantile: p must be in [0, 1)");
    }
    if (p == 0.0) return 0.0;

    // Wilson-Hilferty start, then safeguarded Newton on the cdf
    const double z = normal_quantile(p);
    const double g = 2.0 / (9.0 * dof);
    double x = dof * std::pow(std::max(1.0 - g + z * std::sqrt(g), 1e-8), 3);
    if (!(x > 0.0) || !std::isfinite(x)) x = static_cast<double>(dof);

    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 300; ++it) {
        const double fx = chisq_cdf(x, dof) - p;
        if (fx > 0.0) {
            hi = std::min(hi, x);
        } else {
            lo = std::max(lo, x);
        }
        const double dens = chisq_pdf(x, dof);
        double step = (dens > 0.0 && std::isfinite(dens)) ? fx / dens : 0.0;
        double next = x - step;
        if (!(next > lo && next < hi) || step == 0.0) {
            next = std::isinf(hi) ? std::max(2.0 * x, x + 1.0) : 0.5 * (lo + hi);
        }
        if (std::abs(next - x) <= 1e-14 * std::abs(x)) {
            return next;
        }
        x = next;
    }
    return x;
}

double min_order_stat_pdf(double t, int dof, int m) {
    if (m < 1) throw std::invalid_argument("min_order_stat_pdf: m must be >= 1");
    const double dens = chisq_pdf(t, dof);
    if (m == 1) return dens;
    if (dens == 0.0) return 0.0;
    const double q = regularized_gamma_q(0.5 * dof, 0.5 * t);  // 1 - cdf
    return m * dens * std::pow(q, m - 1);
}

double min_order_stat_cdf(double t, int dof, int m) {
    if (m < 1) throw std::invalid_argument("min_order_stat_cdf: m must be >= 1");
    const double q = regularized_gamma_q(0.5 * dof, 0.5 * t);
    // 1 - q^m, careful near q = 1
    return -std::expm1(m * std::log(q > 0.0 ? q : std::numeric_limits<double>::min()));
}

double min_order_stat_quantile(double p, int dof, int m) {
    if (m < 1) throw std::invalid_argument("min_order_stat_quantile: m must be >= 1");
    if (!(p >= 0.0 && p < 1.0)) {
        throw std::invalid_argument("min_order_stat_quantile: p must be in [0, 1)");
    }
    // F(t) = 1 - (1 - Gamma(t))^m  =>  Gamma(t) = 1 - (1-p)^(1/m)
    const double u = -std::expm1(std::log1p(-p) / m);
    return chisq_quantile(u, dof);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSpec& spec) {
    spec.validate();
    if (!(a < b)) throw std::invalid_argument("integrate: requires a < b");
    return adaptive(f, a, b, spec);
}

double integrate_semi_infinite(const std::function<double(double)>& f,
                               const QuadratureSpec& spec) {
    spec.validate();
    auto g = [&f](double u) {
        const double om = 1.0 - u;
        const double t = u / om;
        if (!std::isfinite(t)) return 0.0;
        const double ft = f(t);
        if (ft == 0.0) return 0.0;
        return ft / (om * om);
    };
    return adaptive(g, 0.0, 1.0, spec);
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Newton from the Chebyshev-based initial guess
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

DistributionRule make_distribution_rule(const std::function<double(double)>& quantile,
                                        int panels, int points_per_panel) {
    if (panels < 1 || points_per_panel < 1) {
        throw std::invalid_argument("make_distribution_rule: panels and points must be >= 1");
    }
    const double eps = 1e-12;
    std::set<double> cuts;
    cuts.insert(eps);
    cuts.insert(1.0 - eps);
    for (int i = 1; i < panels; ++i) {
        cuts.insert(static_cast<double>(i) / panels);
    }
    // dyadic refinement into both tails so the last panels carry tiny mass
    const double base = 1.0 / panels;
    for (int j = 1; j <= 14; ++j) {
        const double s = base * std::ldexp(1.0, -j);
        if (s > eps) {
            cuts.insert(s);
            cuts.insert(1.0 - s);
        }
    }

    std::vector<double> gl_x, gl_w;
    gauss_legendre(points_per_panel, gl_x, gl_w);

    DistributionRule rule;
    double prev = 0.0;
    bool have_prev = false;
    for (double p : cuts) {
        if (have_prev && p > prev) {
            const double mid = 0.5 * (prev + p);
            const double half = 0.5 * (p - prev);
            for (int i = 0; i < points_per_panel; ++i) {
                rule.nodes.push_back(quantile(mid + half * gl_x[i]));
                rule.weights.push_back(half * gl_w[i]);
            }
        }
        prev = p;
        have_prev = true;
    }
    // renormalize away the clipped tail mass
    double mass = 0.0;
    for (double w : rule.weights) mass += w;
    for (double& w : rule.weights) w /= mass;
    return rule;
}

double find_root(const std::function<double(double)>& f, RootBracket bracket, double tol) {
    if (!(bracket.lo < bracket.hi)) {
        throw std::invalid_argument("find_root: bracket requires lo < hi");
    }
    if (!(tol > 0.0)) throw std::invalid_argument("find_root: tol must be > 0");

    double a = bracket.lo, b = bracket.hi;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) {
        throw std::invalid_argument("find_root: no sign change on bracket");
    }

    // Brent (Numerical Recipes zbrent)
    double c = a, fc = fa;
    double d = b - a, e = d;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int iter = 0; iter < 200; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
            const double min2 = std::abs(e * q);
            if (2.0 * p < std::min(min1, min2)) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if (std::abs(d) > tol1) {
            b += d;
        } else {
            b += (xm > 0.0 ? tol1 : -tol1);
        }
        fb = f(b);
    }
    throw NumericalError("find_root: iteration limit reached");
}

ChebyshevInterpolant::ChebyshevInterpolant(const std::function<double(double)>& f, double a,
                                           double b, int n)
    : a_(a), b_(b) {
    if (!(a < b)) throw std::invalid_argument("ChebyshevInterpolant: requires a < b");
    if (n < 2) throw std::invalid_argument("ChebyshevInterpolant: need at least 2 nodes");
    values_.resize(n);
    for (int j = 0; j < n; ++j) {
        const double t = std::cos(M_PI * j / (n - 1));  // Lobatto nodes, 1 .. -1
        const double x = 0.5 * (a + b) + 0.5 * (b - a) * t;
        values_[j] = f(x);
    }
}

double ChebyshevInterpolant::operator()(double x) const {
    const int n = static_cast<int>(values_.size());
    const double t = (2.0 * x - (a_ + b_)) / (b_ - a_);
    double num = 0.0, den = 0.0;
    for (int j = 0; j < n; ++j) {
        const double tj = std::cos(M_PI * j / (n - 1));
        const double diff = t - tj;
        if (std::abs(diff) < 1e-14) return values_[j];
        double w = (j % 2 == 0) ? 1.0 : -1.0;
        if (j == 0 || j == n - 1) w *= 0.5;
        const double q = w / diff;
        num += q * values_[j];
        den += q;
    }
    return num / den;
}

}  // namespace rscov
