#include "rscov/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rscov/numerics.hpp"

namespace rscov {

namespace {

constexpr double kConditionLimit = 1e12;

// first d primes, for Halton sequences
int nth_prime(int n) {
    static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
    if (n < 0 || n >= static_cast<int>(std::size(primes))) {
        throw std::invalid_argument("covariate dimension too large for the QMC scheme");
    }
    return primes[n];
}

double halton(std::uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

double marginal_quantile(const Marginal& m, double u) {
    if (const auto* uni = std::get_if<UniformMarginal>(&m)) {
        return uni->lo + (uni->hi - uni->lo) * u;
    }
    if (const auto* tri = std::get_if<TriangularMarginal>(&m)) {
        const double range = tri->hi - tri->lo;
        if (range <= 0.0) return tri->lo;
        const double fm = (tri->mode - tri->lo) / range;
        if (u < fm) return tri->lo + std::sqrt(u * range * (tri->mode - tri->lo));
        return tri->hi - std::sqrt((1.0 - u) * range * (tri->hi - tri->mode));
    }
    const auto& pmf = std::get<FinitePmfMarginal>(m);
    double acc = 0.0;
    for (std::size_t i = 0; i < pmf.values.size(); ++i) {
        acc += pmf.probs[i];
        if (u < acc) return pmf.values[i];
    }
    return pmf.values.back();
}

// per-dimension quadrature nodes (value, weight), weights summing to 1
void marginal_nodes(const Marginal& m, int n, std::vector<double>& values,
                    std::vector<double>& weights) {
    values.clear();
    weights.clear();
    if (const auto* pmf = std::get_if<FinitePmfMarginal>(&m)) {
        values = pmf->values;
        weights = pmf->probs;
        return;
    }
    std::vector<double> gx, gw;
    gauss_legendre(n, gx, gw);
    if (const auto* uni = std::get_if<UniformMarginal>(&m)) {
        const double mid = 0.5 * (uni->lo + uni->hi);
        const double half = 0.5 * (uni->hi - uni->lo);
        for (int i = 0; i < n; ++i) {
            values.push_back(mid + half * gx[i]);
            weights.push_back(0.5 * gw[i]);
        }
        return;
    }
    const auto& tri = std::get<TriangularMarginal>(m);
    const double range = tri.hi - tri.lo;
    auto density = [&](double x) {
        if (x < tri.mode) return 2.0 * (x - tri.lo) / (range * (tri.mode - tri.lo));
        return 2.0 * (tri.hi - x) / (range * (tri.hi - tri.mode));
    };
    auto add_piece = [&](double a, double b) {
        if (!(b > a)) return;
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        for (int i = 0; i < n; ++i) {
            const double x = mid + half * gx[i];
            values.push_back(x);
            weights.push_back(half * gw[i] * density(x));
        }
    };
    add_piece(tri.lo, tri.mode);
    add_piece(tri.mode, tri.hi);
}

}  // namespace

DesignMatrix DesignMatrix::build(const Eigen::MatrixXd& points) {
    const int m = static_cast<int>(points.rows());
    const int dp1 = static_cast<int>(points.cols());
    if (dp1 < 1 || m < dp1) {
        throw std::invalid_argument("build_design: need m >= d+1 design points");
    }
    for (int j = 0; j < m; ++j) {
        if (points(j, 0) != 1.0) {
            throw std::invalid_argument("build_design: design point " + std::to_string(j) +
                                        " lacks the leading 1");
        }
    }
    const Eigen::MatrixXd gram = points.transpose() * points;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kConditionLimit) {
        throw std::invalid_argument("build_design: singular design (X'X condition number " +
                                    std::to_string(lo > 0.0 ? hi / lo : INFINITY) + ")");
    }
    DesignMatrix out;
    out.x_ = points;
    out.gram_inv_ = es.eigenvectors() *
                    es.eigenvalues().cwiseInverse().asDiagonal() *
                    es.eigenvectors().transpose();
    out.cond_ = hi / lo;
    return out;
}

double quadratic_form(const Eigen::VectorXd& x, const DesignMatrix& design) {
    if (x.size() != design.d() + 1) {
        throw std::invalid_argument("quadratic_form: dimension mismatch (got " +
                                    std::to_string(x.size()) + ", expected " +
                                    std::to_string(design.d() + 1) + ")");
    }
    return x.dot(design.gram_inverse() * x);
}

void CovariateSpace::validate() const {
    for (const auto& c : dims) {
        if (const auto* iv = std::get_if<Interval>(&c)) {
            if (!(iv->lo <= iv->hi)) {
                throw std::invalid_argument("CovariateSpace: interval requires lo <= hi");
            }
            if (!std::isfinite(iv->lo) || !std::isfinite(iv->hi)) {
                throw std::invalid_argument("CovariateSpace: unbounded interval");
            }
        } else {
            const auto& set = std::get<FiniteSet>(c);
            if (set.empty()) {
                throw std::invalid_argument("CovariateSpace: empty finite set");
            }
        }
    }
}

bool CovariateSpace::contains(const Eigen::VectorXd& augmented, double tol) const {
    if (augmented.size() != d() + 1 || augmented(0) != 1.0) return false;
    for (int i = 0; i < d(); ++i) {
        const double v = augmented(i + 1);
        if (const auto* iv = std::get_if<Interval>(&dims[i])) {
            if (v < iv->lo - tol || v > iv->hi + tol) return false;
        } else {
            const auto& set = std::get<FiniteSet>(dims[i]);
            bool hit = false;
            for (double s : set) {
                if (std::abs(s - v) <= tol) {
                    hit = true;
                    break;
                }
            }
            if (!hit) return false;
        }
    }
    return true;
}

void CovariateDistribution::validate() const {
    for (const auto& m : marginals) {
        if (const auto* uni = std::get_if<UniformMarginal>(&m)) {
            if (!(uni->lo < uni->hi)) {
                throw std::invalid_argument("uniform marginal requires lo < hi");
            }
        } else if (const auto* tri = std::get_if<TriangularMarginal>(&m)) {
            if (!(tri->lo <= tri->mode && tri->mode <= tri->hi && tri->lo < tri->hi)) {
                throw std::invalid_argument("triangular marginal requires lo <= mode <= hi");
            }
        } else {
            const auto& pmf = std::get<FinitePmfMarginal>(m);
            if (pmf.values.empty() || pmf.values.size() != pmf.probs.size()) {
                throw std::invalid_argument("finite pmf marginal: values/probs mismatch");
            }
            double sum = 0.0;
            for (double p : pmf.probs) {
                if (p < 0.0) throw std::invalid_argument("finite pmf marginal: negative prob");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12) {
                throw std::invalid_argument("finite pmf marginal: probs sum to " +
                                            std::to_string(sum) + ", not 1");
            }
        }
    }
}

double CovariateDistribution::marginal_mean(int dim) const {
    const auto& m = marginals.at(dim);
    if (const auto* uni = std::get_if<UniformMarginal>(&m)) {
        return 0.5 * (uni->lo + uni->hi);
    }
    if (const auto* tri = std::get_if<TriangularMarginal>(&m)) {
        return (tri->lo + tri->mode + tri->hi) / 3.0;
    }
    const auto& pmf = std::get<FinitePmfMarginal>(m);
    return std::inner_product(pmf.values.begin(), pmf.values.end(), pmf.probs.begin(), 0.0);
}

Eigen::VectorXd CovariateDistribution::mean() const {
    Eigen::VectorXd out(d() + 1);
    out(0) = 1.0;
    for (int i = 0; i < d(); ++i) out(i + 1) = marginal_mean(i);
    return out;
}

CovariateSpace CovariateDistribution::support() const {
    CovariateSpace space;
    for (const auto& m : marginals) {
        if (const auto* uni = std::get_if<UniformMarginal>(&m)) {
            space.dims.emplace_back(Interval{uni->lo, uni->hi});
        } else if (const auto* tri = std::get_if<TriangularMarginal>(&m)) {
            space.dims.emplace_back(Interval{tri->lo, tri->hi});
        } else {
            space.dims.emplace_back(std::get<FinitePmfMarginal>(m).values);
        }
    }
    return space;
}

CovariateDistribution uniform_box(int d, double lo, double hi) {
    CovariateDistribution dist;
    for (int i = 0; i < d; ++i) dist.marginals.emplace_back(UniformMarginal{lo, hi});
    return dist;
}

void ExpectationScheme::validate() const {
    if (nodes_or_samples < 1) {
        throw std::invalid_argument("ExpectationScheme: nodes_or_samples must be >= 1");
    }
}

ExpectationScheme default_scheme_for(int d) {
    ExpectationScheme scheme;
    if (d <= 4) {
        scheme.kind = ExpectationKind::TensorQuadrature;
        scheme.nodes_or_samples = 16;
    } else {
        scheme.kind = ExpectationKind::QuasiMonteCarlo;
        scheme.nodes_or_samples = 1 << 16;
    }
    return scheme;
}

ExpectationNodes expectation_nodes(const CovariateDistribution& dist,
                                   const ExpectationScheme& scheme) {
    dist.validate();
    scheme.validate();
    const int d = dist.d();
    ExpectationNodes out;

    if (scheme.kind == ExpectationKind::TensorQuadrature) {
        std::vector<std::vector<double>> values(d), weights(d);
        long long total = 1;
        for (int i = 0; i < d; ++i) {
            marginal_nodes(dist.marginals[i], scheme.nodes_or_samples, values[i], weights[i]);
            total *= static_cast<long long>(values[i].size());
            if (total > 4'000'000) {
                throw std::invalid_argument(
                    "tensor quadrature grid too large; use a QMC or Monte Carlo scheme");
            }
        }
        out.points.resize(total, d + 1);
        out.weights.resize(total);
        std::vector<std::size_t> idx(d, 0);
        for (long long n = 0; n < total; ++n) {
            out.points(n, 0) = 1.0;
            double w = 1.0;
            for (int i = 0; i < d; ++i) {
                out.points(n, i + 1) = values[i][idx[i]];
                w *= weights[i][idx[i]];
            }
            out.weights[n] = w;
            for (int i = d - 1; i >= 0; --i) {
                if (++idx[i] < values[i].size()) break;
                idx[i] = 0;
            }
        }
        return out;
    }

    const int n = scheme.nodes_or_samples;
    out.points.resize(n, d + 1);
    out.weights.assign(n, 1.0 / n);

    if (scheme.kind == ExpectationKind::QuasiMonteCarlo) {
        // Halton sequence with a Cranley-Patterson rotation keyed by the seed
        RngStream shift_rng(scheme.seed.value_or(0));
        std::vector<double> shift(d);
        for (int i = 0; i < d; ++i) shift[i] = shift_rng.uniform();
        for (int t = 0; t < n; ++t) {
            out.points(t, 0) = 1.0;
            for (int i = 0; i < d; ++i) {
                double u = halton(static_cast<std::uint64_t>(t) + 1, nth_prime(i)) + shift[i];
                if (u >= 1.0) u -= 1.0;
                out.points(t, i + 1) = marginal_quantile(dist.marginals[i], u);
            }
        }
        return out;
    }

    RngStream rng(scheme.seed.value_or(0));
    for (int t = 0; t < n; ++t) {
        out.points.row(t) = sample_covariate(dist, rng);
    }
    return out;
}

double expect_over_covariates(const std::function<double(const Eigen::VectorXd&)>& f,
                              const CovariateDistribution& dist,
                              const ExpectationScheme& scheme) {
    const ExpectationNodes nodes = expectation_nodes(dist, scheme);
    double acc = 0.0;
    for (long long i = 0; i < nodes.points.rows(); ++i) {
        acc += nodes.weights[i] * f(nodes.points.row(i));
    }
    return acc;
}

Eigen::VectorXd sample_covariate(const CovariateDistribution& dist, RngStream& rng) {
    Eigen::VectorXd x(dist.d() + 1);
    x(0) = 1.0;
    for (int i = 0; i < dist.d(); ++i) {
        x(i + 1) = marginal_quantile(dist.marginals[i], rng.uniform());
    }
    return x;
}

MaxQuadraticResult max_quadratic(const CovariateSpace& space, const DesignMatrix& design) {
    space.validate();
    if (space.d() != design.d()) {
        throw std::invalid_argument("max_quadratic: space dimension mismatch");
    }
    // candidate values per dimension: interval endpoints or {min, max} of the set
    std::vector<std::vector<double>> cand(space.d());
    for (int i = 0; i < space.d(); ++i) {
        if (const auto* iv = std::get_if<Interval>(&space.dims[i])) {
            cand[i].push_back(iv->lo);
            if (iv->hi > iv->lo) cand[i].push_back(iv->hi);
        } else {
            const auto& set = std::get<FiniteSet>(space.dims[i]);
            const auto [mn, mx] = std::minmax_element(set.begin(), set.end());
            cand[i].push_back(*mn);
            if (*mx > *mn) cand[i].push_back(*mx);
        }
    }

    MaxQuadraticResult best;
    best.v_max = -1.0;
    Eigen::VectorXd x(space.d() + 1);
    x(0) = 1.0;
    std::vector<std::size_t> idx(space.d(), 0);
    auto lex_less = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        for (int i = 0; i < a.size(); ++i) {
            if (a(i) != b(i)) return a(i) < b(i);
        }
        return false;
    };
    while (true) {
        for (int i = 0; i < space.d(); ++i) x(i + 1) = cand[i][idx[i]];
        const double v = quadratic_form(x, design);
        const double tie_tol = 1e-12 * std::max(1.0, std::abs(best.v_max));
        if (v > best.v_max + tie_tol) {
            best.v_max = v;
            best.x0 = x;
        } else if (v > best.v_max - tie_tol && lex_less(x, best.x0)) {
            best.x0 = x;
        }
        int i = space.d() - 1;
        for (; i >= 0; --i) {
            if (++idx[i] < cand[i].size()) break;
            idx[i] = 0;
        }
        if (i < 0) break;
    }
    return best;
}

}  // namespace rscov
