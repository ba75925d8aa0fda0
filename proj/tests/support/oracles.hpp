#pragma once

// Independent reference implementations used only by tests. These must stay
// decoupled from the library's own numeric paths: the normal cdf is a Taylor
// series / Mills-ratio continued fraction in long double, and the KS helpers
// are self-contained.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace testsupport {

inline long double ref_normal_pdf(long double z) {
    return std::exp(-0.5L * z * z) * 0.398942280401432677939946059934L;
}

inline long double ref_normal_cdf(long double z) {
    const long double az = std::fabs(z);
    long double tail;
    if (az < 7.0L) {
        // Phi(z) = 1/2 + phi(z) * sum z^(2n+1) / (1*3*5*...*(2n+1))
        long double term = az;
        long double sum = az;
        for (int n = 1; n < 400; ++n) {
            term *= az * az / (2.0L * n + 1.0L);
            sum += term;
            if (term < 1e-25L * sum) break;
        }
        const long double phi = 0.5L + ref_normal_pdf(az) * sum;
        tail = 1.0L - phi;
    } else {
        // Mills ratio continued fraction for the upper tail
        long double cf = 0.0L;
        for (int n = 120; n >= 1; --n) cf = n / (az + cf);
        tail = ref_normal_pdf(az) / (az + cf);
    }
    return z >= 0.0L ? 1.0L - tail : tail;
}

// two-sided KS statistic of a sample against the standard normal
inline double ks_statistic_vs_normal(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = static_cast<double>(ref_normal_cdf(xs[i]));
        d = std::max(d, std::max((i + 1) / n - f, f - i / n));
    }
    return d;
}

// asymptotic Kolmogorov critical value: solve 2 sum (-1)^(j-1) exp(-2 j^2 c^2) = alpha
inline double ks_critical(double alpha, std::size_t n) {
    double lo = 0.3, hi = 3.0;
    auto tail = [](double c) {
        double s = 0.0;
        for (int j = 1; j <= 12; ++j) {
            s += (j % 2 == 1 ? 2.0 : -2.0) * std::exp(-2.0 * j * j * c * c);
        }
        return s;
    };
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (tail(mid) > alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi) / std::sqrt(static_cast<double>(n));
}

}  // namespace testsupport
