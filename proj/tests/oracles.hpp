// Test-side reference implementations, kept independent of the library
// code paths they check.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "evkit/hawkes.hpp"

namespace oracles {

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, m, fa, flm, fm);
    const double right = simpson(f, m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol) {
    if (b <= a) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = simpson(f, a, b, fa, fm, fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

// Total intensity from the definition: direct double sum, no shared
// state with the library.
inline double total_intensity_direct(const evkit::HawkesParams& params,
                                     const evkit::EventSequence& seq, double t) {
    double lam = params.mu.sum();
    for (const evkit::TimedEvent& e : seq.events) {
        if (e.time >= t) break;
        double col = 0.0;
        for (int k = 0; k < params.num_types(); ++k) col += params.alpha(k, e.type);
        lam += col * params.beta * std::exp(-params.beta * (t - e.time));
    }
    return lam;
}

// Integral of the total intensity over [0, T] by adaptive quadrature,
// split at event times where the integrand kinks.
inline double integrate_total_intensity(const evkit::HawkesParams& params,
                                        const evkit::EventSequence& seq, double tol) {
    std::vector<double> knots{0.0};
    for (const evkit::TimedEvent& e : seq.events)
        if (e.time > knots.back() && e.time < seq.horizon) knots.push_back(e.time);
    knots.push_back(seq.horizon);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        // nudge the left endpoint so the event at the knot is included
        const double a = knots[i], b = knots[i + 1];
        auto f = [&](double t) {
            return total_intensity_direct(params, seq, std::max(t, std::nextafter(a, b)));
        };
        total += adaptive_simpson(f, a, b, tol);
    }
    return total;
}

// Maximum bipartite matching by subset DP over the gold side; the
// independent route against the augmenting-path implementation.
inline int max_matching_dp(const std::vector<std::vector<int>>& edges, int n_gold) {
    const int n_pred = static_cast<int>(edges.size());
    std::vector<std::vector<int>> memo(static_cast<std::size_t>(n_pred) + 1,
                                       std::vector<int>(1u << n_gold, -1));
    std::function<int(int, unsigned)> best = [&](int p, unsigned used) -> int {
        if (p == n_pred) return 0;
        int& cached = memo[static_cast<std::size_t>(p)][used];
        if (cached >= 0) return cached;
        int result = best(p + 1, used);
        for (int g : edges[static_cast<std::size_t>(p)])
            if (!(used & (1u << g))) result = std::max(result, 1 + best(p + 1, used | (1u << g)));
        return cached = result;
    };
    return best(0, 0u);
}

// AR(4) simulation written out directly (not via ar_step).
inline std::vector<double> simulate_ar4(const std::array<double, 4>& phi, double sigma,
                                        std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> dy(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double value = sigma > 0 ? sigma * gauss(rng) : 0.0;
        for (std::size_t lag = 1; lag <= 4 && lag <= t; ++lag)
            value += phi[lag - 1] * dy[t - lag];
        dy[t] = value;
    }
    return dy;
}

}  // namespace oracles
