#pragma once

// (K̄, H) stability maps of the symmetric Lorentzian two-stream, boundary
// tracing on the exact growth function, and K̄-band reports at fixed H.

#include "qplasma/dispersion_analytic.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace qplasma {

enum class Stability { stable, unstable };

inline const char* to_string(Stability s) { return s == Stability::stable ? "stable" : "unstable"; }

inline constexpr double growth_tolerance = 1e-12;
inline constexpr double boundary_tolerance = 1e-8;

struct Classification {
    Stability stability;
    double growth_rate; // max(Im Ω̄, 0)
};

/// Marginal points (Im Ω̄ within the tolerance of zero) count as stable.
inline Classification classify(double K_bar, double H, double alpha) {
    require(H >= 0 && std::isfinite(H), "H", "must be non-negative");
    const double g = two_stream_lorentzian(K_bar, H, alpha).growth_rate();
    if (g > growth_tolerance) return {Stability::unstable, g};
    return {Stability::stable, 0.0};
}

/// Im Ω̄ continued through the stable side with a sign change: equal to Im Ω̄
/// wherever the cold branch is unstable, and -sqrt(Ω̄²₋) - αK̄ < 0 where it is
/// stable. Its zero set is the stability boundary, including at α = 0 where
/// Im Ω̄ itself vanishes identically on the stable side.
inline double signed_growth(double K_bar, double H, double alpha) {
    detail::require_alpha(alpha);
    const double m = two_stream_cold_quartic(K_bar, H).minus;
    const double root = m < 0 ? std::sqrt(-m) : -std::sqrt(m);
    return root - alpha * K_bar;
}

namespace detail {

// Bisects f on [lo, hi] (f(lo), f(hi) of opposite sign) down to the
// resolution of double precision. Returns the endpoint with smaller |f|.
template <class F>
double bisect_sign_change(F&& f, double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

inline void require_axis(const std::vector<double>& axis, const char* name) {
    require(axis.size() >= 2, name, "a map axis needs at least two points");
    for (std::size_t i = 0; i < axis.size(); ++i) {
        require(std::isfinite(axis[i]), name, "axis values must be finite");
        if (i > 0) require(axis[i] > axis[i - 1], name, "axis must be strictly increasing");
    }
}

} // namespace detail

/// Uniform axis of `n` points on [lo, hi]; with `open_low` the point lo is
/// skipped, giving hi * (1..n)/n style spacing from lo.
inline std::vector<double> uniform_axis(double lo, double hi, int n, bool open_low = false) {
    require(n >= 2, "points", "need at least two points");
    require(hi > lo, "range", "upper end must exceed lower end");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = open_low ? static_cast<double>(i + 1) / n : static_cast<double>(i) / (n - 1);
        out[static_cast<std::size_t>(i)] = lo + t * (hi - lo);
    }
    return out;
}

struct BoundaryPoint {
    double K_bar;
    double H;
    double residual; // |signed growth| at the refined point
};

/// Curve 0 collects points where the map turns stable with increasing H
/// (upper boundary), curve 1 where it turns unstable (lower boundary). Further
/// crossings in one column get ids 2, 3, ... in the same pattern.
struct BoundaryCurve {
    int curve_id;
    std::vector<BoundaryPoint> points;
};

struct StabilityMap {
    std::vector<double> K_axis;
    std::vector<double> H_axis;
    double alpha = 0;
    std::vector<Classification> cells; // index i * H_axis.size() + j for (K_axis[i], H_axis[j])
    std::vector<BoundaryCurve> boundaries;

    const Classification& at(std::size_t i, std::size_t j) const { return cells[i * H_axis.size() + j]; }
};

inline StabilityMap build_map(std::vector<double> K_axis, std::vector<double> H_axis, double alpha) {
    detail::require_axis(K_axis, "K_axis");
    detail::require_axis(H_axis, "H_axis");
    require(K_axis.front() > 0, "K_axis", "K_bar values must be positive");
    require(H_axis.front() >= 0, "H_axis", "H values must be non-negative");
    detail::require_alpha(alpha);

    StabilityMap map;
    map.K_axis = std::move(K_axis);
    map.H_axis = std::move(H_axis);
    map.alpha = alpha;
    const std::size_t nk = map.K_axis.size();
    const std::size_t nh = map.H_axis.size();
    map.cells.reserve(nk * nh);
    for (double K : map.K_axis)
        for (double H : map.H_axis) map.cells.push_back(classify(K, H, alpha));

    for (std::size_t i = 0; i < nk; ++i) {
        const double K = map.K_axis[i];
        auto g = [&](double H) { return signed_growth(K, H, alpha); };
        int upper = 0;
        int lower = 0;
        for (std::size_t j = 0; j + 1 < nh; ++j) {
            const Stability a = map.at(i, j).stability;
            const Stability b = map.at(i, j + 1).stability;
            if (a == b) continue;
            const double lo = map.H_axis[j];
            const double hi = map.H_axis[j + 1];
            // Cell classes and the sign of g can disagree within the growth
            // tolerance of the boundary; bisect only on a genuine sign change.
            if ((g(lo) > 0) == (g(hi) > 0)) continue;
            const double H = detail::bisect_sign_change(g, lo, hi);
            const bool turns_stable = a == Stability::unstable;
            const int id = turns_stable ? 2 * upper++ : 2 * lower++ + 1;
            auto it = std::find_if(map.boundaries.begin(), map.boundaries.end(),
                                   [&](const BoundaryCurve& c) { return c.curve_id == id; });
            if (it == map.boundaries.end()) {
                map.boundaries.push_back({id, {}});
                it = map.boundaries.end() - 1;
            }
            it->points.push_back({K, H, std::abs(g(H))});
        }
    }
    std::sort(map.boundaries.begin(), map.boundaries.end(),
              [](const BoundaryCurve& a, const BoundaryCurve& b) { return a.curve_id < b.curve_id; });
    return map;
}

/// 400 x 400 over K̄ ∈ (0, 4], H ∈ [0, 4].
inline StabilityMap build_default_map(double alpha) {
    return build_map(uniform_axis(0.0, 4.0, 400, true), uniform_axis(0.0, 4.0, 400), alpha);
}

struct KInterval {
    double lower;
    double upper;
};

/// Unstable K̄ intervals at fixed (H, α) within [K_min, K_max]. The growth sign
/// is sampled at `samples` points and every change is refined by bisection.
/// An interval already unstable at K_min starts there.
inline std::vector<KInterval> band_report(double H, double alpha, double K_min, double K_max,
                                          int samples = 4000) {
    require(H >= 0 && std::isfinite(H), "H", "must be non-negative");
    detail::require_alpha(alpha);
    require(K_min > 0, "K_min", "must be positive");
    require(K_max > K_min && std::isfinite(K_max), "K_max", "must exceed K_min");
    require(samples >= 2, "samples", "need at least two samples");

    auto g = [&](double K) { return signed_growth(K, H, alpha); };
    auto unstable = [&](double K) { return g(K) > 0; };
    std::vector<KInterval> bands;
    double prev_K = K_min;
    bool prev = unstable(K_min);
    double open = K_min; // lower edge of the band in progress, valid while prev is true
    for (int s = 1; s < samples; ++s) {
        const double K = K_min + (K_max - K_min) * s / (samples - 1);
        const bool now = unstable(K);
        if (now != prev) {
            const double edge = detail::bisect_sign_change(g, prev_K, K);
            if (now) open = edge;
            else bands.push_back({open, edge});
        }
        prev = now;
        prev_K = K;
    }
    if (prev) bands.push_back({open, K_max});
    return bands;
}

/// Largest growth rate over H at fixed K̄ > 1, searched inside the cold
/// unstable window H₋ < H < H₊ that contains every unstable H for that K̄.
inline double peak_growth_over_H(double K_bar, double alpha) {
    require(K_bar > 1, "K_bar", "the bounded H window exists for K_bar > 1");
    const StabilityBounds b = stability_boundaries(K_bar);
    const double lo = std::sqrt(std::max(0.0, b.H_minus_sq));
    const double hi = std::sqrt(b.H_plus_sq);
    auto neg = [&](double H) { return -signed_growth(K_bar, H, alpha); };
    const auto best = boost::math::tools::brent_find_minima(neg, lo, hi, 52);
    return -best.second;
}

/// K̄ beyond which no H gives growth at broadening α, located by bisection of
/// the peak growth between `K_lo` (band alive) and `K_hi` (band gone).
inline double band_termination(double alpha, double K_lo, double K_hi) {
    require(alpha > 0, "alpha", "must be positive");
    require(K_lo > 1 && K_hi > K_lo, "K_range", "need 1 < K_lo < K_hi");
    auto f = [&](double K) { return peak_growth_over_H(K, alpha); };
    require(f(K_lo) > 0 && f(K_hi) < 0, "K_range", "range does not bracket the band termination");
    return detail::bisect_sign_change(f, K_lo, K_hi);
}

} // namespace qplasma
