#pragma once

// Closed-form dispersion branches for one- and two-stream quantum plasmas,
// the two-stream instability conditions and band structure, and the
// asymptotic growth-rate formulas. All quantities are dimensionless (see
// core.hpp); the perturbation convention is exp[i(K̄x̄ - Ω̄t̄)], so
// Im Ω̄ > 0 is growth.
//
// Normalizations: the one-stream branches use the stream's own drift and the
// full-density plasma frequency; the symmetric two-stream branches use the
// common drift |p0| and the total-density ω_p0 with half the density in each
// beam.

#include "qplasma/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string_view>
#include <utility>

namespace qplasma {

using cdouble = std::complex<double>;

struct ComplexFrequency {
    cdouble omega;

    double real() const noexcept { return omega.real(); }
    /// Positive for growth, negative for damping.
    double growth_rate() const noexcept { return omega.imag(); }
    bool finite() const noexcept { return std::isfinite(omega.real()) && std::isfinite(omega.imag()); }
};

namespace detail {
inline void require_positive_k(double K_bar) {
    require(K_bar > 0 && std::isfinite(K_bar), "K_bar", "must be positive");
}
inline void require_alpha(double alpha) {
    require(alpha >= 0 && std::isfinite(alpha), "alpha", "must be non-negative");
}
// Quantum recoil term h = H² K̄⁴ / 4.
inline double recoil(double K_bar, double H) {
    const double k2 = K_bar * K_bar;
    return 0.25 * H * H * k2 * k2;
}
} // namespace detail

/// Cold single-stream branches Ω̄ = K̄ ± sqrt(1 + H²K̄⁴/4).
inline std::pair<double, double> one_stream_cold(double K_bar, double H) {
    detail::require_positive_k(K_bar);
    const double root = std::sqrt(1.0 + detail::recoil(K_bar, H));
    return {K_bar + root, K_bar - root};
}

/// Lorentzian single stream: the cold branch shifted by -iαK̄.
inline ComplexFrequency one_stream_lorentzian(double K_bar, double H, double alpha,
                                              BranchSign branch = BranchSign::plus) {
    detail::require_alpha(alpha);
    const auto [plus, minus] = one_stream_cold(K_bar, H);
    const double re = branch == BranchSign::plus ? plus : minus;
    return {cdouble(re, -alpha * K_bar)};
}

/// The two roots Ω̄² of the symmetric cold two-stream biquadratic
///   Ω̄⁴ - (1 + 2K̄² + H²K̄⁴/2) Ω̄² - K̄²(1 - H²K̄²/4)(1 - K̄² + H²K̄⁴/4) = 0.
struct QuarticRoots {
    double plus;  // always positive
    double minus; // negative inside the unstable region
};

inline QuarticRoots two_stream_cold_quartic(double K_bar, double H) {
    detail::require_positive_k(K_bar);
    const double k2 = K_bar * K_bar;
    const double h = detail::recoil(K_bar, H);
    const double disc = 1.0 + 8.0 * k2 + 4.0 * H * H * k2 * k2 * k2;
    const double plus = 0.5 + k2 + h + 0.5 * std::sqrt(disc);
    // Ω̄²₊ Ω̄²₋ = (K̄² - h)(K̄² - h - 1); dividing avoids the cancellation in
    // the minus root near the stability boundary.
    const double constant = (k2 - h) * (k2 - h - 1.0);
    return {plus, constant / plus};
}

/// (H²K̄² - 4)(H²K̄⁴ - 4K̄² + 4) < 0. Marginal points are stable.
inline bool two_stream_cold_unstable(double K_bar, double H) {
    detail::require_positive_k(K_bar);
    const double k2 = K_bar * K_bar;
    const double a = H * H * k2 - 4.0;
    const double b = H * H * k2 * k2 - 4.0 * k2 + 4.0;
    return a * b < 0.0;
}

/// H₋² = (4/K̄²)(1 - 1/K̄²) and H₊² = 4/K̄². The cold two-stream is unstable
/// iff H₋² < H² < H₊². H₋² is negative (vacuous) for K̄ < 1.
struct StabilityBounds {
    double H_minus_sq;
    double H_plus_sq;
};

inline StabilityBounds stability_boundaries(double K_bar) {
    detail::require_positive_k(K_bar);
    const double k2 = K_bar * K_bar;
    return {4.0 / k2 * (1.0 - 1.0 / k2), 4.0 / k2};
}

/// Band structure of the cold instability at fixed H: unstable for
/// K̄ ∈ (0, K₋_low) ∪ (K₋_high, K₊) when H ≤ 1, else (0, K₊).
struct BandEdges {
    double K_plus;
    std::optional<double> K_minus_low;
    std::optional<double> K_minus_high;
};

inline BandEdges band_edges(double H) {
    require(H > 0 && std::isfinite(H), "H", "band edges need H > 0");
    BandEdges e{2.0 / H, std::nullopt, std::nullopt};
    if (H <= 1.0) {
        // Roots in K̄² of H²K̄⁴/4 - K̄² + 1 = 0.
        const double s = std::sqrt(std::max(0.0, 1.0 - H * H));
        const double high_sq = 2.0 / (H * H) * (1.0 + s);
        const double low_sq = 4.0 / (H * H) / high_sq;
        e.K_minus_low = std::sqrt(low_sq);
        e.K_minus_high = std::sqrt(high_sq);
    }
    return e;
}

/// Symmetric Lorentzian two-stream on the unstable branch:
///   Ω̄ = -iαK̄ + sqrt(Ω̄²₋)   (principal root)
/// so Im Ω̄ = -αK̄ + sqrt(-Ω̄²₋) wherever the cold branch is unstable.
inline ComplexFrequency two_stream_lorentzian(double K_bar, double H, double alpha) {
    detail::require_alpha(alpha);
    const QuarticRoots r = two_stream_cold_quartic(K_bar, H);
    const cdouble z = std::sqrt(cdouble(r.minus, 0.0));
    return {z - cdouble(0.0, alpha * K_bar)};
}

/// All four roots of the symmetric Lorentzian two-stream relation, ordered
/// {+sqrt(Ω̄²₊), -sqrt(Ω̄²₊), +sqrt(Ω̄²₋), -sqrt(Ω̄²₋)} each shifted by -iαK̄.
inline std::array<ComplexFrequency, 4> two_stream_lorentzian_roots(double K_bar, double H,
                                                                   double alpha) {
    detail::require_alpha(alpha);
    const QuarticRoots r = two_stream_cold_quartic(K_bar, H);
    const cdouble shift(0.0, -alpha * K_bar);
    const cdouble zp = std::sqrt(cdouble(r.plus, 0.0));
    const cdouble zm = std::sqrt(cdouble(r.minus, 0.0));
    return {ComplexFrequency{zp + shift}, ComplexFrequency{-zp + shift},
            ComplexFrequency{zm + shift}, ComplexFrequency{-zm + shift}};
}

/// Largest broadening that still leaves growth at (K̄, H): Im Ω̄ > 0 iff
/// α < (1/K̄) sqrt(-Ω̄²₋). Zero where the cold branch is stable.
inline double damping_threshold(double K_bar, double H) {
    const QuarticRoots r = two_stream_cold_quartic(K_bar, H);
    return r.minus < 0 ? std::sqrt(-r.minus) / K_bar : 0.0;
}

/// Classical (H = 0) upper edge of the unstable band, K_c = sqrt(1-α²)/(1+α²);
/// zero once α ≥ 1.
inline double classical_cutoff(double alpha) {
    detail::require_alpha(alpha);
    if (alpha >= 1.0) return 0.0;
    return std::sqrt(1.0 - alpha * alpha) / (1.0 + alpha * alpha);
}

enum class AsymptoticRegime { small_k, threshold, large_k };

inline AsymptoticRegime parse_regime(std::string_view tag) {
    if (tag == "small_K" || tag == "small_k") return AsymptoticRegime::small_k;
    if (tag == "threshold") return AsymptoticRegime::threshold;
    if (tag == "large_K" || tag == "large_k") return AsymptoticRegime::large_k;
    throw PreconditionError("regime", "unknown asymptotic regime '" + std::string(tag) + "'");
}

/// Deviation from the upper cold boundary, Δh = 1 - H²K̄²/4.
inline double boundary_offset(double K_bar, double H) { return 1.0 - 0.25 * H * H * K_bar * K_bar; }

/// Asymptotic growth rates. The formula for the chosen regime is evaluated
/// regardless of whether (K̄, H, α) actually lies in that regime.
///   small_k   : (1 - α) K̄
///   threshold : (sqrt(1 - H²K̄²/4) - α) K̄
///   large_k   : -αK̄ + (1/2) sqrt(Δh (1 - K̄² Δh)), the leading term of the
///               minus root for K̄ ≫ 1 with H K̄ of order one
inline double asymptotic_growth(double K_bar, double H, double alpha, AsymptoticRegime regime) {
    detail::require_positive_k(K_bar);
    detail::require_alpha(alpha);
    switch (regime) {
    case AsymptoticRegime::small_k:
        return (1.0 - alpha) * K_bar;
    case AsymptoticRegime::threshold:
        return (std::sqrt(std::max(0.0, boundary_offset(K_bar, H))) - alpha) * K_bar;
    case AsymptoticRegime::large_k: {
        const double dh = boundary_offset(K_bar, H);
        const double arg = dh * (1.0 - K_bar * K_bar * dh);
        return -alpha * K_bar + 0.5 * std::sqrt(std::max(0.0, arg));
    }
    }
    throw PreconditionError("regime", "unknown asymptotic regime");
}

inline double asymptotic_growth(double K_bar, double H, double alpha, std::string_view regime) {
    return asymptotic_growth(K_bar, H, alpha, parse_regime(regime));
}

/// Upper stability threshold near small K̄: H = (2/K̄) sqrt(1 - α²).
inline double threshold_quantum_parameter(double K_bar, double alpha) {
    detail::require_positive_k(K_bar);
    detail::require_alpha(alpha);
    return 2.0 / K_bar * std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
}

/// Large-K̄ stability thresholds, the zeros in Δh of the large_k growth:
/// Δh = 2 [1/(4K̄²) ± sqrt(1/(16K̄⁴) - α²)]. At α = 0 these are the cold
/// boundaries Δh = 0 and Δh = 1/K̄². Empty when the discriminant is negative
/// (the narrow band has terminated).
inline std::optional<std::pair<double, double>> large_k_thresholds(double K_bar, double alpha) {
    detail::require_positive_k(K_bar);
    detail::require_alpha(alpha);
    const double k2 = K_bar * K_bar;
    const double disc = 1.0 / (16.0 * k2 * k2) - alpha * alpha;
    if (disc < 0) return std::nullopt;
    const double c = 1.0 / (4.0 * k2);
    const double r = std::sqrt(disc);
    return std::pair{2.0 * (c - r), 2.0 * (c + r)};
}

/// Wavenumber where the large-K̄ band terminates, 1/(2 sqrt α).
inline double large_k_termination(double alpha) {
    require(alpha > 0 && std::isfinite(alpha), "alpha", "must be positive");
    return 0.5 / std::sqrt(alpha);
}

} // namespace qplasma
