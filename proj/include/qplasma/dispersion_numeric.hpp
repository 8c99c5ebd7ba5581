#pragma once

// General multistream dielectric function of the linearized Wigner-Poisson
// system and complex root finding on it.
//
// In dimensionless form, with ū = Ω̄/K̄ and σ = H K̄ / 2,
//
//   ε(K̄, Ω̄) = 1 - (1/(H K̄³)) Σⱼ fⱼ ∫ dq [wⱼ(q + σ) - wⱼ(q - σ)] / (q - ū)
//            = 1 - (1/K̄²)     Σⱼ fⱼ ∫ dq (Dσ wⱼ)(q) / (q - ū),
//
// where Dσ w = [w(q+σ) - w(q-σ)] / (2σ) (→ w' as H → 0) and wⱼ is the unit
// normalized stream spectrum. The integral is defined by continuation from
// Im ū > 0 (Landau prescription). Two independent evaluation routes exist:
//
//   closed_form_pole    residue of each Lorentzian at q = dⱼ - i aⱼ, giving
//                       Σ fⱼ / ((Ω̄ - (dⱼ - i aⱼ) K̄)² - H²K̄⁴/4); delta streams
//                       are the a → 0 case.
//   quadrature_plemelj  adaptive Gauss-Kronrod along the real q axis with the
//                       resonance subtracted out and the residue term added
//                       analytically; Lorentzian streams only.

#include "qplasma/core.hpp"
#include "qplasma/dispersion_analytic.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace qplasma {

enum class DielectricMethod { closed_form_pole, quadrature_plemelj };

inline const char* to_string(DielectricMethod m) {
    return m == DielectricMethod::closed_form_pole ? "closed_form_pole" : "quadrature_plemelj";
}

struct DielectricEvaluation {
    double K_bar;
    cdouble omega;
    cdouble epsilon;
    DielectricMethod method;
};

class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double estimated_error)
        : Error(what), estimated_error_(estimated_error) {}
    double estimated_error() const noexcept { return estimated_error_; }

private:
    double estimated_error_;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, cdouble last_iterate, double residual, int iterations)
        : Error(what), last_iterate_(last_iterate), residual_(residual), iterations_(iterations) {}
    cdouble last_iterate() const noexcept { return last_iterate_; }
    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    cdouble last_iterate_;
    double residual_;
    int iterations_;
};

struct QuadratureOptions {
    double relative_tolerance = 1e-13;
    double absolute_tolerance = 1e-12; // target error per stream integral
    double accept_error = 1e-10;       // relative to the integrand mass; larger estimates throw
    int max_depth = 40;
};

namespace detail {

// Adaptive bisection with a 61-point Gauss-Kronrod panel. A panel is accepted
// once its error estimate drops below max(rel * L1, abs * share of the range).
template <class F>
cdouble adaptive_gk(F&& f, double a, double b, double rel, double abs_tol, int max_depth,
                    double& error_out, double* l1_out = nullptr) {
    using boost::math::quadrature::gauss_kronrod;
    constexpr int max_panels = 1 << 16;
    const double length = b - a;
    cdouble total = 0.0;
    double error = 0.0;
    double mass = 0.0;
    struct Panel {
        double a, b;
        int depth;
    };
    std::vector<Panel> stack{{a, b, 0}};
    int panels = 0;
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        double err = 0.0;
        double l1 = 0.0;
        const cdouble v = gauss_kronrod<double, 61>::integrate(f, p.a, p.b, 0, 0.0, &err, &l1);
        // Boost reports a single panel's error on the reference interval [-1, 1].
        err *= 0.5 * (p.b - p.a);
        ++panels;
        const double budget = std::max(rel * l1, abs_tol * (p.b - p.a) / length);
        if (err <= budget || p.depth >= max_depth || panels >= max_panels || !std::isfinite(err)) {
            total += v;
            mass += l1;
            error += std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
            continue;
        }
        const double mid = 0.5 * (p.a + p.b);
        stack.push_back({p.a, mid, p.depth + 1});
        stack.push_back({mid, p.b, p.depth + 1});
    }
    error_out = error;
    if (l1_out) *l1_out = mass;
    return total;
}

// Same over [a, ∞) (direction = +1) or (-∞, a] (direction = -1) through
// q = a ± scale t/(1-t).
template <class F>
cdouble adaptive_gk_tail(F&& f, double a, int direction, double scale, double rel, double abs_tol,
                         int max_depth, double& error_out, double* l1_out = nullptr) {
    auto mapped = [&](double t) -> cdouble {
        const double s = 1.0 - t;
        return scale * f(a + direction * scale * t / s) / (s * s);
    };
    return adaptive_gk(mapped, 0.0, 1.0, rel, abs_tol, max_depth, error_out, l1_out);
}

// (Dσ w)(q) for a unit Lorentzian of drift d and width a, written without the
// cancellation of the raw difference quotient:
//   -(2a/π) u / (((u+σ)² + a²)((u-σ)² + a²)),  u = q - d.
template <class T>
T shifted_difference(T q, double drift, double width, double sigma) {
    const T u = q - drift;
    const double a2 = width * width;
    const T plus = (u + sigma) * (u + sigma) + a2;
    const T minus = (u - sigma) * (u - sigma) + a2;
    return -2.0 * width / std::numbers::pi * u / (plus * minus);
}

// Landau-continued ∫ g(q)/(q - ū) dq over the real line for an analytic g.
// Near the resonance the integrand is replaced by the divided difference
// (g(q) - g(ū))/(q - ū) on [x-h, x+h]; the subtracted piece integrates to
// g(ū) i(π - 2 atan(y/h)), which already carries the 2πi g(ū) residue when
// y = Im ū < 0 and the iπ g(x) Plemelj term when y = 0.
template <class G>
cdouble landau_integral(G&& g, cdouble u, double h, double scale, std::vector<double> breaks,
                        const QuadratureOptions& opt) {
    const double x = u.real();
    const double y = u.imag();
    const cdouble gu = g(u);
    auto outer = [&](double q) -> cdouble { return g(cdouble(q, 0.0)) / (cdouble(q, 0.0) - u); };
    auto inner = [&](double q) -> cdouble {
        const cdouble dq = cdouble(q, 0.0) - u;
        return (g(cdouble(q, 0.0)) - gu) / dq;
    };

    const double lo = x - h;
    const double hi = x + h;
    breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                                [&](double b) { return b > lo && b < hi; }),
                 breaks.end());
    breaks.push_back(lo);
    breaks.push_back(hi);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    // Long gaps are cut geometrically towards both ends; a single wide panel
    // can otherwise step over a feature of size `scale` at its edge and
    // report a vanishing error.
    std::vector<double> refined{breaks.front()};
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = breaks[i];
        const double b = breaks[i + 1];
        if (a != lo) {
            std::vector<double> right;
            for (double step = scale; 2 * step < b - a; step *= 2) {
                refined.push_back(a + step);
                right.push_back(b - step);
            }
            refined.insert(refined.end(), right.rbegin(), right.rend());
        }
        refined.push_back(b);
    }
    std::sort(refined.begin(), refined.end());
    breaks = std::move(refined);

    cdouble total = 0.0;
    double worst = 0.0;
    double mass = 0.0;
    const double abs_share = opt.absolute_tolerance / static_cast<double>(breaks.size() + 2);
    double err = 0.0;
    double l1 = 0.0;
    auto add = [&](cdouble v) {
        total += v;
        worst += err;
        mass += l1;
    };
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = breaks[i];
        const double b = breaks[i + 1];
        if (a == lo) {
            add(adaptive_gk(inner, lo, x, opt.relative_tolerance, abs_share, opt.max_depth, err, &l1));
            add(adaptive_gk(inner, x, hi, opt.relative_tolerance, abs_share, opt.max_depth, err, &l1));
        } else {
            add(adaptive_gk(outer, a, b, opt.relative_tolerance, abs_share, opt.max_depth, err, &l1));
        }
    }
    add(adaptive_gk_tail(outer, breaks.front(), -1, scale, opt.relative_tolerance, abs_share,
                         opt.max_depth, err, &l1));
    add(adaptive_gk_tail(outer, breaks.back(), +1, scale, opt.relative_tolerance, abs_share,
                         opt.max_depth, err, &l1));

    if (!(worst <= opt.accept_error * std::max(1.0, mass)) || !std::isfinite(total.real()) ||
        !std::isfinite(total.imag())) {
        std::ostringstream msg;
        msg << "quadrature did not converge near u = " << u << " (error estimate " << worst << ")";
        throw QuadratureError(msg.str(), worst);
    }
    return total + gu * cdouble(0.0, std::numbers::pi - 2.0 * std::atan(y / h));
}

inline void check_dielectric_args(double K_bar, double H, cdouble omega) {
    require_positive_k(K_bar);
    require(H >= 0 && std::isfinite(H), "H", "must be non-negative");
    require(std::isfinite(omega.real()) && std::isfinite(omega.imag()), "omega", "must be finite");
}

} // namespace detail

inline cdouble dielectric_pole(const Background& bg, double K_bar, double H, cdouble omega) {
    detail::check_dielectric_args(K_bar, H, omega);
    const double h = detail::recoil(K_bar, H);
    cdouble sum = 0.0;
    for (const auto& s : bg.streams()) {
        const cdouble resonance = cdouble(s.drift(), -s.width()) * K_bar;
        const cdouble shifted = omega - resonance;
        sum += (s.density() / bg.total_density()) / (shifted * shifted - h);
    }
    return 1.0 - sum;
}

inline cdouble dielectric_quadrature(const Background& bg, double K_bar, double H, cdouble omega,
                                     const QuadratureOptions& opt = {}) {
    detail::check_dielectric_args(K_bar, H, omega);
    for (const auto& s : bg.streams())
        require(s.kind() == SpectrumKind::lorentzian, "kind",
                "delta streams cannot be integrated numerically; use closed_form_pole");
    const double sigma = 0.5 * H * K_bar;
    const cdouble u = omega / K_bar;
    cdouble sum = 0.0;
    for (const auto& s : bg.streams()) {
        const double d = s.drift();
        const double a = s.width();
        auto g = [=](cdouble q) { return detail::shifted_difference(q, d, a, sigma); };
        const double h = std::max(a, std::abs(u.imag()));
        std::vector<double> breaks{d - sigma - a, d - sigma, d - sigma + a, d + sigma - a, d + sigma,
                                   d + sigma + a};
        sum += (s.density() / bg.total_density()) * detail::landau_integral(g, u, h, a, breaks, opt);
    }
    return 1.0 - sum / (K_bar * K_bar);
}

inline cdouble evaluate_dielectric(const Background& bg, double K_bar, double H, cdouble omega,
                                   DielectricMethod method = DielectricMethod::closed_form_pole) {
    return method == DielectricMethod::closed_form_pole ? dielectric_pole(bg, K_bar, H, omega)
                                                        : dielectric_quadrature(bg, K_bar, H, omega);
}

inline DielectricEvaluation describe_dielectric(const Background& bg, double K_bar, double H,
                                                cdouble omega, DielectricMethod method) {
    return {K_bar, omega, evaluate_dielectric(bg, K_bar, H, omega, method), method};
}

struct RootOptions {
    int max_iterations = 100;
    double step_tolerance = 1e-12;     // relative to max(1, |Ω̄|)
    double residual_tolerance = 1e-10; // on |ε|
    double initial_step = 1e-4;
    DielectricMethod method = DielectricMethod::closed_form_pole;
};

struct RootResult {
    ComplexFrequency root;
    double residual;
    int iterations;
};

/// Secant iteration in the complex plane. Converges when the residual is
/// below tolerance and either the step has shrunk below tolerance or the
/// residual sits far below it.
template <class F>
RootResult secant_root(F&& f, cdouble init, const RootOptions& opt = {}) {
    auto finite = [](cdouble v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); };
    cdouble z0 = init;
    cdouble f0 = f(z0);
    if (!finite(f0)) {
        z0 += opt.initial_step * (1.0 + std::abs(z0)) * cdouble(1.0, 1.0);
        f0 = f(z0);
    }
    if (finite(f0) && std::abs(f0) < 1e-3 * opt.residual_tolerance) return {{z0}, std::abs(f0), 0};

    cdouble z1 = z0 + opt.initial_step * (1.0 + std::abs(z0)) * cdouble(1.0, 0.5);
    cdouble f1 = f(z1);
    int below = 0;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        if (!finite(f1)) {
            z1 = 0.5 * (z0 + z1);
            f1 = f(z1);
            continue;
        }
        const cdouble df = f1 - f0;
        cdouble step;
        if (std::abs(df) == 0.0) {
            if (std::abs(f1) < opt.residual_tolerance) return {{z1}, std::abs(f1), it};
            step = opt.initial_step * (1.0 + std::abs(z1)) * cdouble(0.5, 1.0);
        } else {
            step = -f1 * (z1 - z0) / df;
        }
        // Keep a single iteration from leaping across the plane.
        const double cap = 0.5 * (1.0 + std::abs(z1));
        if (std::abs(step) > cap) step *= cap / std::abs(step);

        z0 = z1;
        f0 = f1;
        z1 = z1 + step;
        f1 = f(z1);
        if (!finite(f1)) continue;

        const double res = std::abs(f1);
        const double scale = std::max(1.0, std::abs(z1));
        if (res < opt.residual_tolerance) {
            ++below;
            if (std::abs(step) <= opt.step_tolerance * scale || res <= 1e-3 * opt.residual_tolerance ||
                below >= 3)
                return {{z1}, res, it};
        } else {
            below = 0;
        }
    }
    std::ostringstream msg;
    msg << "root search did not converge in " << opt.max_iterations << " iterations; last iterate "
        << z1 << ", residual " << std::abs(f1);
    throw ConvergenceError(msg.str(), z1, std::abs(f1), opt.max_iterations);
}

inline RootResult find_root(const Background& bg, double K_bar, double H, cdouble init,
                            const RootOptions& opt = {}) {
    detail::check_dielectric_args(K_bar, H, init);
    auto eps = [&](cdouble w) { return evaluate_dielectric(bg, K_bar, H, w, opt.method); };
    try {
        return secant_root(eps, init, opt);
    } catch (const ConvergenceError&) {
        // Roots close to a stream resonance defeat the secant on ε, which
        // behaves like 1 - c/(Ω̄ - pole) there. Multiplying by the resonance
        // denominators removes the poles and keeps the zeros; the result is
        // then polished on ε itself.
        const double h = detail::recoil(K_bar, H);
        const double scale = 1.0 + std::abs(init);
        auto cleared = [&](cdouble w) {
            cdouble f = eps(w);
            for (const auto& s : bg.streams()) {
                const cdouble shifted = w - cdouble(s.drift(), -s.width()) * K_bar;
                f *= (shifted * shifted - h) / (scale * scale);
            }
            return f;
        };
        const RootResult coarse = secant_root(cleared, init, opt);
        RootResult fine = secant_root(eps, coarse.root.omega, opt);
        fine.iterations += coarse.iterations;
        return fine;
    }
}

struct PathPoint {
    double K_bar;
    double H;
    double alpha;
};

/// Evenly spaced path from `from` to `to` inclusive.
inline std::vector<PathPoint> linear_path(PathPoint from, PathPoint to, int points) {
    require(points >= 2, "steps", "a path needs at least two points");
    std::vector<PathPoint> out;
    out.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        out.push_back({from.K_bar + t * (to.K_bar - from.K_bar), from.H + t * (to.H - from.H),
                       from.alpha + t * (to.alpha - from.alpha)});
    }
    return out;
}

struct RootTrack {
    std::vector<PathPoint> path;
    std::vector<ComplexFrequency> roots;
    std::vector<bool> converged;
    std::vector<double> residuals;
    std::vector<bool> jumped;

    bool clean() const {
        return std::all_of(converged.begin(), converged.end(), [](bool c) { return c; }) &&
               std::none_of(jumped.begin(), jumped.end(), [](bool j) { return j; });
    }
};

struct TrackOptions {
    RootOptions root;
    // A step is flagged when |ΔΩ̄| > jump_factor sqrt(|Δp|) (1 + |Ω̄|), with
    // |Δp| the Euclidean parameter step. The square root admits the
    // square-root behaviour of roots passing a branch point.
    double jump_factor = 4.0;
};

/// Continues one root along `path`. Each point uses `bg` with every stream's
/// width set to the point's α; each solve is seeded from the last converged
/// root. Jumps and failures are flagged, never thrown.
inline RootTrack track_roots(const Background& bg, std::span<const PathPoint> path, cdouble init,
                             const TrackOptions& opt = {}) {
    RootTrack track;
    cdouble seed = init;
    const PathPoint* prev = nullptr;
    for (const auto& p : path) {
        track.path.push_back(p);
        const Background local = bg.with_width(p.alpha);
        bool ok = true;
        RootResult r{{seed}, std::numeric_limits<double>::infinity(), 0};
        try {
            r = find_root(local, p.K_bar, p.H, seed, opt.root);
        } catch (const ConvergenceError& e) {
            ok = false;
            r = {{e.last_iterate()}, e.residual(), e.iterations()};
        } catch (const QuadratureError& e) {
            ok = false;
            r.residual = std::numeric_limits<double>::infinity();
        }
        bool jump = false;
        if (prev != nullptr && ok) {
            const double dk = p.K_bar - prev->K_bar;
            const double dh = p.H - prev->H;
            const double da = p.alpha - prev->alpha;
            const double ds = std::sqrt(dk * dk + dh * dh + da * da);
            const double bound = opt.jump_factor * std::sqrt(ds) * (1.0 + std::abs(seed));
            jump = std::abs(r.root.omega - seed) > bound;
        }
        track.roots.push_back(r.root);
        track.converged.push_back(ok);
        track.residuals.push_back(r.residual);
        track.jumped.push_back(jump);
        if (ok) seed = r.root.omega;
        prev = &p;
    }
    return track;
}

} // namespace qplasma
