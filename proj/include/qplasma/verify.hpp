#pragma once

// Small, fast cross-check matrix runnable from the command line: closed forms
// against numeric roots and quadrature, map boundaries against the H±
// formulas, and a reduced simulator run against the damping rate.

#include "qplasma/dispersion_numeric.hpp"
#include "qplasma/stability_map.hpp"
#include "qplasma/wigner_sim.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace qplasma {

struct Check {
    std::string name;
    double value;     // measured error
    double tolerance;
    bool pass;
};

namespace detail {

inline Check make_check(std::string name, double value, double tolerance) {
    return {std::move(name), value, tolerance, std::isfinite(value) && value <= tolerance};
}

// Distance between a numeric root seeded near `exact` and `exact` itself.
inline double reseeded_root_error(const Background& bg, double K, double H, cdouble exact) {
    const cdouble seed = exact + 1e-3 * (1.0 + std::abs(exact)) * cdouble(1.0, 1.0);
    try {
        return std::abs(find_root(bg, K, H, seed).root.omega - exact);
    } catch (const ConvergenceError&) {
        return std::numeric_limits<double>::infinity();
    }
}

} // namespace detail

inline std::vector<Check> run_verification(bool include_simulation = true) {
    std::vector<Check> checks;
    constexpr double inf = std::numeric_limits<double>::infinity();

    {
        const auto bands = band_report(0.0, 0.0, 1e-6, 3.0, 3000);
        const double err = bands.size() == 1 ? std::abs(bands[0].upper - 1.0) : inf;
        checks.push_back(detail::make_check("classical_band_edge", err, 1e-8));
    }
    {
        const StabilityMap m = build_map(uniform_axis(0.0, 4.0, 100, true), uniform_axis(0.0, 4.0, 100), 0.0);
        double worst = m.boundaries.empty() ? inf : 0.0;
        for (const auto& c : m.boundaries) {
            for (const auto& p : c.points) {
                const double K = p.K_bar;
                const double ref = c.curve_id == 0 ? 2.0 / K : 2.0 / K * std::sqrt(std::max(0.0, 1.0 - 1.0 / (K * K)));
                worst = std::max(worst, c.curve_id <= 1 ? std::abs(p.H - ref) : inf);
            }
        }
        checks.push_back(detail::make_check("map_boundaries", worst, 1e-6));
        const bool topology = band_report(0.6, 0.0, 1e-6, 4.0).size() == 2 && band_report(2.0, 0.0, 1e-6, 4.0).size() == 1;
        checks.push_back(detail::make_check("band_topology", topology ? 0.0 : inf, 0.0));
    }
    {
        double worst = 0;
        for (double a : {0.2, 0.5, 0.9}) {
            const auto bands = band_report(0.0, a, 1e-6, 2.0, 2000);
            const double expected = std::sqrt(1 - a * a) / (1 + a * a);
            worst = std::max(worst, bands.size() == 1 ? std::abs(bands[0].upper - expected) : inf);
        }
        if (!band_report(0.0, 1.0, 1e-6, 4.0).empty()) worst = inf;
        checks.push_back(detail::make_check("damped_cutoff", worst, 1e-6));
    }
    {
        double worst = 0;
        for (double K : {0.3, 0.8, 1.7})
            for (double H : {0.0, 0.7, 2.1})
                for (double a : {0.0, 0.2}) {
                    const Background two = Background::symmetric_two_stream(a);
                    for (const auto& r : two_stream_lorentzian_roots(K, H, a))
                        worst = std::max(worst, detail::reseeded_root_error(two, K, H, r.omega));
                    const Background one = Background::one_stream(a);
                    for (BranchSign b : {BranchSign::plus, BranchSign::minus})
                        worst = std::max(worst, detail::reseeded_root_error(one, K, H, one_stream_lorentzian(K, H, a, b).omega));
                }
        checks.push_back(detail::make_check("roots_match_closed_forms", worst, 1e-8));
    }
    {
        double worst = 0;
        const Background bg = Background::symmetric_two_stream(0.2);
        for (double K : {0.4, 1.3})
            for (cdouble w : {cdouble(0.7, 0.3), cdouble(1.1, 0.0), cdouble(0.5, -0.1)})
                worst = std::max(worst, std::abs(dielectric_quadrature(bg, K, 0.8, w) - dielectric_pole(bg, K, 0.8, w)));
        checks.push_back(detail::make_check("quadrature_matches_pole", worst, 1e-8));
    }
    {
        double worst = 0;
        for (double a : {0.0, 0.3})
            for (double K : {0.02, 0.05}) {
                const double g = two_stream_lorentzian(K, 0.0, a).growth_rate();
                worst = std::max(worst, std::abs(g - (1 - a) * K) / ((1 - a) * K));
            }
        checks.push_back(detail::make_check("small_k_asymptote", worst, 0.05));
        const double K_end = band_termination(0.01, 2.0, 10.0);
        checks.push_back(detail::make_check("large_k_termination", std::abs(K_end - 5.0) / 5.0, 0.01));
    }
    if (include_simulation) {
        SimConfig c;
        c.K_bar = 1.0;
        c.nx = 32;
        c.np = 128;
        c.q_max = 8.0;
        c.dt = 0.02;
        c.t_end = 12.5; // four beat peaks of the damped pair
        c.H = 0.1;
        c.background = Background::one_stream(0.5);
        c.mask = false;
        const SimulationResult r = run(c);
        const Diagnostics& d = r.runs.front();
        checks.push_back(detail::make_check("simulated_damping_rate", std::abs(r.gamma_fit + 0.5) / 0.5, 0.15));
        checks.push_back(detail::make_check("simulated_number_conservation", d.max_number_drift, 1e-8));
        checks.push_back(detail::make_check("simulated_reversibility", reversibility_error(c, 0.0), 1e-6));
    }
    return checks;
}

} // namespace qplasma
