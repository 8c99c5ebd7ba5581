#pragma once

// Command dispatch for the qplasma tool. Each command writes its tables into
// the output directory plus metadata.json, and a short report to `log`.

#include "qplasma/config.hpp"
#include "qplasma/output.hpp"
#include "qplasma/verify.hpp"

#include <ostream>
#include <string>

namespace qplasma {

namespace detail {

inline std::vector<Cell> omega_cells(cdouble w) { return {w.real(), w.imag()}; }

inline json run_dispersion(const DispersionParams& p, const json& resolved, OutputSink& out, std::ostream& log) {
    const Background bg = model_background(p.model, p.alpha);
    std::vector<std::pair<std::string, cdouble>> analytic;
    json summary;
    if (p.model == StreamModel::two_stream) {
        const QuarticRoots q = two_stream_cold_quartic(p.K_bar, p.H);
        summary["omega_sq_plus"] = q.plus;
        summary["omega_sq_minus"] = q.minus;
        const auto r = two_stream_lorentzian_roots(p.K_bar, p.H, p.alpha);
        const char* names[] = {"plus_plus", "plus_minus", "minus_plus", "minus_minus"};
        for (int i = 0; i < 4; ++i) analytic.emplace_back(names[i], r[static_cast<std::size_t>(i)].omega);
        log << "cold quartic: Omega^2+ = " << format_double(q.plus) << ", Omega^2- = " << format_double(q.minus);
        if (q.minus == 0) log << " (marginal)";
        log << '\n';
    } else {
        analytic.emplace_back("plus", one_stream_lorentzian(p.K_bar, p.H, p.alpha, BranchSign::plus).omega);
        analytic.emplace_back("minus", one_stream_lorentzian(p.K_bar, p.H, p.alpha, BranchSign::minus).omega);
    }

    auto os = out.open("dispersion");
    TableWriter t(os, out.format(), "dispersion", resolved,
                  {"branch", "omega_re_analytic", "omega_im_analytic", "omega_re_numeric", "omega_im_numeric",
                   "residual", "iterations", "multiplicity", "abs_difference", "agree"});
    RootOptions opt;
    opt.method = p.method;
    double worst = 0;
    for (const auto& [name, w] : analytic) {
        const cdouble seed = w + 1e-3 * (1.0 + std::abs(w)) * cdouble(1.0, 1.0);
        cdouble num = std::numeric_limits<double>::quiet_NaN();
        double residual = std::numeric_limits<double>::infinity();
        long long iterations = opt.max_iterations;
        try {
            const RootResult r = find_root(bg, p.K_bar, p.H, seed, opt);
            num = r.root.omega;
            residual = r.residual;
            iterations = r.iterations;
        } catch (const ConvergenceError& e) {
            num = e.last_iterate();
            residual = e.residual();
        }
        // A root of multiplicity m is only pinned to about residual^(1/m), so
        // coincident analytic roots (the marginal point) get a looser bound.
        long long multiplicity = 0;
        for (const auto& other : analytic) multiplicity += std::abs(other.second - w) <= 1e-9;
        const double diff = std::abs(num - w);
        const bool agree = diff <= (multiplicity == 1 ? 1e-8 : 1e-4);
        worst = std::max(worst, std::isfinite(diff) ? diff : std::numeric_limits<double>::infinity());
        t.row({name, w.real(), w.imag(), num.real(), num.imag(), residual, iterations, multiplicity, diff, agree});
        log << name << ": analytic " << format_double(w.real()) << (w.imag() < 0 ? " - " : " + ")
            << format_double(std::abs(w.imag())) << "i, numeric differs by " << format_double(diff)
            << (agree ? "" : "  (disagrees)") << '\n';
    }
    summary["max_abs_difference"] = worst;
    return summary;
}

inline json run_map(const MapParams& p, const json& resolved, OutputSink& out, std::ostream& log) {
    const StabilityMap m = build_map(uniform_axis(p.K_min, p.K_max, p.K_points, true),
                                     uniform_axis(p.H_min, p.H_max, p.H_points), p.alpha);
    {
        auto os = out.open("map");
        TableWriter t(os, out.format(), "map", resolved, {"K_bar", "H", "alpha", "class", "growth"});
        for (std::size_t i = 0; i < m.K_axis.size(); ++i)
            for (std::size_t j = 0; j < m.H_axis.size(); ++j) {
                const Classification& c = m.at(i, j);
                t.row({m.K_axis[i], m.H_axis[j], m.alpha, std::string(to_string(c.stability)), c.growth_rate});
            }
    }
    std::size_t points = 0;
    double worst_residual = 0;
    {
        auto os = out.open("boundaries");
        TableWriter t(os, out.format(), "boundaries", resolved, {"curve_id", "K_bar", "H"});
        for (const auto& c : m.boundaries)
            for (const auto& pt : c.points) {
                t.row({static_cast<long long>(c.curve_id), pt.K_bar, pt.H});
                ++points;
                worst_residual = std::max(worst_residual, pt.residual);
            }
    }
    std::size_t unstable = 0;
    for (const auto& c : m.cells) unstable += c.stability == Stability::unstable;
    log << "map: " << m.cells.size() << " cells, " << unstable << " unstable, " << points
        << " boundary points (max |growth| residual " << format_double(worst_residual) << ")\n";
    return {{"cells", m.cells.size()}, {"unstable_cells", unstable}, {"boundary_points", points},
            {"curves", m.boundaries.size()}, {"max_boundary_residual", worst_residual}};
}

inline json run_bands(const BandsParams& p, const json& resolved, OutputSink& out, std::ostream& log) {
    const auto bands = band_report(p.H, p.alpha, p.K_min, p.K_max, p.samples);
    auto os = out.open("bands");
    TableWriter t(os, out.format(), "bands", resolved, {"band", "K_lower", "K_upper"});
    json list = json::array();
    for (std::size_t i = 0; i < bands.size(); ++i) {
        t.row({static_cast<long long>(i), bands[i].lower, bands[i].upper});
        list.push_back({bands[i].lower, bands[i].upper});
        log << "band " << i << ": [" << format_double(bands[i].lower) << ", " << format_double(bands[i].upper) << "]\n";
    }
    if (bands.empty()) log << "no unstable band in range\n";
    json summary{{"bands", list}};
    if (p.alpha == 0 && p.H > 0) {
        const BandEdges e = band_edges(p.H);
        summary["cold_K_plus"] = e.K_plus;
        if (e.K_minus_low) summary["cold_K_minus_low"] = *e.K_minus_low;
        if (e.K_minus_high) summary["cold_K_minus_high"] = *e.K_minus_high;
    }
    return summary;
}

inline json run_simulate(const SimulateParams& p, const json& resolved, OutputSink& out, std::ostream& log) {
    const SimConfig& cfg = p.sim;
    SimConfig plain = cfg;
    plain.fit_rate = false;
    json runs = json::array();
    std::vector<Diagnostics> all;
    std::optional<FitError> failure;
    const auto widths = cfg.delta_widths();
    for (std::size_t i = 0; i < widths.size(); ++i) {
        Diagnostics d = run_single(plain, widths[i]);
        const std::string table = widths.size() > 1 ? "diagnostics_" + std::to_string(i) : "diagnostics";
        {
            auto os = out.open(table);
            json params = resolved;
            params["delta_width"] = d.delta_width;
            TableWriter t(os, out.format(), table, params,
                          {"t", "field_energy", "mode_amp_K", "mode_amp_2K", "mode_amp_3K", "number", "momentum"});
            for (const auto& s : d.samples)
                t.row({s.t, s.field_energy, s.mode_K, s.mode_2K, s.mode_3K, s.number, s.momentum});
        }
        json r{{"delta_width", d.delta_width},
               {"max_number_drift", d.max_number_drift},
               {"max_momentum_drift", d.max_momentum_drift}};
        if (cfg.fit_rate) {
            try {
                fit_diagnostics(d, cfg);
                r["gamma_fit"] = d.fit->gamma;
                r["fit_window"] = {d.fit->t_start, d.fit->t_end};
                r["fit_points"] = d.fit->points;
                r["fit_level"] = d.fit->level;
                r["fit_rms_residual"] = d.fit->rms_residual;
                r["max_harmonic_ratio"] = d.max_harmonic_ratio;
                log << "width " << format_double(d.delta_width) << ": gamma_fit = " << format_double(d.fit->gamma)
                    << " on [" << format_double(d.fit->t_start) << ", " << format_double(d.fit->t_end) << "]\n";
            } catch (const FitError& e) {
                failure = e;
            }
        }
        if (p.check_reversibility) {
            r["reversibility_error"] = reversibility_error(cfg, widths[i]);
            log << "width " << format_double(d.delta_width) << ": reversibility error "
                << format_double(r["reversibility_error"].get<double>()) << '\n';
        }
        const auto& first = d.samples.front();
        const auto& last = d.samples.back();
        r["mode_amp_K_initial"] = first.mode_K;
        r["mode_amp_K_final"] = last.mode_K;
        runs.push_back(r);
        all.push_back(std::move(d));
    }
    json summary{{"runs", runs}, {"widening_applied", cfg.background.has_delta()}};
    if (failure) {
        summary["fit_error"] = failure->what();
        out.write_metadata(resolved, summary);
        throw *failure;
    }
    if (cfg.fit_rate) {
        const double g = all.size() == 2 ? 2.0 * all[0].fit->gamma - all[1].fit->gamma : all[0].fit->gamma;
        summary["gamma_fit"] = g;
        log << "gamma_fit" << (all.size() == 2 ? " (extrapolated to zero width)" : "") << " = " << format_double(g)
            << '\n';
    }
    return summary;
}

inline json run_sweep(const SweepParams& p, const json& resolved, OutputSink& out, std::ostream& log) {
    const auto path = linear_path(p.from, p.to, p.points);
    cdouble init;
    if (p.init) {
        init = *p.init;
    } else if (p.model == StreamModel::two_stream) {
        init = two_stream_lorentzian(p.from.K_bar, p.from.H, p.from.alpha).omega;
    } else {
        init = one_stream_lorentzian(p.from.K_bar, p.from.H, p.from.alpha).omega;
    }
    TrackOptions opt;
    opt.root.method = p.method;
    const RootTrack track = track_roots(model_background(p.model, p.from.alpha), path, init, opt);
    auto os = out.open("sweep");
    TableWriter t(os, out.format(), "sweep", resolved,
                  {"index", "K_bar", "H", "alpha", "omega_re", "omega_im", "residual", "converged", "jumped"});
    std::size_t failures = 0, jumps = 0;
    for (std::size_t i = 0; i < track.path.size(); ++i) {
        const auto& pt = track.path[i];
        const cdouble w = track.roots[i].omega;
        t.row({static_cast<long long>(i), pt.K_bar, pt.H, pt.alpha, w.real(), w.imag(), track.residuals[i],
               static_cast<bool>(track.converged[i]), static_cast<bool>(track.jumped[i])});
        failures += !track.converged[i];
        jumps += track.jumped[i];
    }
    log << "sweep: " << track.path.size() << " points, " << failures << " unconverged, " << jumps
        << " flagged jumps\n";
    return {{"points", track.path.size()}, {"unconverged", failures}, {"jumps", jumps}};
}

inline json run_verify(const VerifyParams& p, const json& resolved, OutputSink& out, std::ostream& log,
                       bool& all_pass) {
    const auto checks = run_verification(p.simulate);
    auto os = out.open("verify");
    TableWriter t(os, out.format(), "verify", resolved, {"check", "error", "tolerance", "pass"});
    json list = json::array();
    all_pass = true;
    for (const auto& c : checks) {
        t.row({c.name, c.value, c.tolerance, c.pass});
        log << (c.pass ? "PASS " : "FAIL ") << c.name << "  error " << format_double(c.value) << " (tolerance "
            << format_double(c.tolerance) << ")\n";
        all_pass = all_pass && c.pass;
        list.push_back({{"check", c.name}, {"error", c.value}, {"pass", c.pass}});
    }
    return {{"checks", list}, {"all_pass", all_pass}};
}

} // namespace detail

/// Runs one validated spec. Returns the process exit status (0 on success,
/// 1 when verify reports a failing check); module errors propagate.
inline int run_command(const RunSpec& spec, OutputSink& out, std::ostream& log) {
    const json resolved = resolved_parameters(spec);
    json summary;
    int status = 0;
    switch (spec.command) {
    case Command::dispersion:
        summary = detail::run_dispersion(std::get<DispersionParams>(spec.parameters), resolved, out, log);
        break;
    case Command::map:
        summary = detail::run_map(std::get<MapParams>(spec.parameters), resolved, out, log);
        break;
    case Command::bands:
        summary = detail::run_bands(std::get<BandsParams>(spec.parameters), resolved, out, log);
        break;
    case Command::simulate:
        summary = detail::run_simulate(std::get<SimulateParams>(spec.parameters), resolved, out, log);
        break;
    case Command::sweep:
        summary = detail::run_sweep(std::get<SweepParams>(spec.parameters), resolved, out, log);
        break;
    case Command::verify: {
        bool pass = false;
        summary = detail::run_verify(std::get<VerifyParams>(spec.parameters), resolved, out, log, pass);
        status = pass ? 0 : 1;
        break;
    }
    }
    out.write_metadata(resolved, summary);
    return status;
}

} // namespace qplasma
