#include <catch2/catch_approx.hpp>
#include <catch2/catch_test_macros.hpp>

#include "qplasma/wigner_sim.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace qplasma;
using Catch::Approx;

namespace {

SimConfig small_one_stream() {
    SimConfig c;
    c.K_bar = 1.0;
    c.nx = 32;
    c.np = 128;
    c.q_max = 8.0;
    c.dt = 0.02;
    c.t_end = 12.5;
    c.H = 0.1;
    c.background = Background::one_stream(0.5);
    c.mask = false;
    return c;
}

SimConfig small_two_stream(double H) {
    SimConfig c;
    c.K_bar = 0.5;
    c.H = H;
    c.nx = 32;
    c.np = 256;
    c.q_max = 6.0;
    c.dt = 0.05;
    c.t_end = 45.0;
    c.mask = false;
    return c;
}

} // namespace

TEST_CASE("configuration invariants") {
    SimConfig c = small_one_stream();
    REQUIRE_NOTHROW(c.validate());
    auto rejects = [](SimConfig bad, const char* param) {
        try {
            bad.validate();
            FAIL("expected a precondition error for " << param);
        } catch (const PreconditionError& e) {
            REQUIRE(e.parameter() == param);
        }
    };
    SimConfig bad = c;
    bad.nx = 48;
    rejects(bad, "nx");
    bad = c;
    bad.np = 16;
    rejects(bad, "np");
    bad = c;
    bad.delta = 2e-3;
    rejects(bad, "delta");
    bad = c;
    bad.q_max = 5.0; // needs 1 + 10 * 0.5
    rejects(bad, "q_max");
    bad = c;
    bad.dt = 0.5;
    rejects(bad, "dt");
    bad = c;
    bad.background = Background::one_stream(0.0);
    bad.widen_delta = false;
    rejects(bad, "background");
    bad = c;
    bad.widening_cells = 2;
    rejects(bad, "widening_cells");
}

TEST_CASE("delta streams are widened to grid-resolved lorentzians") {
    SimConfig c = small_two_stream(0.0);
    const auto w = c.delta_widths();
    REQUIRE(w.size() == 2);
    REQUIRE(w[0] == Approx(4 * c.dq()));
    REQUIRE(w[1] == Approx(8 * c.dq()));
    c.extrapolate_width = false;
    REQUIRE(c.delta_widths().size() == 1);
    REQUIRE(small_one_stream().delta_widths() == std::vector<double>{0.0});
}

TEST_CASE("unperturbed state is neutral and uniform") {
    SimConfig c = small_one_stream();
    c.delta = 0;
    const WignerSolver solver(c, 0.0);
    const WignerState s = solver.init_state();
    for (int ix = 1; ix < c.nx; ++ix)
        for (int j = 0; j < c.np; ++j) REQUIRE(s.at(ix, j) == s.at(0, j));
    for (double v : s.phi) REQUIRE(std::abs(v) < 1e-14);
}

TEST_CASE("initial number equals the box length") {
    for (const SimConfig& c : {small_one_stream(), small_two_stream(0.5)}) {
        const WignerSolver solver(c, c.delta_widths().front());
        const WignerState s = solver.init_state();
        REQUIRE(std::abs(solver.number(s) - c.box_length()) <= 1e-10 * c.box_length());
    }
}

TEST_CASE("initial mode spectrum holds only modes 0 and K") {
    SimConfig c = small_one_stream();
    c.delta = 1e-3;
    c.mode_number = 2;
    c.K_bar = 2.0;
    c.q_max = 8.0;
    c.dt = 0.01;
    const WignerSolver solver(c, 0.0);
    const WignerState s = solver.init_state();
    for (int j = 0; j < c.np; j += 7) {
        // Direct DFT along x at fixed q.
        std::vector<double> amp(static_cast<std::size_t>(c.nx / 2 + 1));
        for (int m = 0; m <= c.nx / 2; ++m) {
            cdouble sum = 0;
            for (int ix = 0; ix < c.nx; ++ix)
                sum += s.at(ix, j) * std::polar(1.0, -2 * std::numbers::pi * m * ix / c.nx);
            amp[static_cast<std::size_t>(m)] = std::abs(sum);
        }
        const double zero = amp[0];
        REQUIRE(amp[2] == Approx(0.5 * c.delta * zero).epsilon(1e-9));
        for (int m = 1; m <= c.nx / 2; ++m)
            if (m != 2) REQUIRE(amp[static_cast<std::size_t>(m)] < 1e-13 * zero);
    }
}

TEST_CASE("equilibrium is a fixed point of the step") {
    SimConfig c = small_one_stream();
    c.delta = 0;
    c.mask = true;
    const WignerSolver solver(c, 0.0);
    WignerState s = solver.init_state();
    const std::vector<double> start = s.W;
    for (int n = 0; n < 1000; ++n) solver.step(s, c.dt);
    double worst = 0, peak = 0;
    for (std::size_t i = 0; i < start.size(); ++i) {
        worst = std::max(worst, std::abs(s.W[i] - start[i]));
        peak = std::max(peak, std::abs(start[i]));
    }
    REQUIRE(worst < 1e-10 * peak);
}

TEST_CASE("free streaming preserves every momentum moment") {
    SimConfig c = small_one_stream();
    c.delta = 1e-3;
    const WignerSolver solver(c, 0.0);
    WignerState s = solver.init_state();
    auto column_sums = [&](const WignerState& st) {
        std::vector<double> out(static_cast<std::size_t>(c.np), 0.0);
        for (int ix = 0; ix < c.nx; ++ix)
            for (int j = 0; j < c.np; ++j) out[static_cast<std::size_t>(j)] += st.at(ix, j);
        return out;
    };
    const auto before = column_sums(s);
    for (int n = 0; n < 50; ++n) solver.free_stream(s, 0.1);
    const auto after = column_sums(s);
    for (std::size_t j = 0; j < before.size(); ++j) REQUIRE(std::abs(after[j] - before[j]) < 1e-12 * before[j] + 1e-15);
}

TEST_CASE("kick matches the truncated sine-operator series at small H") {
    // ∂t W = V' ∂q W - (H²/24) V''' ∂q³ W + (H⁴/1920) V⁽⁵⁾ ∂q⁵ W for V = V0 cos Kx
    // and a Gaussian W(q). A symmetric difference of ±dt kicks isolates the
    // generator to O(dt²).
    SimConfig c = small_one_stream();
    c.H = 0.4;
    const WignerSolver solver(c, 0.0);
    const double K = c.K_bar, V0 = 0.3, dt = 1e-4;
    std::vector<cdouble> v_hat(static_cast<std::size_t>(c.nx / 2 + 1), 0.0);
    v_hat[1] = 0.5 * V0;

    WignerState base;
    base.nx = c.nx;
    base.np = c.np;
    base.W.resize(static_cast<std::size_t>(c.nx) * c.np);
    const auto& q = solver.q_grid();
    for (int ix = 0; ix < c.nx; ++ix)
        for (int j = 0; j < c.np; ++j) base.at(ix, j) = std::exp(-0.5 * q[static_cast<std::size_t>(j)] * q[static_cast<std::size_t>(j)]);

    WignerState plus = base, minus = base;
    solver.kick(plus, v_hat, dt);
    solver.kick(minus, v_hat, -dt);

    double worst_series = 0, worst_classical = 0, scale = 0;
    for (int ix = 0; ix < c.nx; ++ix) {
        const double x = ix * c.dx();
        const double s = std::sin(K * x);
        const double v1 = -V0 * K * s, v3 = V0 * K * K * K * s, v5 = -V0 * std::pow(K, 5) * s;
        for (int j = 0; j < c.np; ++j) {
            const double qq = q[static_cast<std::size_t>(j)];
            const double g = std::exp(-0.5 * qq * qq);
            // Derivatives of exp(-q²/2): -He_n(q) sign pattern.
            const double g1 = -qq * g;
            const double g3 = -(qq * qq * qq - 3 * qq) * g;
            const double g5 = -(std::pow(qq, 5) - 10 * qq * qq * qq + 15 * qq) * g;
            const double rate = (plus.at(ix, j) - minus.at(ix, j)) / (2 * dt);
            const double H2 = c.H * c.H;
            const double series = v1 * g1 - H2 / 24 * v3 * g3 + H2 * H2 / 1920 * v5 * g5;
            worst_series = std::max(worst_series, std::abs(rate - series));
            worst_classical = std::max(worst_classical, std::abs(rate - v1 * g1));
            scale = std::max(scale, std::abs(v1 * g1));
        }
    }
    REQUIRE(worst_series < 1e-6 * scale);
    REQUIRE(worst_classical > 1e-3 * scale); // the quantum correction is visible
}

TEST_CASE("kick approaches the classical acceleration as O(H^2)") {
    // Classical step: W(x, q) -> W(x, q + V'(x) dt) for a finite dt.
    auto error_at = [](double H) {
        SimConfig c = small_one_stream();
        c.H = H;
        const WignerSolver solver(c, 0.0);
        const double K = c.K_bar, V0 = 0.2, dt = 0.5;
        std::vector<cdouble> v_hat(static_cast<std::size_t>(c.nx / 2 + 1), 0.0);
        v_hat[1] = 0.5 * V0;
        WignerState s;
        s.nx = c.nx;
        s.np = c.np;
        s.W.resize(static_cast<std::size_t>(c.nx) * c.np);
        const auto& q = solver.q_grid();
        for (int ix = 0; ix < c.nx; ++ix)
            for (int j = 0; j < c.np; ++j) s.at(ix, j) = std::exp(-0.5 * q[static_cast<std::size_t>(j)] * q[static_cast<std::size_t>(j)]);
        solver.kick(s, v_hat, dt);
        double worst = 0;
        for (int ix = 0; ix < c.nx; ++ix) {
            const double force = -V0 * K * std::sin(K * ix * c.dx()); // V'(x)
            for (int j = 0; j < c.np; ++j) {
                const double shifted = q[static_cast<std::size_t>(j)] + force * dt;
                worst = std::max(worst, std::abs(s.at(ix, j) - std::exp(-0.5 * shifted * shifted)));
            }
        }
        return worst;
    };
    REQUIRE(error_at(0.0) < 1e-12);
    const double e1 = error_at(0.2), e2 = error_at(0.1);
    REQUIRE(e1 / e2 == Approx(4.0).epsilon(0.05));
}

TEST_CASE("sine operator symbol") {
    REQUIRE(sine_operator_symbol(0.5, 0.0, 3.0) == 1.5);
    REQUIRE(sine_operator_symbol(0.5, 1e-6, 3.0) == Approx(1.5).epsilon(1e-10));
    REQUIRE(sine_operator_symbol(1.0, 2.0, std::numbers::pi / 2) == Approx(1.0));
}

TEST_CASE("exponential fit on synthetic series") {
    std::vector<double> t, grow, beat;
    for (int i = 0; i <= 400; ++i) {
        const double ti = 0.1 * i;
        t.push_back(ti);
        grow.push_back(1e-6 * std::exp(0.3 * ti) * (1 + 0.5 * std::exp(-ti) * std::cos(2 * ti)));
        beat.push_back(1e-6 * std::exp(-0.5 * ti) * std::abs(std::polar(1.0, 2.0 * ti) + 0.5));
    }
    const RateFit g = fit_exponential_rate(t, grow, 0.02);
    REQUIRE(g.gamma == Approx(0.3).epsilon(1e-3));
    REQUIRE(g.t_start > 2.0);
    const RateFit b = fit_exponential_rate(t, beat, 0.02);
    REQUIRE(b.gamma == Approx(-0.5).epsilon(1e-3));
    REQUIRE(b.level != "raw");

    // The ceiling cuts the window off once the amplitude saturates.
    const RateFit capped = fit_exponential_rate(t, grow, 1e-3);
    REQUIRE(capped.t_end < std::log(1e3) / 0.3 + 0.5);
}

TEST_CASE("noise has no exponential regime") {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    std::vector<double> t, y;
    for (int i = 0; i < 200; ++i) {
        t.push_back(0.1 * i);
        y.push_back(1e-6 * u(rng));
    }
    try {
        fit_exponential_rate(t, y, 0.02);
        FAIL("expected a fit error");
    } catch (const FitError& e) {
        REQUIRE(e.times().size() == 200);
        REQUIRE(e.amplitudes() == y);
    }
}

TEST_CASE("one-stream lorentzian perturbation damps at alpha K") {
    const SimConfig c = small_one_stream();
    const SimulationResult r = run(c);
    REQUIRE(r.has_fit);
    REQUIRE(r.gamma_fit == Approx(-0.5).epsilon(0.15));
    const Diagnostics& d = r.runs.front();
    REQUIRE(d.max_number_drift < 1e-8);
    REQUIRE(d.samples.back().mode_K < d.samples.front().mode_K);
    // Sample times are exact multiples of the sample interval.
    REQUIRE(d.samples[10].t == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("momentum mask barely changes the two-stream rate") {
    SimConfig c = small_two_stream(0.5);
    const double off = run(c).gamma_fit;
    c.mask = true;
    const double on = run(c).gamma_fit;
    REQUIRE(std::abs(on - off) < 1e-3 * off);
}

TEST_CASE("splitting is time reversible without the mask") {
    SimConfig c = small_one_stream();
    c.t_end = 5.0;
    REQUIRE(reversibility_error(c, 0.0) < 1e-10);
    SimConfig two = small_two_stream(0.0);
    two.t_end = 10.0;
    REQUIRE(reversibility_error(two, two.delta_widths().front()) < 1e-8);
}

TEST_CASE("two-stream conserves number and momentum") {
    SimConfig c = small_two_stream(0.5);
    c.t_end = 20.0;
    c.fit_rate = false;
    const Diagnostics d = run_single(c, c.delta_widths().front());
    REQUIRE(d.max_number_drift < 1e-8);
    REQUIRE(d.max_momentum_drift < 1e-8);
    REQUIRE(std::abs(d.samples.front().momentum) < 1e-10 * c.box_length());
}

TEST_CASE("two-stream growth follows the analytic rate across H") {
    for (double H : {0.0, 0.5, 1.0, 2.0}) {
        const SimulationResult r = run(small_two_stream(H));
        const double theory = two_stream_lorentzian(0.5, H, 0.0).growth_rate();
        REQUIRE(r.runs.size() == 2);
        REQUIRE(std::abs(r.gamma_fit - theory) < 0.1 * theory);
        for (const auto& d : r.runs) REQUIRE(d.max_harmonic_ratio < 10.0);
    }
}
