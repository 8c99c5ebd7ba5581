#include <catch2/catch_approx.hpp>
#include <catch2/catch_test_macros.hpp>

#include "qplasma/core.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace qplasma;

namespace {

// Composite Simpson rule, independent of the library quadrature.
template <class F>
double simpson(F f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

PhysicalParams unit_system() {
    PhysicalParams p;
    p.electron_mass = 1;
    p.elementary_charge = 1;
    p.vacuum_permittivity = 1;
    p.reduced_planck = 1;
    p.ion_density = 1;
    return p;
}

std::vector<double> symmetric_grid(double centre, double half_extent, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    const double dq = 2 * half_extent / (n - 1);
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = centre - half_extent + i * dq;
    return g;
}

} // namespace

TEST_CASE("physical parameters reject non-positive fields") {
    PhysicalParams p;
    REQUIRE_NOTHROW(p.validate());
    p.ion_density = 0;
    REQUIRE_THROWS_AS(p.validate(), PreconditionError);
    p = PhysicalParams{};
    p.reduced_planck = -1;
    REQUIRE_THROWS_AS(p.validate(), PreconditionError);
}

TEST_CASE("plasma frequency of an electron gas at 1e28 per cubic metre") {
    // sqrt(n e^2 / (m eps0)) evaluated by hand: 5.641e15 rad/s.
    REQUIRE(PhysicalParams{}.plasma_frequency() == Catch::Approx(5.6414602e15).epsilon(1e-6));
}

TEST_CASE("to_dimensionless in the unit system") {
    const auto d = to_dimensionless(unit_system(), 1.0, 1.0, 0.0);
    REQUIRE(d.K_bar == 1.0);
    REQUIRE(d.H == 1.0);
    REQUIRE(d.alpha == 0.0);
}

TEST_CASE("zero width gives zero alpha") {
    const auto d = to_dimensionless(PhysicalParams{}, 3e8, 2e-24, 0.0);
    REQUIRE(d.alpha == 0.0);
}

TEST_CASE("negative drift normalizes by its magnitude") {
    const auto a = to_dimensionless(unit_system(), 2.0, -0.5, 0.1);
    const auto b = to_dimensionless(unit_system(), 2.0, 0.5, 0.1);
    REQUIRE(a.K_bar == b.K_bar);
    REQUIRE(a.H == b.H);
    REQUIRE(a.alpha == b.alpha);
}

TEST_CASE("zero drift momentum is rejected") {
    try {
        to_dimensionless(PhysicalParams{}, 1e8, 0.0, 0.0);
        FAIL("expected an error");
    } catch (const PreconditionError& e) {
        REQUIRE(e.parameter() == "drift_momentum");
    }
    REQUIRE_THROWS_AS(to_dimensionless(PhysicalParams{}, 0.0, 1e-24, 0.0), PreconditionError);
}

TEST_CASE("dimensionless conversion round trip") {
    std::mt19937_64 rng(20261015);
    std::uniform_real_distribution<double> logu(-3.0, 3.0);
    const PhysicalParams phys;
    for (int i = 0; i < 100; ++i) {
        DimensionlessParams d;
        d.K_bar = std::pow(10.0, logu(rng));
        d.H = std::pow(10.0, logu(rng));
        d.alpha = std::pow(10.0, logu(rng) / 3.0) - 0.1;
        const PhysicalWave w = from_dimensionless(phys, d);
        const DimensionlessParams back = to_dimensionless(phys, w.wavenumber, w.drift_momentum, w.width_momentum);
        REQUIRE(std::abs(back.K_bar - d.K_bar) <= 1e-12 * d.K_bar);
        REQUIRE(std::abs(back.H - d.H) <= 1e-12 * d.H);
        REQUIRE(std::abs(back.alpha - d.alpha) <= 1e-12 * d.alpha);
    }
}

TEST_CASE("stream spectrum kinds") {
    REQUIRE(StreamSpectrum::from_width(1, 1, 0).kind() == SpectrumKind::delta);
    REQUIRE(StreamSpectrum::from_width(1, 1, 0.2).kind() == SpectrumKind::lorentzian);
    REQUIRE_THROWS_AS(StreamSpectrum::lorentzian(1, 1, 0), PreconditionError);
    REQUIRE_THROWS_AS(StreamSpectrum::delta(-1, 1), PreconditionError);
    REQUIRE_THROWS_AS(StreamSpectrum::from_width(1, 1, -0.1), PreconditionError);
}

TEST_CASE("lorentzian peak value") {
    const auto s = StreamSpectrum::lorentzian(0.7, -1.0, 0.25);
    REQUIRE(lorentzian_value(s, -1.0) == Catch::Approx(0.7 / (std::numbers::pi * 0.25)));
}

TEST_CASE("lorentzian is even and positive about the drift") {
    const auto s = StreamSpectrum::lorentzian(0.5, 1.0, 0.3);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 200; ++i) {
        const double d = u(rng);
        REQUIRE(lorentzian_value(s, 1.0 + d) == Catch::Approx(lorentzian_value(s, 1.0 - d)).epsilon(1e-12));
        REQUIRE(lorentzian_value(s, 1.0 + d) > 0);
    }
}

TEST_CASE("lorentzian integrates to the stream density") {
    const auto s = StreamSpectrum::lorentzian(0.5, 1.0, 0.2);
    const double total = simpson([&](double p) { return lorentzian_value(s, p); }, 1.0 - 20.0, 1.0 + 20.0, 200000);
    // The truncated tails hold 2/(100 pi) of the mass.
    REQUIRE(std::abs(total - 0.5) <= 0.01 * 0.5);
}

TEST_CASE("delta streams have no pointwise value") {
    REQUIRE_THROWS_AS(lorentzian_value(StreamSpectrum::delta(1, 1), 1.0), PreconditionError);
}

TEST_CASE("background quasineutrality") {
    REQUIRE(Background::symmetric_two_stream(0.1).total_density() == 1.0);
    REQUIRE_THROWS_AS(Background({StreamSpectrum::delta(0.4, 1), StreamSpectrum::delta(0.4, -1)}),
                      PreconditionError);
    REQUIRE(Background::one_stream(0).has_delta());
    REQUIRE_FALSE(Background::one_stream(0.2).has_delta());
    const Background wide = Background::symmetric_two_stream(0).with_width(0.3);
    REQUIRE_FALSE(wide.has_delta());
    REQUIRE(wide.streams()[1].drift() == -1.0);
}

TEST_CASE("background densities integrate to the ion density") {
    const Background bg({StreamSpectrum::lorentzian(0.3, 1.0, 0.1), StreamSpectrum::delta(0.2, 0.0),
                         StreamSpectrum::lorentzian(0.5, -2.0, 0.4)});
    double total = 0;
    for (const auto& s : bg.streams()) {
        if (s.kind() == SpectrumKind::delta) {
            total += s.density();
            continue;
        }
        // Substituting p = d + w tan(theta) makes the Lorentzian mass an exact
        // integral over theta in (-pi/2, pi/2).
        total += simpson(
            [&](double th) {
                const double c = std::cos(th);
                return c == 0 ? 0.0 : lorentzian_value(s, s.drift() + s.width() * std::tan(th)) * s.width() / (c * c);
            },
            -std::numbers::pi / 2, std::numbers::pi / 2, 2000);
    }
    REQUIRE(std::abs(total - 1.0) <= 1e-9);
}

TEST_CASE("spectrum from the correlation function matches the closed form") {
    const auto s = StreamSpectrum::lorentzian(1.0, 1.0, 0.5);
    const auto grid = symmetric_grid(1.0, 20.0, 4001);
    const auto w = spectrum_from_correlation(s, grid);
    double worst = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ref = lorentzian_value(s, grid[i]);
        worst = std::max(worst, std::abs(w[i] - ref) / ref);
    }
    REQUIRE(worst < 1e-6);
}

TEST_CASE("spectrum from the correlation function carries the density") {
    const auto s = StreamSpectrum::lorentzian(0.5, -1.0, 0.2);
    const auto grid = symmetric_grid(-1.0, 40.0, 8001);
    const auto w = spectrum_from_correlation(s, grid);
    const double dq = grid[1] - grid[0];
    double total = 0;
    for (double v : w) total += v * dq;
    REQUIRE(std::abs(total - 0.5) <= 0.01 * 0.5);
}

TEST_CASE("broad correlation widths flatten the spectrum") {
    const auto grid = symmetric_grid(0.0, 5.0, 1001);
    double previous = INFINITY;
    for (double width : {0.1, 0.5, 2.0, 8.0}) {
        const auto w = spectrum_from_correlation(StreamSpectrum::lorentzian(1.0, 0.0, width), grid);
        double hi = 0, lo = INFINITY;
        for (double v : w) {
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }
        REQUIRE(hi / lo < previous);
        previous = hi / lo;
    }
}

TEST_CASE("correlation grid must resolve the width") {
    const auto grid = symmetric_grid(0.0, 5.0, 101); // dq = 0.1
    REQUIRE_THROWS_AS(spectrum_from_correlation(StreamSpectrum::lorentzian(1.0, 0.0, 0.5), grid), PreconditionError);
    const auto shifted = symmetric_grid(0.3, 5.0, 1001);
    REQUIRE_THROWS_AS(spectrum_from_correlation(StreamSpectrum::lorentzian(1.0, 0.0, 0.5), shifted),
                      PreconditionError);
}
