#include <catch2/catch_approx.hpp>
#include <catch2/catch_test_macros.hpp>

#include "oracles.hpp"
#include "qplasma/stability_map.hpp"

#include <cmath>

using namespace qplasma;
using Catch::Approx;

namespace {

double H_plus(double K) { return 2.0 / K; }
double H_minus(double K) { return 2.0 / K * std::sqrt(std::max(0.0, 1.0 - 1.0 / (K * K))); }

} // namespace

TEST_CASE("classification examples") {
    const auto c = classify(0.5, 0.0, 0.0);
    REQUIRE(c.stability == Stability::unstable);
    REQUIRE(c.growth_rate == Approx(0.34062501931660664).epsilon(1e-14));
    REQUIRE(classify(1.5, 0.0, 0.0).stability == Stability::stable);
    REQUIRE(classify(1.5, 0.0, 0.0).growth_rate == 0.0);
    REQUIRE(classify(0.5, 0.0, 1.5).stability == Stability::stable);
    REQUIRE(classify(1.0, 0.0, 0.0).stability == Stability::stable); // marginal
}

TEST_CASE("classification agrees with the companion-matrix growth") {
    for (double K : {0.1, 0.6, 1.2, 2.5, 3.7})
        for (double H : {0.0, 0.5, 0.9, 1.6, 3.0})
            for (double a : {0.0, 0.05, 0.3}) {
                const double g = oracle::two_stream_growth(K, H, a);
                const auto c = classify(K, H, a);
                if (std::abs(g) > 1e-9) REQUIRE((c.stability == Stability::unstable) == (g > 0));
                REQUIRE(c.growth_rate == Approx(std::max(g, 0.0)).margin(1e-9));
            }
}

TEST_CASE("map axes are validated") {
    REQUIRE_THROWS_AS(build_map({0.5}, {0.0, 1.0}, 0.0), PreconditionError);
    REQUIRE_THROWS_AS(build_map({0.5, 0.4}, {0.0, 1.0}, 0.0), PreconditionError);
    REQUIRE_THROWS_AS(build_map({0.0, 1.0}, {0.0, 1.0}, 0.0), PreconditionError);
    REQUIRE_THROWS_AS(uniform_axis(1.0, 1.0, 10), PreconditionError);
    const auto ax = uniform_axis(0.0, 4.0, 400, true);
    REQUIRE(ax.front() == 0.01);
    REQUIRE(ax.back() == 4.0);
}

TEST_CASE("alpha = 0 boundaries follow the H plus and H minus curves") {
    const StabilityMap m = build_map(uniform_axis(0.0, 4.0, 120, true), uniform_axis(0.0, 4.0, 120), 0.0);
    REQUIRE(m.cells.size() == 120 * 120);
    REQUIRE(m.boundaries.size() == 2);
    for (const auto& c : m.boundaries) {
        REQUIRE_FALSE(c.points.empty());
        for (const auto& p : c.points) {
            REQUIRE(p.residual < boundary_tolerance);
            const double ref = c.curve_id == 0 ? H_plus(p.K_bar) : H_minus(p.K_bar);
            REQUIRE(std::abs(p.H - ref) < 1e-6);
        }
    }
    // Only columns with K >= 1 have a lower boundary.
    for (const auto& p : m.boundaries[1].points) REQUIRE(p.K_bar >= 1.0);
}

TEST_CASE("H = 0 row is unstable exactly below K = 1") {
    const StabilityMap m = build_map(uniform_axis(0.0, 2.0, 200, true), uniform_axis(0.0, 1.0, 5), 0.0);
    for (std::size_t i = 0; i < m.K_axis.size(); ++i)
        REQUIRE((m.at(i, 0).stability == Stability::unstable) == (m.K_axis[i] < 1.0));
}

TEST_CASE("broadening suppresses growth cell by cell") {
    const auto K = uniform_axis(0.0, 4.0, 80, true);
    const auto H = uniform_axis(0.0, 4.0, 80);
    const StabilityMap m0 = build_map(K, H, 0.0);
    const StabilityMap m1 = build_map(K, H, 0.05);
    const StabilityMap m3 = build_map(K, H, 0.3);
    std::size_t count0 = 0, count3 = 0;
    for (std::size_t n = 0; n < m0.cells.size(); ++n) {
        REQUIRE(m1.cells[n].growth_rate <= m0.cells[n].growth_rate);
        REQUIRE(m3.cells[n].growth_rate <= m1.cells[n].growth_rate);
        if (m3.cells[n].stability == Stability::unstable) REQUIRE(m0.cells[n].stability == Stability::unstable);
        if (m1.cells[n].stability == Stability::unstable) REQUIRE(m0.cells[n].stability == Stability::unstable);
        count0 += m0.cells[n].stability == Stability::unstable;
        count3 += m3.cells[n].stability == Stability::unstable;
    }
    REQUIRE(count3 < count0);
}

TEST_CASE("broadened boundaries have small residual") {
    const StabilityMap m = build_map(uniform_axis(0.0, 4.0, 60, true), uniform_axis(0.0, 4.0, 60), 0.2);
    REQUIRE_FALSE(m.boundaries.empty());
    for (const auto& c : m.boundaries)
        for (const auto& p : c.points) {
            REQUIRE(p.residual < boundary_tolerance);
            REQUIRE(std::abs(two_stream_lorentzian(p.K_bar, p.H, 0.2).growth_rate()) < boundary_tolerance);
        }
}

TEST_CASE("band report at H = 0.6") {
    const auto bands = band_report(0.6, 0.0, 1e-6, 4.0);
    REQUIRE(bands.size() == 2);
    const auto e = band_edges(0.6);
    REQUIRE(bands[0].lower == 1e-6);
    REQUIRE(std::abs(bands[0].upper - *e.K_minus_low) < 1e-6);
    REQUIRE(std::abs(bands[1].lower - *e.K_minus_high) < 1e-6);
    REQUIRE(std::abs(bands[1].upper - e.K_plus) < 1e-6);
}

TEST_CASE("band report topology") {
    REQUIRE(band_report(0.95, 0.0, 1e-6, 4.0).size() == 2);
    REQUIRE(band_report(1.0, 0.0, 1e-6, 4.0).size() == 1);
    const auto h2 = band_report(2.0, 0.0, 1e-6, 4.0);
    REQUIRE(h2.size() == 1);
    REQUIRE(std::abs(h2[0].upper - 1.0) < 1e-8);
}

TEST_CASE("band measure shrinks with broadening") {
    double previous = INFINITY;
    std::size_t count = 2;
    for (double a : {0.0, 0.05, 0.1, 0.3, 0.6, 0.9, 1.0}) {
        const auto bands = band_report(0.6, a, 1e-6, 4.0);
        double measure = 0;
        for (const auto& b : bands) measure += b.upper - b.lower;
        REQUIRE(measure < previous);
        REQUIRE(bands.size() <= count);
        previous = measure;
        count = bands.size();
    }
    REQUIRE(count == 0);
}

TEST_CASE("band termination at large K") {
    REQUIRE(band_termination(0.01, 2.0, 10.0) == Approx(5.0).epsilon(1e-9));
    REQUIRE(band_termination(0.04, 1.5, 6.0) == Approx(2.5).epsilon(1e-9));
    REQUIRE_THROWS_AS(band_termination(0.01, 6.0, 10.0), PreconditionError);
}

TEST_CASE("default map is 400 by 400") {
    const StabilityMap m = build_default_map(0.0);
    REQUIRE(m.K_axis.size() == 400);
    REQUIRE(m.H_axis.size() == 400);
    REQUIRE(m.H_axis.front() == 0.0);
    REQUIRE(m.K_axis.back() == 4.0);
}
