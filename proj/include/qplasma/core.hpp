#pragma once

// Parameter types shared by every module: physical constants, background
// momentum spectra, the dimensionless (K̄, H, α) triple, and the conversions
// between SI and dimensionless form.
//
// Normalization used throughout:
//   ω_p0 = sqrt(n0 e² / (m ε0))      plasma frequency of the TOTAL density
//   K̄    = p_ref K / (ω_p0 m)
//   H    = ħ ω_p0 m / p_ref²
//   α    = p_T / p_ref
// with p_ref = |p0| the drift momentum of the reference stream. Inside the
// library momenta are measured in p_ref, time in 1/ω_p0 and length in
// p_ref / (m ω_p0), so a background is a list of streams with density
// fractions summing to one.

#include "qplasma/detail/fft.hpp"
#include "qplasma/error.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace qplasma {

struct PhysicalParams {
    double electron_mass = 9.1093837015e-31;       // kg
    double elementary_charge = 1.602176634e-19;    // C
    double vacuum_permittivity = 8.8541878128e-12; // F/m
    double reduced_planck = 1.054571817e-34;       // J s
    double ion_density = 1e28;                     // 1/m^3

    void validate() const {
        require(electron_mass > 0, "electron_mass", "must be positive");
        require(elementary_charge > 0, "elementary_charge", "must be positive");
        require(vacuum_permittivity > 0, "vacuum_permittivity", "must be positive");
        require(reduced_planck > 0, "reduced_planck", "must be positive");
        require(ion_density > 0, "ion_density", "must be positive");
        const double w = plasma_frequency();
        require(std::isfinite(w) && w > 0, "ion_density", "plasma frequency is not finite");
    }

    double plasma_frequency() const {
        return std::sqrt(ion_density * elementary_charge * elementary_charge /
                         (electron_mass * vacuum_permittivity));
    }
};

enum class SpectrumKind { delta, lorentzian };

inline const char* to_string(SpectrumKind k) { return k == SpectrumKind::delta ? "delta" : "lorentzian"; }

/// One background stream: density, drift momentum and Lorentzian half-width.
/// Units are whatever the caller uses consistently (SI or dimensionless).
class StreamSpectrum {
public:
    static StreamSpectrum delta(double density, double drift) {
        return StreamSpectrum(density, drift, 0.0, SpectrumKind::delta);
    }
    static StreamSpectrum lorentzian(double density, double drift, double width) {
        require(width > 0, "width", "a Lorentzian stream needs a positive width");
        return StreamSpectrum(density, drift, width, SpectrumKind::lorentzian);
    }
    /// Delta when width == 0, Lorentzian otherwise.
    static StreamSpectrum from_width(double density, double drift, double width) {
        require(width >= 0, "width", "must be non-negative");
        return width == 0 ? delta(density, drift) : lorentzian(density, drift, width);
    }

    double density() const noexcept { return density_; }
    double drift() const noexcept { return drift_; }
    double width() const noexcept { return width_; }
    SpectrumKind kind() const noexcept { return kind_; }

private:
    StreamSpectrum(double density, double drift, double width, SpectrumKind kind)
        : density_(density), drift_(drift), width_(width), kind_(kind) {
        require(density > 0 && std::isfinite(density), "density", "must be positive");
        require(std::isfinite(drift), "drift", "must be finite");
        require(std::isfinite(width), "width", "must be finite");
    }

    double density_;
    double drift_;
    double width_;
    SpectrumKind kind_;
};

/// Lorentzian stream density per unit momentum.
inline double lorentzian_value(const StreamSpectrum& s, double p) {
    require(s.kind() == SpectrumKind::lorentzian, "kind",
            "delta streams have no pointwise value; use the analytic route");
    const double dp = p - s.drift();
    const double w = s.width();
    return s.density() / std::numbers::pi * w / (dp * dp + w * w);
}

/// Analytic continuation of the Lorentzian to complex momentum.
inline std::complex<double> lorentzian_value(const StreamSpectrum& s, std::complex<double> p) {
    const std::complex<double> dp = p - s.drift();
    const double w = s.width();
    return s.density() / std::numbers::pi * w / (dp * dp + w * w);
}

/// Ordered set of streams that together neutralize the ion background.
class Background {
public:
    Background(std::vector<StreamSpectrum> streams, double total_density = 1.0)
        : streams_(std::move(streams)), total_density_(total_density) {
        require(!streams_.empty(), "streams", "background needs at least one stream");
        require(total_density_ > 0, "total_density", "must be positive");
        double sum = 0;
        for (const auto& s : streams_) sum += s.density();
        require(std::abs(sum - total_density_) <= 1e-9 * total_density_, "density",
                "stream densities must sum to the ion density (quasineutrality)");
    }

    /// Single stream with unit drift and relative width alpha (delta if alpha = 0).
    static Background one_stream(double alpha) {
        return Background({StreamSpectrum::from_width(1.0, 1.0, alpha)});
    }
    /// Two equal-density counter-streaming beams with drifts ±1 and common width alpha.
    static Background symmetric_two_stream(double alpha) {
        return Background({StreamSpectrum::from_width(0.5, 1.0, alpha),
                           StreamSpectrum::from_width(0.5, -1.0, alpha)});
    }

    /// Same densities and drifts, every width replaced by `width`.
    Background with_width(double width) const {
        std::vector<StreamSpectrum> out;
        out.reserve(streams_.size());
        for (const auto& s : streams_)
            out.push_back(StreamSpectrum::from_width(s.density(), s.drift(), width));
        return Background(std::move(out), total_density_);
    }

    const std::vector<StreamSpectrum>& streams() const noexcept { return streams_; }
    double total_density() const noexcept { return total_density_; }

    bool has_delta() const {
        for (const auto& s : streams_)
            if (s.kind() == SpectrumKind::delta) return true;
        return false;
    }

private:
    std::vector<StreamSpectrum> streams_;
    double total_density_;
};

enum class BranchSign { plus, minus };

struct DimensionlessParams {
    double K_bar = 1.0;
    double H = 0.0;
    double alpha = 0.0;
    BranchSign branch = BranchSign::plus;

    void validate() const {
        require(K_bar > 0 && std::isfinite(K_bar), "K_bar", "must be positive");
        require(H >= 0 && std::isfinite(H), "H", "must be non-negative");
        require(alpha >= 0 && std::isfinite(alpha), "alpha", "must be non-negative");
    }
};

/// Physical wave and beam quantities that map onto one DimensionlessParams.
struct PhysicalWave {
    double wavenumber;     // 1/m
    double drift_momentum; // kg m/s
    double width_momentum; // kg m/s
};

inline DimensionlessParams to_dimensionless(const PhysicalParams& phys, double wavenumber,
                                            double drift_momentum, double width_momentum,
                                            BranchSign branch = BranchSign::plus) {
    phys.validate();
    require(drift_momentum != 0 && std::isfinite(drift_momentum), "drift_momentum",
            "zero drift leaves the normalization undefined");
    require(wavenumber > 0, "wavenumber", "must be positive");
    require(width_momentum >= 0, "width_momentum", "must be non-negative");
    const double w = phys.plasma_frequency();
    const double m = phys.electron_mass;
    const double p_ref = std::abs(drift_momentum);
    DimensionlessParams d;
    d.K_bar = p_ref * wavenumber / (w * m);
    d.H = phys.reduced_planck * w * m / (p_ref * p_ref);
    d.alpha = width_momentum / p_ref;
    d.branch = branch;
    return d;
}

inline PhysicalWave from_dimensionless(const PhysicalParams& phys, const DimensionlessParams& d) {
    phys.validate();
    d.validate();
    require(d.H > 0, "H", "the classical limit H = 0 fixes no drift momentum");
    const double w = phys.plasma_frequency();
    const double m = phys.electron_mass;
    const double p_ref = std::sqrt(phys.reduced_planck * w * m / d.H);
    return {d.K_bar * w * m / p_ref, p_ref, d.alpha * p_ref};
}

/// Numerically Fourier-transforms the phase correlation e^{-w|y|} of a stream
/// with drift d and width w onto `grid`. Used only to validate the closed-form
/// Lorentzian. `grid` must be uniform, symmetric about the drift, and resolve
/// the width with at least 8 points.
inline std::vector<double> spectrum_from_correlation(const StreamSpectrum& s,
                                                     std::span<const double> grid) {
    require(s.kind() == SpectrumKind::lorentzian, "width", "correlation width must be positive");
    require(grid.size() >= 3, "grid", "need at least three points");
    const std::size_t n = grid.size();
    const double dq = (grid.back() - grid.front()) / static_cast<double>(n - 1);
    require(dq > 0, "grid", "must be increasing");
    for (std::size_t i = 0; i < n; ++i) {
        const double expected = grid.front() + static_cast<double>(i) * dq;
        require(std::abs(grid[i] - expected) <= 1e-9 * dq, "grid", "must be uniform");
    }
    require(std::abs(grid.front() + grid.back() - 2 * s.drift()) <= 1e-9 * dq, "grid",
            "must be symmetric about the stream drift");
    require(s.width() / dq >= 8.0, "grid", "fewer than 8 points across the correlation width");

    // Samples e^{-w|η|} on an η grid whose DFT lands on multiples of dq. The
    // DFT returns the spectrum periodized with period N·dq; N is chosen so the
    // periodic images sit far beyond the requested window.
    const double half_extent = 0.5 * (grid.back() - grid.front()) + s.width();
    const double wanted_period = 8192.0 * half_extent;
    std::size_t nfft = 1;
    while (static_cast<double>(nfft) * dq < wanted_period || nfft < 4 * n) nfft <<= 1;

    // Grid points sit at q - d = (j + shift) dq with shift 0 (odd n) or 1/2.
    const double shift = n % 2 == 0 ? 0.5 : 0.0;
    const double deta = 2 * std::numbers::pi / (static_cast<double>(nfft) * dq);
    const auto nf = static_cast<long>(nfft);
    std::vector<std::complex<double>> buf(nfft);
    for (long l = 0; l < nf; ++l) {
        const double eta = static_cast<double>(l < nf / 2 ? l : l - nf) * deta;
        buf[static_cast<std::size_t>(l)] =
            std::exp(-s.width() * std::abs(eta)) * std::polar(1.0, shift * dq * eta);
    }
    // w(q) = (n/2π) ∫ dη e^{i(q-d)η} e^{-w|η|}; a forward transform read at
    // index -j supplies the e^{+i j dq η} kernel.
    detail::ComplexFft(static_cast<int>(nfft)).forward(buf.data());

    std::vector<double> out(n);
    const long first = -static_cast<long>(n / 2);
    for (std::size_t i = 0; i < n; ++i) {
        const long j = first + static_cast<long>(i);
        const auto idx = static_cast<std::size_t>(((-j) % nf + nf) % nf);
        out[i] = s.density() * deta / (2 * std::numbers::pi) * buf[idx].real();
    }
    return out;
}

} // namespace qplasma
