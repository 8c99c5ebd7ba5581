#pragma once

// Pseudo-spectral solver for the dimensionless Wigner-Moyal-Poisson system
//
//   ∂t W + q ∂x W + (i/H)[V(x + (iH/2)∂q) - V(x - (iH/2)∂q)] W = 0,
//   ∂x² V = -(∫ W dq - 1),
//
// on a periodic box in x and a truncated momentum window |q| < q_max. V is
// the electron potential energy (V = -eφ in physical units), so electrons feel
// the force -∂x V and |V̂_K| = |φ̂_K| in these units.
//
// Strang splitting per step: half free stream (exact phase e^{-ikqΔt/2} in x
// Fourier space), Poisson solve, full potential kick, half free stream. The
// kick is exact in η, the Fourier conjugate of q, where the sine operator is
// multiplication by exp{i(Δt/H)[V(x + Hη/2) - V(x - Hη/2)]}.

#include "qplasma/core.hpp"
#include "qplasma/detail/fft.hpp"
#include "qplasma/dispersion_analytic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace qplasma {

struct SimConfig {
    double K_bar = 0.5;
    int mode_number = 1;         // box length L = 2π mode_number / K̄
    int nx = 128;
    int np = 256;
    double q_max = 3.0;          // momentum window is (-q_max, q_max)
    double dt = 0.02;
    double t_end = 45.0;
    double H = 0.0;
    Background background = Background::symmetric_two_stream(0.0);
    double delta = 1e-6;
    double sample_interval = 0.1;
    double widening_cells = 4.0; // delta streams become Lorentzians of this many Δq
    bool widen_delta = true;
    bool extrapolate_width = true; // delta backgrounds: run widths w and 2w, report 2γ(w) - γ(2w)
    bool mask = true;
    double mask_fraction = 0.1;  // taper occupies this fraction of q_max at each end
    bool fit_rate = true;
    double linear_ceiling = 0.02; // fit only while |φ̂_K| stays below this amplitude
    double slope_tolerance = 0.05;
    double slope_window = 1.0;    // time span of the local log-slope stencil

    double box_length() const { return 2.0 * std::numbers::pi * mode_number / K_bar; }
    double dq() const { return 2.0 * q_max / np; }
    double dx() const { return box_length() / nx; }
    double k_max() const { return 2.0 * std::numbers::pi * (nx / 2) / box_length(); }

    /// Widths used for delta streams: one or two multiples of Δq.
    std::vector<double> delta_widths() const {
        if (!background.has_delta()) return {0.0};
        if (extrapolate_width) return {widening_cells * dq(), 2.0 * widening_cells * dq()};
        return {widening_cells * dq()};
    }

    void validate() const {
        auto pow2 = [](int n) { return n >= 32 && (n & (n - 1)) == 0; };
        require(K_bar > 0 && std::isfinite(K_bar), "K_bar", "must be positive");
        require(mode_number >= 1, "mode_number", "must be at least 1");
        require(pow2(nx), "nx", "must be a power of two >= 32");
        require(pow2(np), "np", "must be a power of two >= 32");
        require(3 * mode_number < nx / 2, "mode_number", "harmonics up to 3K must fit below the x Nyquist mode");
        require(q_max > 0 && std::isfinite(q_max), "q_max", "must be positive");
        require(dt != 0 && std::isfinite(dt), "dt", "must be non-zero");
        require(t_end > 0 && std::isfinite(t_end), "t_end", "must be positive");
        require(H >= 0 && std::isfinite(H), "H", "must be non-negative");
        require(delta >= 0 && delta <= 1e-3, "delta", "perturbation amplitude must lie in [0, 1e-3]");
        require(sample_interval > 0, "sample_interval", "must be positive");
        require(widening_cells >= 4, "widening_cells", "delta widening must cover at least 4 grid cells");
        require(mask_fraction > 0 && mask_fraction < 1, "mask_fraction", "must lie in (0, 1)");
        require(linear_ceiling > 0, "linear_ceiling", "must be positive");
        require(slope_tolerance > 0, "slope_tolerance", "must be positive");
        require(slope_window >= 0, "slope_window", "must be non-negative");
        require(!background.has_delta() || widen_delta, "background",
                "delta streams are not representable on the momentum grid unless widen_delta is set");

        double extent = 0;
        double width = 0;
        const double widest = delta_widths().back();
        for (const auto& s : background.streams()) {
            extent = std::max(extent, std::abs(s.drift()));
            const double w = s.kind() == SpectrumKind::delta ? widest : s.width();
            require(w >= dq(), "background", "stream width is below the momentum grid spacing");
            width = std::max(width, w);
        }
        const double needed = extent + 10.0 * std::max(width, 0.5 * H * K_bar);
        require(q_max >= needed, "q_max",
                "momentum window must reach drift + 10 x max(width, H K/2) = " + std::to_string(needed));
        require(k_max() * q_max * std::abs(dt) <= std::numbers::pi, "dt",
                "free-streaming phase per step exceeds pi at the grid extremes");
    }
};

/// Kick phase multiplier (2/H) sin(kHη/2), tending to kη as H → 0.
inline double sine_operator_symbol(double k, double H, double eta) {
    if (H == 0) return k * eta;
    return 2.0 / H * std::sin(0.5 * k * H * eta);
}

struct WignerState {
    int nx = 0;
    int np = 0;
    std::vector<double> W;   // W[ix * np + jq]
    std::vector<double> phi; // potential energy V(x), zero mean
    double t = 0;

    double& at(int ix, int jq) { return W[static_cast<std::size_t>(ix) * np + jq]; }
    double at(int ix, int jq) const { return W[static_cast<std::size_t>(ix) * np + jq]; }
};

class WignerSolver {
public:
    /// `widths` replaces each delta stream by a Lorentzian of that width.
    WignerSolver(const SimConfig& cfg, double delta_width)
        : cfg_(cfg), nx_(cfg.nx), np_(cfg.np), nkx_(cfg.nx / 2 + 1), neta_(cfg.np / 2 + 1),
          along_x_(cfg.nx, cfg.np, cfg.np, 1, cfg.np, 1),
          along_q_(cfg.np, cfg.nx, 1, cfg.np, 1, cfg.np / 2 + 1),
          phase_x_(cfg.nx, cfg.np / 2 + 1, 1, cfg.nx, 1, cfg.nx / 2 + 1),
          density_(cfg.nx, 1, 1, cfg.nx, 1, cfg.nx / 2 + 1), delta_width_(delta_width) {
        cfg_.validate();
        const double L = cfg_.box_length();
        const double dq = cfg_.dq();
        q_.resize(static_cast<std::size_t>(np_));
        for (int j = 0; j < np_; ++j) q_[static_cast<std::size_t>(j)] = -cfg_.q_max + (j + 0.5) * dq;
        k_.resize(static_cast<std::size_t>(nkx_));
        for (int m = 0; m < nkx_; ++m) k_[static_cast<std::size_t>(m)] = 2.0 * std::numbers::pi * m / L;
        eta_.resize(static_cast<std::size_t>(neta_));
        for (int m = 0; m < neta_; ++m)
            eta_[static_cast<std::size_t>(m)] = 2.0 * std::numbers::pi * m / (np_ * dq);
        mask_.assign(static_cast<std::size_t>(np_), 1.0);
        if (cfg_.mask) {
            const double w = cfg_.mask_fraction * cfg_.q_max;
            const double start = cfg_.q_max - w;
            for (int j = 0; j < np_; ++j) {
                const double a = std::abs(q_[static_cast<std::size_t>(j)]);
                if (a > start) {
                    const double c = std::cos(0.5 * std::numbers::pi * (a - start) / w);
                    mask_[static_cast<std::size_t>(j)] = c * c;
                }
            }
        }
        spectral_.resize(static_cast<std::size_t>(nkx_) * np_);
        rows_.resize(static_cast<std::size_t>(nx_) * neta_);
        symbol_.resize(static_cast<std::size_t>(neta_) * nkx_);
        theta_.resize(static_cast<std::size_t>(neta_) * nx_);
        line_.resize(static_cast<std::size_t>(nx_));
        line_hat_.resize(static_cast<std::size_t>(nkx_));
    }

    const SimConfig& config() const noexcept { return cfg_; }
    const std::vector<double>& q_grid() const noexcept { return q_; }
    double delta_width() const noexcept { return delta_width_; }

    /// Background spectrum on the q grid, renormalized so Δq Σ w = 1.
    std::vector<double> background_profile() const {
        std::vector<double> w(static_cast<std::size_t>(np_), 0.0);
        for (const auto& s : cfg_.background.streams()) {
            const StreamSpectrum l = s.kind() == SpectrumKind::delta
                                         ? StreamSpectrum::lorentzian(s.density(), s.drift(), delta_width_)
                                         : s;
            for (int j = 0; j < np_; ++j)
                w[static_cast<std::size_t>(j)] += lorentzian_value(l, q_[static_cast<std::size_t>(j)]);
        }
        double sum = 0;
        for (double v : w) sum += v;
        const double scale = cfg_.background.total_density() / (sum * cfg_.dq());
        for (double& v : w) v *= scale;
        return w;
    }

    /// W = w(q)(1 + δ cos Kx) with V from one Poisson solve.
    WignerState init_state() const {
        WignerState s;
        s.nx = nx_;
        s.np = np_;
        s.W.resize(static_cast<std::size_t>(nx_) * np_);
        const std::vector<double> w = background_profile();
        const double dx = cfg_.dx();
        for (int ix = 0; ix < nx_; ++ix) {
            const double f = 1.0 + cfg_.delta * std::cos(cfg_.K_bar * ix * dx);
            for (int j = 0; j < np_; ++j) s.at(ix, j) = w[static_cast<std::size_t>(j)] * f;
        }
        s.phi = potential_in_x(potential_hat(s));
        return s;
    }

    /// Fourier coefficients V̂_k (k = 0..nx/2) of the potential energy, so
    /// V(x) = Σ_k V̂_k e^{ikx} over positive and negative k.
    std::vector<cdouble> potential_hat(const WignerState& s) const {
        const double dq = cfg_.dq();
        for (int ix = 0; ix < nx_; ++ix) {
            double n = 0;
            for (int j = 0; j < np_; ++j) n += s.at(ix, j);
            line_[static_cast<std::size_t>(ix)] = n * dq;
        }
        density_.forward(line_.data(), line_hat_.data());
        return potential_from_density(line_hat_);
    }

    std::vector<double> potential_in_x(std::vector<cdouble> v_hat) const {
        std::vector<double> out(static_cast<std::size_t>(nx_));
        density_.inverse(v_hat.data(), out.data());
        return out;
    }

    /// exp(-ikqΔt) in x Fourier space. With `mask` the k ≠ 0 modes are also
    /// multiplied by the momentum-edge taper; the k = 0 mode carries the
    /// conserved number and momentum and is never masked.
    void free_stream(WignerState& s, double dt, bool mask = false,
                     std::vector<cdouble>* density_hat = nullptr) const {
        along_x_.forward(s.W.data(), spectral_.data());
        for (int m = 1; m < nkx_; ++m) {
            if (2 * m == nx_) continue; // Nyquist row stays real
            const double k = k_[static_cast<std::size_t>(m)];
            cdouble* row = spectral_.data() + static_cast<std::size_t>(m) * np_;
            for (int j = 0; j < np_; ++j) {
                cdouble f = std::polar(1.0, -k * q_[static_cast<std::size_t>(j)] * dt);
                if (mask) f *= mask_[static_cast<std::size_t>(j)];
                row[j] *= f;
            }
        }
        if (density_hat) {
            const double dq = cfg_.dq();
            density_hat->assign(static_cast<std::size_t>(nkx_), 0.0);
            for (int m = 0; m < nkx_; ++m) {
                cdouble sum = 0;
                const cdouble* row = spectral_.data() + static_cast<std::size_t>(m) * np_;
                for (int j = 0; j < np_; ++j) sum += row[j];
                (*density_hat)[static_cast<std::size_t>(m)] = sum * dq;
            }
        }
        along_x_.inverse(spectral_.data(), s.W.data());
        const double norm = 1.0 / nx_;
        for (double& v : s.W) v *= norm;
    }

    /// Exact potential substep for the potential energy with coefficients `v_hat`.
    void kick(WignerState& s, const std::vector<cdouble>& v_hat, double dt) const {
        require(v_hat.size() == static_cast<std::size_t>(nkx_), "v_hat", "wrong number of modes");
        const double H = cfg_.H;
        for (int e = 0; e < neta_; ++e) {
            cdouble* row = symbol_.data() + static_cast<std::size_t>(e) * nkx_;
            for (int m = 0; m < nkx_; ++m) {
                const double sym = sine_operator_symbol(k_[static_cast<std::size_t>(m)], H,
                                                        eta_[static_cast<std::size_t>(e)]);
                row[m] = dt * v_hat[static_cast<std::size_t>(m)] * cdouble(0.0, sym);
            }
            row[0] = 0.0;
            if (nx_ % 2 == 0) row[nkx_ - 1] = 0.0;
        }
        phase_x_.inverse(symbol_.data(), theta_.data());

        along_q_.forward(s.W.data(), rows_.data());
        for (int ix = 0; ix < nx_; ++ix) {
            cdouble* row = rows_.data() + static_cast<std::size_t>(ix) * neta_;
            for (int e = 1; e < neta_; ++e) {
                if (2 * e == np_) continue; // η Nyquist stays real
                row[e] *= std::polar(1.0, theta_[static_cast<std::size_t>(e) * nx_ + ix]);
            }
        }
        along_q_.inverse(rows_.data(), s.W.data());
        const double norm = 1.0 / np_;
        for (double& v : s.W) v *= norm;
    }

    /// One Strang step of length dt (negative dt runs backwards).
    void step(WignerState& s, double dt) const {
        std::vector<cdouble> n_hat;
        free_stream(s, 0.5 * dt, false, &n_hat);
        const std::vector<cdouble> v_hat = potential_from_density(n_hat);
        kick(s, v_hat, dt);
        free_stream(s, 0.5 * dt, cfg_.mask);
        s.t += dt;
        s.phi = potential_in_x(potential_hat(s));
    }

    double number(const WignerState& s) const {
        double sum = 0;
        for (double v : s.W) sum += v;
        return sum * cfg_.dx() * cfg_.dq();
    }

    double momentum(const WignerState& s) const {
        double sum = 0;
        for (int ix = 0; ix < nx_; ++ix)
            for (int j = 0; j < np_; ++j) sum += q_[static_cast<std::size_t>(j)] * s.at(ix, j);
        return sum * cfg_.dx() * cfg_.dq();
    }

    /// (1/2)∫|∂x V|² dx over the box.
    double field_energy(const std::vector<cdouble>& v_hat) const {
        double e = 0;
        for (int m = 1; m < nkx_; ++m) {
            const double k = k_[static_cast<std::size_t>(m)];
            const double w = 2 * m == nx_ ? 1.0 : 2.0;
            e += w * k * k * std::norm(v_hat[static_cast<std::size_t>(m)]);
        }
        return 0.5 * cfg_.box_length() * e;
    }

private:
    std::vector<cdouble> potential_from_density(const std::vector<cdouble>& n_hat_raw) const {
        // n_hat_raw is the unnormalized DFT of ∫W dq; ∂x²V = -(n - 1) gives
        // V̂_k = n̂_k / k² for k ≠ 0.
        std::vector<cdouble> v(static_cast<std::size_t>(nkx_), 0.0);
        for (int m = 1; m < nkx_; ++m) {
            if (2 * m == nx_) continue;
            const double k = k_[static_cast<std::size_t>(m)];
            v[static_cast<std::size_t>(m)] = n_hat_raw[static_cast<std::size_t>(m)] / (nx_ * k * k);
        }
        return v;
    }

    SimConfig cfg_;
    int nx_, np_, nkx_, neta_;
    detail::BatchedRealFft along_x_;
    detail::BatchedRealFft along_q_;
    detail::BatchedRealFft phase_x_;
    detail::BatchedRealFft density_;
    double delta_width_;
    std::vector<double> q_, k_, eta_, mask_;
    mutable std::vector<cdouble> spectral_, rows_, symbol_, line_hat_;
    mutable std::vector<double> theta_, line_;
};

struct Sample {
    double t;
    double field_energy;
    double mode_K;  // |φ̂_K|
    double mode_2K;
    double mode_3K;
    double number;
    double momentum;
};

/// Exponential rate fitted to one amplitude series.
struct RateFit {
    double gamma = 0;
    double t_start = 0;
    double t_end = 0;
    std::size_t points = 0;
    double rms_residual = 0;
    std::string level; // "raw", "peaks" or "peaks_of_peaks"
};

class FitError : public Error {
public:
    FitError(const std::string& what, std::vector<double> t, std::vector<double> amplitude)
        : Error(what), t_(std::move(t)), amplitude_(std::move(amplitude)) {}
    const std::vector<double>& times() const noexcept { return t_; }
    const std::vector<double>& amplitudes() const noexcept { return amplitude_; }

private:
    std::vector<double> t_;
    std::vector<double> amplitude_;
};

namespace detail {

struct Series {
    std::vector<double> t;
    std::vector<double> y;
};

inline Series local_maxima(const Series& s) {
    Series out;
    for (std::size_t i = 1; i + 1 < s.t.size(); ++i) {
        if (s.y[i] > s.y[i - 1] && s.y[i] >= s.y[i + 1]) {
            out.t.push_back(s.t[i]);
            out.y.push_back(s.y[i]);
        }
    }
    return out;
}

// Least-squares slope of log y over the points within ±half_window of each
// point (never fewer than its immediate neighbours).
inline std::vector<double> local_log_slopes(const Series& s, double half_window) {
    const std::size_t n = s.t.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t a = i > 0 ? i - 1 : 0;
        std::size_t b = std::min(n - 1, i + 1);
        while (a > 0 && s.t[i] - s.t[a - 1] <= half_window) --a;
        while (b + 1 < n && s.t[b + 1] - s.t[i] <= half_window) ++b;
        double st = 0, sy = 0, stt = 0, sty = 0;
        for (std::size_t j = a; j <= b; ++j) {
            const double ly = std::log(s.y[j]);
            st += s.t[j];
            sy += ly;
            stt += s.t[j] * s.t[j];
            sty += s.t[j] * ly;
        }
        const double m = static_cast<double>(b - a + 1);
        out[i] = (m * sty - st * sy) / (m * stt - st * st);
    }
    return out;
}

// Longest run of points (by time span) whose local slopes all lie within a
// band of relative half-width `tol` about the band centre.
inline std::optional<std::pair<std::size_t, std::size_t>>
steady_window(const Series& s, double tol, double half_window, std::size_t min_points) {
    const std::size_t n = s.t.size();
    if (n < std::max<std::size_t>(min_points, 2)) return std::nullopt;
    const std::vector<double> slope = local_log_slopes(s, half_window);
    auto steady = [&](double lo, double hi) { return hi - lo <= tol * std::abs(lo + hi); };
    std::optional<std::pair<std::size_t, std::size_t>> best;
    double best_span = -1;
    for (std::size_t a = 0; a < n; ++a) {
        double lo = slope[a];
        double hi = slope[a];
        std::size_t b = a;
        while (b + 1 < n) {
            const double nlo = std::min(lo, slope[b + 1]);
            const double nhi = std::max(hi, slope[b + 1]);
            if (!steady(nlo, nhi)) break;
            lo = nlo;
            hi = nhi;
            ++b;
        }
        const double span = s.t[b] - s.t[a];
        if (b - a + 1 >= min_points && steady(lo, hi) && span > best_span) {
            best_span = span;
            best = std::pair{a, b};
        }
        if (b + 1 == n) break; // later starts only give shorter windows
    }
    return best;
}

} // namespace detail

/// Fits log y = c + γ t on the automatically chosen window. Only the prefix
/// of the series below `ceiling` is used. Three levels are tried (the raw
/// series, its local maxima, and the maxima of those) and the longest steady
/// window wins.
inline RateFit fit_exponential_rate(const std::vector<double>& t, const std::vector<double>& y,
                                    double ceiling, double slope_tolerance = 0.05,
                                    double slope_window = 1.0, std::size_t min_points = 4,
                                    double max_rms = 0.1) {
    require(t.size() == y.size(), "series", "time and amplitude lengths differ");
    detail::Series raw;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(y[i] > 0) || !(y[i] < ceiling)) break;
        raw.t.push_back(t[i]);
        raw.y.push_back(y[i]);
    }
    const detail::Series peaks = detail::local_maxima(raw);
    const detail::Series peaks2 = detail::local_maxima(peaks);
    const std::pair<const detail::Series*, const char*> levels[] = {
        {&raw, "raw"}, {&peaks, "peaks"}, {&peaks2, "peaks_of_peaks"}};

    std::optional<RateFit> best;
    for (const auto& [series, name] : levels) {
        const auto w = detail::steady_window(*series, slope_tolerance, 0.5 * slope_window, min_points);
        if (!w) continue;
        const auto [a, b] = *w;
        const std::size_t n = b - a + 1;
        double st = 0, sy = 0, stt = 0, sty = 0;
        for (std::size_t i = a; i <= b; ++i) {
            const double ly = std::log(series->y[i]);
            st += series->t[i];
            sy += ly;
            stt += series->t[i] * series->t[i];
            sty += series->t[i] * ly;
        }
        const double nn = static_cast<double>(n);
        const double gamma = (nn * sty - st * sy) / (nn * stt - st * st);
        const double c = (sy - gamma * st) / nn;
        double ss = 0;
        for (std::size_t i = a; i <= b; ++i) {
            const double r = std::log(series->y[i]) - (c + gamma * series->t[i]);
            ss += r * r;
        }
        RateFit fit{gamma, series->t[a], series->t[b], n, std::sqrt(ss / nn), name};
        if (fit.rms_residual > max_rms) continue;
        if (!best || fit.t_end - fit.t_start > best->t_end - best->t_start) best = fit;
    }
    if (!best) throw FitError("no exponential regime found in the mode amplitude series", t, y);
    return *best;
}

struct Diagnostics {
    double delta_width = 0; // Lorentzian width substituted for delta streams (0 if none)
    std::vector<Sample> samples;
    std::optional<RateFit> fit;
    double initial_number = 0;
    double max_number_drift = 0;   // max |N(t) - N(0)| / N(0)
    double max_momentum_drift = 0; // max |P(t) - P(0)| / (N(0) * max|drift|)
    double max_harmonic_ratio = 0; // max |φ̂_nK| / |φ̂_K|² (n = 2, 3) inside the fit window
};

struct SimulationResult {
    std::vector<Diagnostics> runs; // one per delta width
    double gamma_fit = 0;          // extrapolated to zero width when two widths ran
    bool has_fit = false;
};

/// Fits the |φ̂_K| series of `d` and records the harmonic content inside the
/// fit window. Throws FitError when no exponential regime exists.
inline void fit_diagnostics(Diagnostics& d, const SimConfig& cfg) {
    std::vector<double> t, y;
    for (const auto& x : d.samples) {
        t.push_back(x.t);
        y.push_back(x.mode_K);
    }
    d.fit = fit_exponential_rate(t, y, cfg.linear_ceiling, cfg.slope_tolerance, cfg.slope_window);
    d.max_harmonic_ratio = 0;
    for (const auto& x : d.samples) {
        if (x.t < d.fit->t_start || x.t > d.fit->t_end) continue;
        const double k2 = x.mode_K * x.mode_K;
        d.max_harmonic_ratio = std::max({d.max_harmonic_ratio, x.mode_2K / k2, x.mode_3K / k2});
    }
}

inline Diagnostics run_single(const SimConfig& cfg, double delta_width) {
    const WignerSolver solver(cfg, delta_width);
    WignerState s = solver.init_state();
    const int K_index = cfg.mode_number;
    const int every = std::max(1, static_cast<int>(std::lround(cfg.sample_interval / std::abs(cfg.dt))));
    const long steps = std::lround(cfg.t_end / std::abs(cfg.dt));

    double drift_scale = 0;
    for (const auto& st : cfg.background.streams()) drift_scale = std::max(drift_scale, std::abs(st.drift()));
    drift_scale = std::max(drift_scale, 1.0);

    Diagnostics d;
    d.delta_width = cfg.background.has_delta() ? delta_width : 0.0;
    auto record = [&] {
        const std::vector<cdouble> v = solver.potential_hat(s);
        Sample x{s.t,
                 solver.field_energy(v),
                 std::abs(v[static_cast<std::size_t>(K_index)]),
                 std::abs(v[static_cast<std::size_t>(2 * K_index)]),
                 std::abs(v[static_cast<std::size_t>(3 * K_index)]),
                 solver.number(s),
                 solver.momentum(s)};
        d.samples.push_back(x);
    };
    record();
    d.initial_number = d.samples.front().number;
    const double p0 = d.samples.front().momentum;
    for (long n = 1; n <= steps; ++n) {
        solver.step(s, cfg.dt);
        s.t = static_cast<double>(n) * cfg.dt; // no accumulated rounding in the sample times
        if (n % every == 0 || n == steps) record();
    }
    for (const auto& x : d.samples) {
        d.max_number_drift = std::max(d.max_number_drift, std::abs(x.number - d.initial_number) / d.initial_number);
        d.max_momentum_drift =
            std::max(d.max_momentum_drift, std::abs(x.momentum - p0) / (d.initial_number * drift_scale));
    }

    if (cfg.fit_rate) fit_diagnostics(d, cfg);
    return d;
}

/// Runs every delta width the config asks for. With two widths w and 2w the
/// reported rate is the linear extrapolation 2γ(w) - γ(2w) to zero width.
inline SimulationResult run(const SimConfig& cfg) {
    cfg.validate();
    SimulationResult r;
    for (double w : cfg.delta_widths()) r.runs.push_back(run_single(cfg, w));
    if (cfg.fit_rate) {
        r.has_fit = true;
        r.gamma_fit = r.runs.size() == 2 ? 2.0 * r.runs[0].fit->gamma - r.runs[1].fit->gamma
                                         : r.runs[0].fit->gamma;
    }
    return r;
}

/// Steps forward to t_end, then back with -dt, and returns ‖W_back - W_0‖₂ / ‖W_0‖₂.
inline double reversibility_error(const SimConfig& cfg, double delta_width) {
    const WignerSolver solver(cfg, delta_width);
    const WignerState start = solver.init_state();
    WignerState s = start;
    const long steps = std::lround(cfg.t_end / std::abs(cfg.dt));
    for (long n = 0; n < steps; ++n) solver.step(s, cfg.dt);
    for (long n = 0; n < steps; ++n) solver.step(s, -cfg.dt);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < s.W.size(); ++i) {
        num += (s.W[i] - start.W[i]) * (s.W[i] - start.W[i]);
        den += start.W[i] * start.W[i];
    }
    return std::sqrt(num / den);
}

} // namespace qplasma
