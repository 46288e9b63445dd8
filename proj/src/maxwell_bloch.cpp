#include "molmem/maxwell_bloch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "molmem/errors.hpp"
#include "molmem/fft.hpp"
#include "molmem/units.hpp"

namespace molmem::mb {

double AtomState::physicality_excess() const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rho_ba.size(); ++k) {
        worst = std::max(worst, std::norm(rho_ba[k]) - 0.25 * (1.0 - rho_d[k] * rho_d[k]));
    }
    return worst;
}

namespace {

// Cubic Lagrange interpolation of samples y at fractional position n + s, 0 <= s <= 1.
cplx interpolate(const std::vector<cplx>& y, std::size_t n, double s) {
    const std::size_t last = y.size() - 1;
    const std::size_t im1 = n == 0 ? 0 : n - 1;
    const std::size_t ip1 = std::min(n + 1, last);
    const std::size_t ip2 = std::min(n + 2, last);
    const double wm1 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    const double w0 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    const double w1 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    const double w2 = (s + 1.0) * s * (s - 1.0) / 6.0;
    return wm1 * y[im1] + w0 * y[n] + w1 * y[ip1] + w2 * y[ip2];
}

struct BlochRhs {
    double mu, g1, g2;
    void operator()(cplx e, cplx sigma, double rd, cplx& dsigma, double& drd) const {
        dsigma = -g2 * sigma + cplx(0.0, mu) * e * rd;
        drd = g1 * (1.0 - rd) + 4.0 * mu * (e * std::conj(sigma)).imag();
    }
};

}  // namespace

BlochSolution integrate_bloch(const field::FieldGrid& field, const AtomSpec& atom, double atomic_density,
                              const BlochOptions& options) {
    atom.validate();
    const std::size_t n = field.size();
    BlochSolution out;
    out.state.rho_ba.assign(n, cplx{});
    out.state.rho_d.assign(n, 1.0);
    out.polarization.assign(n, cplx{});
    out.polarization_rate.assign(n, cplx{});
    if (n == 0) return out;

    const double w = atom.transition_omega;
    const BlochRhs rhs{atom.dipole, atom.population_decay(), atom.coherence_decay()};

    // Field in the frame rotating at the transition frequency.
    std::vector<cplx> slow(n);
    for (std::size_t k = 0; k < n; ++k) slow[k] = field.samples[k] * std::polar(1.0, w * field.time(k));

    const int m = std::max(1, options.substeps);
    const double h = field.dt / m;
    cplx sigma{};
    double rd = 1.0;
    double drift = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        for (int j = 0; j < m; ++j) {
            const cplx e0 = interpolate(slow, k, static_cast<double>(j) / m);
            const cplx eh = interpolate(slow, k, (j + 0.5) / m);
            const cplx e1 = interpolate(slow, k, static_cast<double>(j + 1) / m);
            cplx s1, s2, s3, s4;
            double r1, r2, r3, r4;
            rhs(e0, sigma, rd, s1, r1);
            rhs(eh, sigma + 0.5 * h * s1, rd + 0.5 * h * r1, s2, r2);
            rhs(eh, sigma + 0.5 * h * s2, rd + 0.5 * h * r2, s3, r3);
            rhs(e1, sigma + h * s3, rd + h * r3, s4, r4);
            sigma += h / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
            rd += h / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
        }
        out.state.rho_ba[k + 1] = sigma * std::polar(1.0, -w * field.time(k + 1));
        out.state.rho_d[k + 1] = rd;
        drift = std::max(drift, std::abs(4.0 * std::norm(sigma) + rd * rd - 1.0));
    }
    out.length_drift = drift;

    const double excess = out.state.physicality_excess();
    if (excess > 1e-9) {
        std::ostringstream msg;
        msg << "Bloch state left the physical region: |rho_ba|^2 exceeds (1 - rho_d^2)/4 by " << excess;
        throw NumericalError(msg.str());
    }
    if (atom.relaxation_free() && drift > options.tolerance) {
        std::ostringstream msg;
        msg << "Bloch integration drift " << drift << " exceeds tolerance " << options.tolerance
            << "; increase the substeps or refine the time grid";
        throw NumericalError(msg.str());
    }

    const double g2 = atom.coherence_decay();
    for (std::size_t k = 0; k < n; ++k) {
        const cplx rho = out.state.rho_ba[k];
        out.polarization[k] = atomic_density * atom.dipole * rho;
        out.polarization_rate[k] =
            atomic_density * atom.dipole *
            (-cplx(g2, w) * rho + cplx(0.0, atom.dipole) * field.samples[k] * out.state.rho_d[k]);
    }
    return out;
}

void PropagationConfig::validate() const {
    if (!(length > 0.0)) throw ConfigError("propagation length must be positive");
    if (n_z_steps < 1) throw ConfigError("propagation needs at least one z step");
    if (store_every < 0) throw ConfigError("store_every must be non-negative");
    if (!(derivative_band > 0.0)) throw ConfigError("derivative band must be positive");
}

double energy(const field::FieldGrid& f) {
    if (f.size() < 2) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += std::norm(f.samples[k]);
    s -= 0.5 * (std::norm(f.samples.front()) + std::norm(f.samples.back()));
    return s * f.dt;
}

double energy(const field::FieldGrid& f, double t_a, double t_b) {
    double s = 0.0;
    double prev = 0.0;
    bool have_prev = false;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double t = f.time(k);
        if (t < t_a || t > t_b) continue;
        const double v = std::norm(f.samples[k]);
        if (have_prev) s += 0.5 * (prev + v) * f.dt;
        prev = v;
        have_prev = true;
    }
    return s;
}

namespace {

class Marcher {
public:
    Marcher(const field::FieldGrid& in, const medium::IndexTrace& index, const medium::MediumSpec& medium,
            const PropagationConfig& cfg)
        : grid_(in), medium_(medium), cfg_(cfg), n_(in.size()), fft_(n_) {
        dn_.resize(n_);
        for (std::size_t k = 0; k < n_; ++k) dn_[k] = index.n_values[k] - index.n0;
        const double wref = in.carrier_omega;
        deriv_.resize(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            // FFT bin k carries exp(+i w_k tau), i.e. physical frequency -w_k.
            const double wk = fft_frequency(k, n_, in.dt);
            const bool in_band = std::abs(wk + wref) <= cfg.derivative_band * wref;
            deriv_[k] = in_band ? cplx(0.0, wk + wref) / static_cast<double>(n_) : cplx{};
        }
        h_ = cfg.length / cfg.n_z_steps;
        half_.resize(n_);
        full_.resize(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            const double rate = wref * dn_[k] / units::speed_of_light;
            half_[k] = std::polar(1.0, 0.5 * rate * h_);
            full_[k] = half_[k] * half_[k];
        }
        work_.resize(n_);
        spec_.resize(n_);
    }

    // Non-stiff part of dE/dz: envelope advection and the atomic source.
    void rhs(const std::vector<cplx>& e, std::vector<cplx>& out) {
        for (std::size_t k = 0; k < n_; ++k) work_[k] = dn_[k] * e[k];
        fft_.forward(work_.data(), spec_.data());
        for (std::size_t k = 0; k < n_; ++k) spec_[k] *= deriv_[k];
        fft_.backward(spec_.data(), out.data());
        const double c = units::speed_of_light;
        for (std::size_t k = 0; k < n_; ++k) out[k] *= -1.0 / c;

        if (medium_.atomic_density > 0.0) {
            field::FieldGrid f{grid_.t0, grid_.dt, e, grid_.carrier_omega};
            const auto bloch = integrate_bloch(f, medium_.atom, medium_.atomic_density, cfg_.bloch);
            max_excess_ = std::max(max_excess_, bloch.state.physicality_excess());
            const double scale = units::two_pi / c;
            for (std::size_t k = 0; k < n_; ++k) out[k] -= scale * bloch.polarization_rate[k];
        }
    }

    // Integrating-factor RK4 step; the local phase w0 (n - n0) / c is exact.
    void step(std::vector<cplx>& e) {
        k1_.resize(n_);
        k2_.resize(n_);
        k3_.resize(n_);
        k4_.resize(n_);
        tmp_.resize(n_);
        const double h = h_;
        rhs(e, k1_);
        for (std::size_t k = 0; k < n_; ++k) tmp_[k] = half_[k] * (e[k] + 0.5 * h * k1_[k]);
        rhs(tmp_, k2_);
        for (std::size_t k = 0; k < n_; ++k) tmp_[k] = half_[k] * e[k] + 0.5 * h * k2_[k];
        rhs(tmp_, k3_);
        for (std::size_t k = 0; k < n_; ++k) tmp_[k] = full_[k] * e[k] + h * half_[k] * k3_[k];
        rhs(tmp_, k4_);
        for (std::size_t k = 0; k < n_; ++k) {
            e[k] = full_[k] * e[k] +
                   h / 6.0 * (full_[k] * k1_[k] + 2.0 * half_[k] * (k2_[k] + k3_[k]) + k4_[k]);
        }
    }

    double step_length() const { return h_; }
    double max_excess() const { return max_excess_; }

private:
    const field::FieldGrid& grid_;
    const medium::MediumSpec& medium_;
    const PropagationConfig& cfg_;
    std::size_t n_;
    Fft fft_;
    double h_ = 0.0;
    double max_excess_ = -1.0;
    std::vector<double> dn_;
    std::vector<cplx> deriv_, half_, full_, work_, spec_, k1_, k2_, k3_, k4_, tmp_;
};

PropagationResult march(const field::FieldGrid& field_in, const medium::IndexTrace& index,
                        const medium::MediumSpec& medium, const PropagationConfig& config) {
    Marcher marcher(field_in, index, medium, config);
    PropagationResult result;
    std::vector<cplx> e = field_in.samples;
    auto snapshot = [&](double z) {
        result.history.push_back({field_in.t0, field_in.dt, e, field_in.carrier_omega});
        result.history_z.push_back(z);
    };
    result.energy_z.push_back(0.0);
    result.energy.push_back(energy(field_in));
    if (config.store_every > 0) snapshot(0.0);
    for (int s = 1; s <= config.n_z_steps; ++s) {
        try {
            marcher.step(e);
        } catch (const NumericalError& err) {
            std::ostringstream msg;
            msg << err.what() << " (z step " << s << " of " << config.n_z_steps << ")";
            throw NumericalError(msg.str());
        }
        const double z = s * marcher.step_length();
        result.energy_z.push_back(z);
        result.energy.push_back(energy(field::FieldGrid{field_in.t0, field_in.dt, e, field_in.carrier_omega}));
        if (config.store_every > 0 && (s % config.store_every == 0 || s == config.n_z_steps)) snapshot(z);
    }
    result.field_out = {field_in.t0, field_in.dt, std::move(e), field_in.carrier_omega};
    result.max_physicality_excess = marcher.max_excess();
    if (medium.atomic_density > 0.0) {
        result.atom_final =
            integrate_bloch(result.field_out, medium.atom, medium.atomic_density, config.bloch).state;
    } else {
        result.atom_final.rho_ba.assign(result.field_out.size(), cplx{});
        result.atom_final.rho_d.assign(result.field_out.size(), 1.0);
    }
    return result;
}

}  // namespace

PropagationResult propagate(const field::FieldGrid& field_in, const medium::IndexTrace& index,
                            const medium::MediumSpec& medium, const PropagationConfig& config) {
    config.validate();
    medium.validate();
    if (field_in.size() < 4) throw ConfigError("field grid needs at least 4 samples");
    const double tol = 1e-6 * field_in.dt;
    if (index.n_values.size() != field_in.size() || std::abs(index.t0 - field_in.t0) > tol ||
        std::abs(index.dt - field_in.dt) > 1e-9 * field_in.dt) {
        throw ConfigError("index trace and field must share the same tau grid");
    }
    if (!(field_in.carrier_omega > 0.0)) throw ConfigError("field carries no carrier frequency");

    // RK4 is stable on the imaginary axis up to 2 sqrt(2), and the advection
    // eigenvalues reach band * w0 * max|n - n0| / c. The resonant atomic
    // source acts like (2 pi / c) w_ba N mu^2 times an integral over the
    // coherence memory min(grid span, T2); transient growth sets in near
    // h * stiffness = 6 for that term, so it is held below 4.
    const double h = config.length / config.n_z_steps;
    auto check_stiffness = [&](double stiffness, double limit, const char* term) {
        if (stiffness * h > limit) {
            std::ostringstream msg;
            msg << "z step exceeds the stability limit of the " << term << " term; use at least "
                << static_cast<long>(std::ceil(stiffness * config.length / limit)) << " z steps";
            throw NumericalError(msg.str());
        }
    };
    double max_dn = 0.0;
    for (double n : index.n_values) max_dn = std::max(max_dn, std::abs(n - index.n0));
    check_stiffness(config.derivative_band * field_in.carrier_omega * max_dn / units::speed_of_light,
                    2.0 * std::numbers::sqrt2, "index");
    double memory = field_in.dt * static_cast<double>(field_in.size() - 1);
    if (medium.atom.coherence_decay() > 0.0) memory = std::min(memory, 1.0 / medium.atom.coherence_decay());
    const auto& atom = medium.atom;
    check_stiffness(units::two_pi / units::speed_of_light * atom.transition_omega * medium.atomic_density *
                        atom.dipole * atom.dipole * memory,
                    4.0, "atomic");

    auto result = march(field_in, index, medium, config);
    if (config.convergence_tolerance > 0.0) {
        PropagationConfig fine = config;
        fine.n_z_steps *= 2;
        fine.store_every = 0;
        fine.convergence_tolerance = 0.0;
        const auto check = march(field_in, index, medium, fine);
        const double e1 = energy(result.field_out);
        const double e2 = energy(check.field_out);
        result.convergence_change = std::abs(e2 - e1) / std::max(e2, std::numeric_limits<double>::min());
        if (result.convergence_change > config.convergence_tolerance) {
            std::ostringstream msg;
            msg << "z march not converged: doubling the steps changed the exit energy by "
                << result.convergence_change << " (tolerance " << config.convergence_tolerance << ")";
            throw NumericalError(msg.str());
        }
    }
    return result;
}

}  // namespace molmem::mb
