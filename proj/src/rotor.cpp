#include "molmem/rotor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "molmem/errors.hpp"
#include "molmem/units.hpp"

namespace molmem::rotor {

double MoleculeSpec::revival_period() const { return units::pi / rotational_constant; }

void MoleculeSpec::validate() const {
    if (!(rotational_constant > 0.0)) {
        throw ConfigError("molecule '" + name + "': rotational constant must be positive");
    }
    if (!(alpha_perp >= 0.0)) {
        throw ConfigError("molecule '" + name + "': alpha_perp must be non-negative");
    }
    if (!(even_j_weight >= 0.0) || !(odd_j_weight >= 0.0)) {
        throw ConfigError("molecule '" + name + "': spin weights must be non-negative");
    }
    if (even_j_weight == 0.0 && odd_j_weight == 0.0) {
        throw ConfigError("molecule '" + name + "': spin weights are all zero");
    }
}

PulseSpec PulseSpec::from_lab(double center_fs, double sigma_fs, double intensity_w_cm2) {
    PulseSpec p;
    p.center_time = units::fs_to_au(center_fs);
    p.sigma = units::fs_to_au(sigma_fs);
    p.field_amplitude = units::intensity_to_field(intensity_w_cm2);
    return p;
}

double PulseSpec::interaction(double t, double delta_alpha) const {
    if (t <= support_begin() || t >= support_end()) return 0.0;
    const double s = std::sin(units::pi * (t - support_begin()) / (2.0 * sigma));
    return 0.25 * delta_alpha * field_amplitude * field_amplitude * s * s;
}

void PulseSpec::validate() const {
    if (!(sigma > 0.0)) throw ConfigError("pulse duration must be positive");
    if (!(field_amplitude >= 0.0)) throw ConfigError("pulse intensity must be non-negative");
}

double interaction_strength(std::span<const PulseSpec> pulses, double t, double delta_alpha) {
    double u = 0.0;
    for (const auto& p : pulses) u += p.interaction(t, delta_alpha);
    return u;
}

double cos2_diagonal(int j, int m) {
    const double jj = j;
    const double mm = m;
    return 1.0 / 3.0 + (2.0 / 3.0) * (jj * (jj + 1.0) - 3.0 * mm * mm) /
                           ((2.0 * jj - 1.0) * (2.0 * jj + 3.0));
}

double cos2_upper(int j, int m) {
    const double jj = j;
    const double m2 = static_cast<double>(m) * m;
    const double num = ((jj + 1.0) * (jj + 1.0) - m2) * ((jj + 2.0) * (jj + 2.0) - m2);
    const double den = (2.0 * jj + 1.0) * (2.0 * jj + 3.0) * (2.0 * jj + 3.0) * (2.0 * jj + 5.0);
    return std::sqrt(num / den);
}

Cos2Operator::Cos2Operator(int j_max, int m) : j_max_(j_max), m_(m) {
    if (j_max < std::abs(m)) {
        throw ConfigError("cos^2 operator: J_max " + std::to_string(j_max) + " below |M| " +
                          std::to_string(std::abs(m)));
    }
    const int n = j_max - j_min() + 1;
    diag_.resize(n);
    upper_.resize(n);
    for (int k = 0; k < n; ++k) {
        const int j = j_min() + k;
        diag_[k] = cos2_diagonal(j, m);
        upper_[k] = j + 2 <= j_max ? cos2_upper(j, m) : 0.0;
    }
}

double Cos2Operator::upper(int j) const {
    if (j < j_min() || j + 2 > j_max_) return 0.0;
    return upper_[j - j_min()];
}

double Cos2Operator::element(int j, int jp) const {
    if (j < j_min() || jp < j_min() || j > j_max_ || jp > j_max_) return 0.0;
    if (j == jp) return diagonal(j);
    if (jp == j + 2) return upper(j);
    if (j == jp + 2) return upper(jp);
    return 0.0;
}

Cos2Operator build_cos2_operator(int j_max, int m) { return Cos2Operator(j_max, m); }

double RotorState::norm() const {
    double s = 0.0;
    for (const auto& c : coeffs) s += std::norm(c);
    return std::sqrt(s);
}

namespace {

struct Segment {
    double begin;
    double end;
};

std::vector<Segment> interaction_segments(std::span<const PulseSpec> pulses) {
    std::vector<Segment> raw;
    for (const auto& p : pulses) {
        if (p.field_amplitude > 0.0) raw.push_back({p.support_begin(), p.support_end()});
    }
    std::sort(raw.begin(), raw.end(), [](const Segment& a, const Segment& b) { return a.begin < b.begin; });
    std::vector<Segment> merged;
    for (const auto& s : raw) {
        if (!merged.empty() && s.begin < merged.back().end) {
            merged.back().end = std::max(merged.back().end, s.end);
        } else {
            merged.push_back(s);
        }
    }
    return merged;
}

// Where each grid sample falls relative to the interaction segments.
struct SampleLayout {
    // Samples strictly inside segment s, in time order.
    std::vector<std::vector<std::size_t>> inside;
    // Field-free samples of interval i; interval i starts at the end of segment i-1.
    std::vector<std::vector<std::size_t>> free;

    SampleLayout(const std::vector<Segment>& segments, const TimeGrid& grid)
        : inside(segments.size()), free(segments.size() + 1) {
        for (std::size_t k = 0; k < grid.size; ++k) {
            const double t = grid.time(k);
            std::size_t interval = 0;
            bool placed = false;
            for (std::size_t s = 0; s < segments.size(); ++s) {
                if (t > segments[s].begin && t < segments[s].end) {
                    inside[s].push_back(k);
                    placed = true;
                    break;
                }
                if (t >= segments[s].end) interval = s + 1;
            }
            if (!placed) free[interval].push_back(k);
        }
    }
};

// Weighted sum over the block columns of the field-free cos^2 moments:
// the constant diagonal part and one complex amplitude per (J, J+2) pair.
struct FreeMoments {
    double diagonal = 0.0;
    std::vector<cplx> coherence;  // indexed by global J
};

struct BlockOutput {
    std::vector<std::vector<double>> inside_values;  // [segment][sample]
    std::vector<FreeMoments> moments;                // [interval]
    std::vector<cplx> final_coeffs;                  // first column, block basis
    double max_norm_drift = 0.0;
};

class Block {
public:
    Block(int m, int parity, int j_max, const MoleculeSpec& molecule, std::span<const int> initial_j,
          std::span<const double> weights)
        : m_(m), weights_(weights.begin(), weights.end()) {
        j_lo_ = (m % 2 == parity) ? m : m + 1;
        for (int j = j_lo_; j <= j_max; j += 2) {
            energy_.push_back(molecule.rotational_energy(j));
            cdiag_.push_back(cos2_diagonal(j, m));
            cup_.push_back(j + 2 <= j_max ? cos2_upper(j, m) : 0.0);
        }
        const auto n = static_cast<Eigen::Index>(energy_.size());
        const auto cols = static_cast<Eigen::Index>(initial_j.size());
        re_ = Eigen::MatrixXd::Zero(n, cols);
        im_ = Eigen::MatrixXd::Zero(n, cols);
        for (Eigen::Index c = 0; c < cols; ++c) re_(index_of(initial_j[c]), c) = 1.0;
    }

    Eigen::Index size() const { return re_.rows(); }
    Eigen::Index index_of(int j) const { return (j - j_lo_) / 2; }
    int j_of(Eigen::Index k) const { return j_lo_ + 2 * static_cast<int>(k); }

    void free_evolve(double dt) {
        for (Eigen::Index k = 0; k < size(); ++k) {
            const double ph = -energy_[k] * dt;
            const double c = std::cos(ph), s = std::sin(ph);
            for (Eigen::Index col = 0; col < re_.cols(); ++col) {
                const double r = re_(k, col), i = im_(k, col);
                re_(k, col) = c * r - s * i;
                im_(k, col) = s * r + c * i;
            }
        }
    }

    // psi <- exp(-i h (K/2 - w C)) psi
    void exponential(double h, double w) {
        const Eigen::Index n = size();
        Eigen::VectorXd d(n), e(std::max<Eigen::Index>(n - 1, 0));
        for (Eigen::Index k = 0; k < n; ++k) d(k) = 0.5 * energy_[k] - w * cdiag_[k];
        for (Eigen::Index k = 0; k + 1 < n; ++k) e(k) = -w * cup_[k];
        solver_.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
        const Eigen::MatrixXd& v = solver_.eigenvectors();
        const Eigen::VectorXd& lambda = solver_.eigenvalues();
        tr_.noalias() = v.transpose() * re_;
        ti_.noalias() = v.transpose() * im_;
        for (Eigen::Index k = 0; k < n; ++k) {
            const double ph = -lambda(k) * h;
            const double c = std::cos(ph), s = std::sin(ph);
            for (Eigen::Index col = 0; col < re_.cols(); ++col) {
                const double r = tr_(k, col), i = ti_(k, col);
                tr_(k, col) = c * r - s * i;
                ti_(k, col) = s * r + c * i;
            }
        }
        re_.noalias() = v * tr_;
        im_.noalias() = v * ti_;
    }

    // Fourth-order commutator-free Magnus step for H(t) = K - u(t) C.
    template <class Strength>
    void magnus_step(double t, double h, const Strength& u) {
        static const double r3 = std::sqrt(3.0);
        static const double a1 = (3.0 - 2.0 * r3) / 12.0;
        static const double a2 = (3.0 + 2.0 * r3) / 12.0;
        const double u1 = u(t + (0.5 - r3 / 6.0) * h);
        const double u2 = u(t + (0.5 + r3 / 6.0) * h);
        exponential(h, a2 * u1 + a1 * u2);
        exponential(h, a1 * u1 + a2 * u2);
    }

    double expectation() const {
        double total = 0.0;
        for (Eigen::Index col = 0; col < re_.cols(); ++col) {
            double v = 0.0;
            for (Eigen::Index k = 0; k < size(); ++k) {
                v += cdiag_[k] * (re_(k, col) * re_(k, col) + im_(k, col) * im_(k, col));
                if (k + 1 < size()) {
                    v += 2.0 * cup_[k] *
                         (re_(k, col) * re_(k + 1, col) + im_(k, col) * im_(k + 1, col));
                }
            }
            total += weights_[col] * v;
        }
        return total;
    }

    FreeMoments moments(int j_global_max) const {
        FreeMoments out;
        out.coherence.assign(j_global_max + 1, cplx{});
        for (Eigen::Index col = 0; col < re_.cols(); ++col) {
            const double w = weights_[col];
            for (Eigen::Index k = 0; k < size(); ++k) {
                const cplx a(re_(k, col), im_(k, col));
                out.diagonal += w * cdiag_[k] * std::norm(a);
                if (k + 1 < size()) {
                    const cplx b(re_(k + 1, col), im_(k + 1, col));
                    out.coherence[j_of(k)] += w * 2.0 * cup_[k] * std::conj(a) * b;
                }
            }
        }
        return out;
    }

    double max_norm_drift() const {
        double worst = 0.0;
        for (Eigen::Index col = 0; col < re_.cols(); ++col) {
            const double nrm = re_.col(col).squaredNorm() + im_.col(col).squaredNorm();
            worst = std::max(worst, std::abs(nrm - 1.0));
        }
        return worst;
    }

    double top_shell_population() const {
        double worst = 0.0;
        const Eigen::Index n = size();
        for (Eigen::Index col = 0; col < re_.cols(); ++col) {
            double p = 0.0;
            for (Eigen::Index k = std::max<Eigen::Index>(n - 2, 0); k < n; ++k) {
                p += re_(k, col) * re_(k, col) + im_(k, col) * im_(k, col);
            }
            worst = std::max(worst, p);
        }
        return worst;
    }

    std::vector<cplx> column(Eigen::Index col) const {
        std::vector<cplx> out(size());
        for (Eigen::Index k = 0; k < size(); ++k) out[k] = {re_(k, col), im_(k, col)};
        return out;
    }

private:
    int m_;
    int j_lo_ = 0;
    std::vector<double> weights_;
    std::vector<double> energy_, cdiag_, cup_;
    Eigen::MatrixXd re_, im_, tr_, ti_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver_;
};

struct BlockJob {
    int m = 0;
    int parity = 0;
    std::vector<int> initial_j;
    std::vector<double> weights;
};

struct PropagationContext {
    const MoleculeSpec& molecule;
    std::span<const PulseSpec> pulses;
    const TimeGrid& grid;
    const RotorNumerics& numerics;
    std::vector<Segment> segments;
    SampleLayout layout;
    int j_global_max;  // size of the coherence arrays
};

// One attempt at a fixed basis cutoff. Returns false when the top shells
// carry too much population.
bool run_block(const BlockJob& job, int j_max, const PropagationContext& ctx, BlockOutput& out,
               double& top_population) {
    Block block(job.m, job.parity, j_max, ctx.molecule, job.initial_j, job.weights);
    const double delta_alpha = ctx.molecule.delta_alpha;
    auto strength = [&](double t) { return interaction_strength(ctx.pulses, t, delta_alpha); };

    out.inside_values.assign(ctx.segments.size(), {});
    out.moments.assign(ctx.segments.size() + 1, {});
    out.moments[0] = block.moments(ctx.j_global_max);
    out.max_norm_drift = 0.0;
    top_population = 0.0;

    double now = ctx.segments.empty() ? 0.0 : ctx.segments.front().begin;
    for (std::size_t s = 0; s < ctx.segments.size(); ++s) {
        const Segment seg = ctx.segments[s];
        block.free_evolve(seg.begin - now);
        now = seg.begin;

        std::vector<double> targets;
        for (auto k : ctx.layout.inside[s]) targets.push_back(ctx.grid.time(k));
        targets.push_back(seg.end);
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const double span = targets[i] - now;
            const auto n = std::max<long>(1, static_cast<long>(std::ceil(span / ctx.numerics.max_step)));
            const double h = span / static_cast<double>(n);
            for (long step = 0; step < n; ++step) block.magnus_step(now + step * h, h, strength);
            now = targets[i];
            if (i + 1 < targets.size()) out.inside_values[s].push_back(block.expectation());
        }
        out.max_norm_drift = std::max(out.max_norm_drift, block.max_norm_drift());
        top_population = std::max(top_population, block.top_shell_population());
        if (top_population >= ctx.numerics.top_shell_tolerance) return false;
        out.moments[s + 1] = block.moments(ctx.j_global_max);
    }
    if (out.max_norm_drift > ctx.numerics.norm_tolerance) {
        std::ostringstream msg;
        msg << "rotor propagation lost norm: drift " << out.max_norm_drift << " (M=" << job.m << ")";
        throw NumericalError(msg.str());
    }
    out.final_coeffs = block.column(0);
    return true;
}

BlockOutput solve_block(const BlockJob& job, const PropagationContext& ctx) {
    const int j_init = *std::max_element(job.initial_j.begin(), job.initial_j.end());
    int j_max = std::max(j_init, job.m) + ctx.numerics.basis_margin;
    BlockOutput out;
    while (true) {
        double top = 0.0;
        if (run_block(job, j_max, ctx, out, top)) return out;
        j_max += ctx.numerics.basis_increment;
        if (j_max > ctx.numerics.basis_cap) {
            std::ostringstream msg;
            msg << "rotor basis did not converge below J_max=" << ctx.numerics.basis_cap
                << ": top-shell population " << top << " (M=" << job.m << ")";
            throw NumericalError(msg.str());
        }
    }
}

std::vector<BlockOutput> solve_blocks(const std::vector<BlockJob>& jobs, const PropagationContext& ctx) {
    std::vector<BlockOutput> results(jobs.size());
    const int threads = std::max(1, std::min<int>(ctx.numerics.threads, static_cast<int>(jobs.size())));
    if (threads == 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = solve_block(jobs[i], ctx);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < jobs.size(); i = next++) results[i] = solve_block(jobs[i], ctx);
            } catch (...) {
                errors[w] = std::current_exception();
                next = jobs.size();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

// Reduce the block outputs (in job order) into one trace on the grid.
std::vector<double> assemble_trace(const std::vector<BlockOutput>& blocks, const PropagationContext& ctx) {
    std::vector<double> values(ctx.grid.size, 0.0);
    const std::size_t n_intervals = ctx.segments.size() + 1;
    std::vector<FreeMoments> total(n_intervals);
    for (auto& t : total) t.coherence.assign(ctx.j_global_max + 1, cplx{});

    for (const auto& b : blocks) {
        for (std::size_t s = 0; s < ctx.segments.size(); ++s) {
            const auto& idx = ctx.layout.inside[s];
            for (std::size_t i = 0; i < idx.size(); ++i) values[idx[i]] += b.inside_values[s][i];
        }
        for (std::size_t i = 0; i < n_intervals; ++i) {
            total[i].diagonal += b.moments[i].diagonal;
            for (int j = 0; j <= ctx.j_global_max; ++j) total[i].coherence[j] += b.moments[i].coherence[j];
        }
    }

    const double b0 = ctx.molecule.rotational_constant;
    for (std::size_t i = 0; i < n_intervals; ++i) {
        const double t_ref = i == 0 ? 0.0 : ctx.segments[i - 1].end;
        std::vector<std::pair<double, cplx>> terms;
        for (int j = 0; j <= ctx.j_global_max; ++j) {
            if (total[i].coherence[j] != cplx{}) terms.emplace_back(b0 * (4.0 * j + 6.0), total[i].coherence[j]);
        }
        for (auto k : ctx.layout.free[i]) {
            const double dt = ctx.grid.time(k) - t_ref;
            double v = total[i].diagonal;
            for (const auto& [omega, q] : terms) v += (q * std::polar(1.0, -omega * dt)).real();
            values[k] = v;
        }
    }
    return values;
}

PropagationContext make_context(const MoleculeSpec& molecule, std::span<const PulseSpec> pulses,
                                const TimeGrid& grid, const RotorNumerics& numerics) {
    auto segments = interaction_segments(pulses);
    SampleLayout layout(segments, grid);
    return PropagationContext{molecule, pulses, grid, numerics, std::move(segments), std::move(layout),
                              numerics.basis_cap + 2};
}

}  // namespace

SingleStateResult evolve_single(int j0, int m0, std::span<const PulseSpec> pulses, const TimeGrid& grid,
                                const MoleculeSpec& molecule, const RotorNumerics& numerics) {
    molecule.validate();
    for (const auto& p : pulses) p.validate();
    if (j0 < 0 || std::abs(m0) > j0) throw ConfigError("initial state requires 0 <= |M| <= J");

    const auto ctx = make_context(molecule, pulses, grid, numerics);
    const int m = std::abs(m0);
    BlockJob job{m, j0 % 2, {j0}, {1.0}};
    const auto block = solve_block(job, ctx);

    SingleStateResult result;
    result.cos2 = assemble_trace({block}, ctx);
    result.max_norm_drift = block.max_norm_drift;
    const int j_lo = (m % 2 == j0 % 2) ? m : m + 1;
    const int j_top = j_lo + 2 * (static_cast<int>(block.final_coeffs.size()) - 1);
    result.final_state.m = m0;
    result.final_state.j_max = j_top;
    result.final_state.coeffs.assign(j_top - m + 1, cplx{});
    for (std::size_t k = 0; k < block.final_coeffs.size(); ++k) {
        result.final_state.coeffs[j_lo + 2 * k - m] = block.final_coeffs[k];
    }
    return result;
}

std::vector<ThermalLevel> thermal_levels(const MoleculeSpec& molecule, double temperature_k, double tolerance,
                                         int j_cap) {
    molecule.validate();
    if (!(temperature_k > 0.0)) throw ConfigError("temperature must be positive");
    const double kt = units::kelvin_to_au(temperature_k);

    // Partition function, summed until the Boltzmann tail is negligible.
    std::vector<double> level_pop;
    double z = 0.0;
    for (int j = 0;; ++j) {
        const double boltz = std::exp(-molecule.rotational_energy(j) / kt);
        const double p = molecule.spin_weight(j) * (2.0 * j + 1.0) * boltz;
        level_pop.push_back(p);
        z += p;
        if (molecule.rotational_energy(j) / kt > 60.0 || j > 100000) break;
    }

    std::vector<ThermalLevel> kept;
    double covered = 0.0;
    for (int j = 0; j < static_cast<int>(level_pop.size()); ++j) {
        if (covered >= 1.0 - tolerance) break;
        if (j > j_cap) {
            std::ostringstream msg;
            msg << "thermal truncation needs J > " << j_cap << " (omitted population " << 1.0 - covered << ")";
            throw NumericalError(msg.str());
        }
        covered += level_pop[j] / z;
        if (level_pop[j] > 0.0) kept.push_back({j, level_pop[j] / (2.0 * j + 1.0)});
    }
    double kept_total = 0.0;
    for (const auto& l : kept) kept_total += l.weight * (2.0 * l.j + 1.0);
    for (auto& l : kept) l.weight /= kept_total;
    return kept;
}

AlignmentTrace thermal_alignment(const MoleculeSpec& molecule, std::span<const PulseSpec> pulses,
                                 double temperature_k, const TimeGrid& grid, const RotorNumerics& numerics) {
    for (const auto& p : pulses) p.validate();
    const auto levels = thermal_levels(molecule, temperature_k, numerics.thermal_tolerance, numerics.basis_cap);
    const auto ctx = make_context(molecule, pulses, grid, numerics);

    // One job per (M >= 0, parity); +M and -M share a block with doubled weight.
    std::vector<BlockJob> jobs;
    const int j_top = levels.back().j;
    for (int m = 0; m <= j_top; ++m) {
        for (int parity = 0; parity < 2; ++parity) {
            BlockJob job{m, parity, {}, {}};
            for (const auto& l : levels) {
                if (l.j >= m && l.j % 2 == parity) {
                    job.initial_j.push_back(l.j);
                    job.weights.push_back(m == 0 ? l.weight : 2.0 * l.weight);
                }
            }
            if (!job.initial_j.empty()) jobs.push_back(std::move(job));
        }
    }

    AlignmentTrace trace;
    trace.t0 = grid.t0;
    trace.dt = grid.dt;
    trace.temperature = temperature_k;
    trace.values = assemble_trace(solve_blocks(jobs, ctx), ctx);
    return trace;
}

}  // namespace molmem::rotor
