#include "qbench/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "qbench/rng.hpp"

namespace qbench {

void TrajectorySpec::validate() const {
    if (!jump_operators || jump_operators->empty())
        throw ValidationError("trajectory spec needs at least one jump operator");
    if (gamma < 0.0) throw ValidationError("error rate gamma must be >= 0");
    if (t_final < 0.0) throw ValidationError("t_final must be >= 0");
    if (!std::is_sorted(sample_times.begin(), sample_times.end()))
        throw ValidationError("sample times must be ascending");
    if (!sample_times.empty() && sample_times.back() > t_final + 1e-12)
        throw ValidationError("sample times must not exceed t_final");
}

namespace {

// Eigenbasis free evolution in place.
void free_evolve(VectorXcd& c, const VectorXd& evals, double dt) {
    if (dt == 0.0) return;
    for (std::int64_t k = 0; k < c.size(); ++k)
        c(k) *= std::exp(Complex(0.0, -evals(k) * dt));
}

// Returns the accepted operator index and redraw count.
std::pair<int, int> apply_jump(VectorXcd& config_state, const std::vector<SparseOperator>& ops,
                               Unraveling mode, Rng& rng) {
    const int n_ops = static_cast<int>(ops.size());
    if (mode == Unraveling::norm_weighted) {
        std::vector<double> w(n_ops);
        double total = 0.0;
        std::vector<VectorXcd> jumped(n_ops);
        for (int k = 0; k < n_ops; ++k) {
            jumped[k] = ops[k].apply(config_state);
            w[k] = jumped[k].squaredNorm();
            total += w[k];
        }
        if (total <= 0.0) throw ComputeError("all jump operators annihilate the state");
        double u = rng.uniform() * total;
        int pick = n_ops - 1;
        for (int k = 0; k < n_ops; ++k) {
            if (u < w[k]) { pick = k; break; }
            u -= w[k];
        }
        config_state = jumped[pick] / std::sqrt(w[pick]);
        return {pick, 0};
    }
    int redraws = 0;
    for (;;) {
        const int pick = static_cast<int>(rng.uniform_index(n_ops));
        VectorXcd jumped = ops[pick].apply(config_state);
        const double nrm = jumped.norm();
        if (nrm > 1e-14) {
            config_state = jumped / nrm;
            return {pick, redraws};
        }
        if (++redraws > 64 * n_ops)
            throw ComputeError("uniform-poisson jump: no operator acts nontrivially");
    }
}

} // namespace

TrajectoryResult simulate_trajectory(const SpectralData* sd, const SparseOperator* hamiltonian,
                                     const QuantumState& psi0, const TrajectorySpec& spec) {
    spec.validate();
    if (!sd && !hamiltonian)
        throw ValidationError("simulate_trajectory needs spectral data or a Hamiltonian");
    const auto& ops = *spec.jump_operators;
    const double rate = spec.total_rate();
    Rng rng(spec.seed);

    TrajectoryResult result;
    result.states.reserve(spec.sample_times.size());

    // Eigenbasis coefficients when exact propagation is available.
    VectorXcd c = sd ? sd->eigenbasis_overlaps(psi0.amplitudes) : psi0.amplitudes;
    VectorXcd ideal = c;
    double now = psi0.time;

    auto to_config = [&](const VectorXcd& v) {
        return sd ? sd->to_configuration_basis(v) : v;
    };
    auto advance = [&](VectorXcd& v, double from, double to) {
        if (to == from) return;
        if (sd) {
            free_evolve(v, sd->eigenvalues(), to - from);
        } else {
            QuantumState tmp{std::move(v), from, psi0.basis};
            tmp = evolve_krylov(*hamiltonian, tmp, to, spec.krylov_tol);
            v = std::move(tmp.amplitudes);
        }
    };

    double next_jump = rate > 0.0 ? now + rng.exponential(rate)
                                  : std::numeric_limits<double>::infinity();
    std::size_t si = 0;
    while (si < spec.sample_times.size() || next_jump <= spec.t_final) {
        const double next_sample =
            si < spec.sample_times.size() ? spec.sample_times[si]
                                          : std::numeric_limits<double>::infinity();
        if (next_jump <= spec.t_final && next_jump < next_sample) {
            advance(c, now, next_jump);
            advance(ideal, now, next_jump);
            now = next_jump;
            VectorXcd cfg = to_config(c);
            auto [pick, redraws] = apply_jump(cfg, ops, spec.unraveling, rng);
            c = sd ? sd->eigenbasis_overlaps(cfg) : cfg;
            result.jump_log.push_back({now, pick, redraws});
            next_jump = now + rng.exponential(rate);
        } else {
            if (si >= spec.sample_times.size()) break;
            advance(c, now, next_sample);
            advance(ideal, now, next_sample);
            now = next_sample;
            VectorXcd cfg = to_config(c);
            result.states.push_back(QuantumState{cfg, now, psi0.basis});
            result.ideal_overlap.push_back(std::norm((ideal.adjoint() * c).value()));
            ++si;
        }
    }
    return result;
}

QuantumState single_error_state(const SpectralData& sd, const QuantumState& psi0,
                                const SparseOperator& error_op, double t_err, double t) {
    if (t < t_err) throw ValidationError("single_error_state requires t >= t_err");
    QuantumState at_err = evolve_exact(sd, psi0, t_err);
    VectorXcd kicked = error_op.apply(at_err.amplitudes);
    const double nrm = kicked.norm();
    if (nrm < 1e-14) throw ComputeError("error operator annihilates the state at t_err");
    kicked /= nrm;
    QuantumState out{std::move(kicked), t_err, psi0.basis};
    return evolve_exact(sd, out, t);
}

OutcomeDistribution ensemble_distribution(const std::vector<TrajectoryResult>& results,
                                          std::size_t time_index) {
    if (results.empty()) throw ValidationError("ensemble_distribution: empty ensemble");
    VectorXd q = VectorXd::Zero(results.front().states.at(time_index).dimension());
    for (const auto& r : results) q += r.states.at(time_index).amplitudes.cwiseAbs2();
    OutcomeDistribution out;
    out.values = q / static_cast<double>(results.size());
    out.time = results.front().states.at(time_index).time;
    out.kind = DistributionKind::instantaneous;
    return out;
}

std::vector<double> ensemble_fidelity(const std::vector<TrajectoryResult>& results) {
    if (results.empty()) throw ValidationError("ensemble_fidelity: empty ensemble");
    const std::size_t n_times = results.front().ideal_overlap.size();
    std::vector<double> f(n_times, 0.0);
    for (const auto& r : results) {
        if (r.ideal_overlap.size() != n_times)
            throw ValidationError("ensemble_fidelity: mismatched sample times");
        for (std::size_t i = 0; i < n_times; ++i) f[i] += r.ideal_overlap[i];
    }
    for (auto& v : f) v /= static_cast<double>(results.size());
    return f;
}

EnsembleResult run_trajectory_ensemble(const SpectralData& sd, const QuantumState& psi0,
                                       const TrajectorySpec& spec, std::int64_t n_trajectories) {
    spec.validate();
    if (n_trajectories < 1) throw ValidationError("need at least one trajectory");
    const auto n_times = spec.sample_times.size();
    EnsembleResult out;
    out.sample_times = spec.sample_times;
    out.q = MatrixXd::Zero(sd.dimension(), static_cast<std::int64_t>(n_times));
    out.fidelity.assign(n_times, 0.0);
    out.mean_jumps.assign(n_times, 0.0);
    out.n_trajectories = n_trajectories;

    for (std::int64_t k = 0; k < n_trajectories; ++k) {
        TrajectorySpec sub = spec;
        sub.seed = Rng::substream(spec.seed, static_cast<std::uint64_t>(k));
        const TrajectoryResult r = simulate_trajectory(&sd, nullptr, psi0, sub);
        if (r.jump_log.empty()) ++out.zero_jump_trajectories;
        for (std::size_t i = 0; i < n_times; ++i) {
            out.q.col(static_cast<std::int64_t>(i)) += r.states[i].amplitudes.cwiseAbs2();
            out.fidelity[i] += r.ideal_overlap[i];
            double jumps_before = 0.0;
            for (const auto& e : r.jump_log)
                if (e.time <= spec.sample_times[i]) jumps_before += 1.0;
            out.mean_jumps[i] += jumps_before;
        }
    }
    const double inv = 1.0 / static_cast<double>(n_trajectories);
    out.q *= inv;
    for (auto& v : out.fidelity) v *= inv;
    for (auto& v : out.mean_jumps) v *= inv;
    return out;
}

} // namespace qbench
