#pragma once

#include <cstdint>
#include <vector>

#include "qbench/krylov.hpp"
#include "qbench/spectral.hpp"

namespace qbench {

enum class Unraveling { uniform_poisson, norm_weighted };

enum class RateConvention { total, per_operator };

struct TrajectorySpec {
    const std::vector<SparseOperator>* jump_operators = nullptr;
    double gamma = 0.0; // total rate by default (paper convention)
    RateConvention rate_convention = RateConvention::total;
    double t_final = 0.0;
    std::vector<double> sample_times;
    std::uint64_t seed = 0;
    Unraveling unraveling = Unraveling::uniform_poisson;
    double krylov_tol = 1e-9;

    double total_rate() const {
        const auto n = jump_operators ? jump_operators->size() : 0;
        return rate_convention == RateConvention::total ? gamma
                                                        : gamma * static_cast<double>(n);
    }
    void validate() const;
};

struct JumpEvent {
    double time = 0.0;
    int operator_index = -1;
    int redraws = 0; // zero-norm redraws before this operator was accepted
};

struct TrajectoryResult {
    std::vector<QuantumState> states;     // one per sample time
    std::vector<JumpEvent> jump_log;
    std::vector<double> ideal_overlap;    // |<Psi_ideal(t)|psi(t)>|^2 per sample time
};

// A single stochastic pure-state trajectory. Propagation between jumps uses
// the spectral cache when given, the Krylov propagator otherwise.
TrajectoryResult simulate_trajectory(const SpectralData* sd, const SparseOperator* hamiltonian,
                                     const QuantumState& psi0, const TrajectorySpec& spec);

// exp(-iH(t-t_err)) V exp(-iH t_err) |psi0>, normalised after V.
QuantumState single_error_state(const SpectralData& sd, const QuantumState& psi0,
                                const SparseOperator& error_op, double t_err, double t);

OutcomeDistribution ensemble_distribution(const std::vector<TrajectoryResult>& results,
                                          std::size_t time_index);

std::vector<double> ensemble_fidelity(const std::vector<TrajectoryResult>& results);

// Streaming ensemble driver: accumulates q(z,t), F(t) and diagnostics
// without retaining per-trajectory states.
struct EnsembleResult {
    std::vector<double> sample_times;
    MatrixXd q;                 // D x n_times mixed-state distribution
    std::vector<double> fidelity;
    std::vector<double> mean_jumps;
    std::int64_t zero_jump_trajectories = 0;
    std::int64_t n_trajectories = 0;
};

EnsembleResult run_trajectory_ensemble(const SpectralData& sd, const QuantumState& psi0,
                                       const TrajectorySpec& spec, std::int64_t n_trajectories);

} // namespace qbench
