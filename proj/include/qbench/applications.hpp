#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qbench/estimators.hpp"
#include "qbench/spectral.hpp"

namespace qbench {

struct ParameterInterval {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    int grid_points = 21;
};

// Forward model over named parameters theta -> Hamiltonian.
struct ParameterSpace {
    std::vector<ParameterInterval> parameters;
    std::function<SparseOperator(const std::vector<double>&)> build;

    void validate() const;
};

struct GreedyFitOptions {
    double tol_conv = 1e-3; // stop when a sweep improves F_d_hat by less
    int max_sweeps = 10;
    int golden_iterations = 24;
    int multi_starts = 1;
    double eps_deg_rel = 1e-9;
};

struct GreedyFitResult {
    std::vector<double> theta;
    std::vector<double> uncertainty; // curvature-based, sqrt(delta_stat / |d2F/dtheta2|)
    double f_hat = 0.0;
    double delta_stat = 0.0;
    std::vector<double> trace; // accepted F_d_hat after each 1D maximisation
    int sweeps = 0;
};

struct TimedRecord {
    MeasurementRecord record;
    double time = 0.0;
};

// Coordinate-wise maximisation of F_d_hat over the parameter grid in a
// random permutation order per sweep, with golden-section refinement.
GreedyFitResult greedy_fit(const MeasurementRecord& record, const ParameterSpace& space,
                           const QuantumState& psi0, double t, std::uint64_t seed,
                           const GreedyFitOptions& options = {});

// Multi-time variant: the objective is the mean of F_d_hat over the quench
// times of the snapshot batches. Splitting the measurement budget over a
// few times averages the single-time temporal speckle out of the objective,
// which otherwise displaces the maximum at desk-scale D_beta.
GreedyFitResult greedy_fit(const std::vector<TimedRecord>& records, const ParameterSpace& space,
                           const QuantumState& psi0, std::uint64_t seed,
                           const GreedyFitOptions& options = {});

// F_d_hat for a record against the quench defined by (H, psi0, t).
EstimateReport evaluate_forward(const SparseOperator& hamiltonian, const QuantumState& psi0,
                                double t, const MeasurementRecord& record,
                                double eps_deg_rel = 1e-9);

// Mean F_d_hat over several timed records under one Hamiltonian.
EstimateReport evaluate_forward(const SparseOperator& hamiltonian, const QuantumState& psi0,
                                const std::vector<TimedRecord>& records,
                                double eps_deg_rel = 1e-9);

struct ScanPoint {
    double theta = 0.0;
    double f_hat = 0.0;
    double delta_stat = 0.0;
    double fidelity = 0.0; // exact truth channel
};

// Target-state scan: fixed quench Hamiltonian, state family psi(theta).
// The prepared state is psi(theta_star); its quenched distribution is
// sampled M times and compared against each target's references.
std::vector<ScanPoint> state_family_scan(const SpectralData& sd,
                                         const std::function<QuantumState(double)>& family,
                                         double theta_star,
                                         const std::vector<double>& theta_grid, std::int64_t M,
                                         double t, std::uint64_t seed);

// Ground-state scan: prepared state is the ground state of build(theta_star);
// targets are ground states of build(theta); all states quenched by
// quench_hamiltonian before measuring.
std::vector<ScanPoint> ground_state_scan(const SparseOperator& quench_hamiltonian,
                                         const std::function<SparseOperator(double)>& build,
                                         double theta_star,
                                         const std::vector<double>& theta_grid, std::int64_t M,
                                         double t, std::uint64_t seed,
                                         double eps_deg_rel = 1e-9);

struct TemperatureScanPoint {
    double temperature = 0.0;
    double fidelity_exact = 0.0; // exp(-E0/T)/Z(T)
    double f_d_value = 0.0;
    double f_e_value = 0.0;
};

// Boltzmann states of prep_hamiltonian against its ground state, both
// quenched by quench_hamiltonian; the Boltzmann state is an exact
// eigenstate-weighted mixture.
std::vector<TemperatureScanPoint> temperature_scan(const SparseOperator& prep_hamiltonian,
                                                   const SparseOperator& quench_hamiltonian,
                                                   const std::vector<double>& temperatures,
                                                   double t, double eps_deg_rel = 1e-9);

QuantumState ground_state(const SparseOperator& hamiltonian);

} // namespace qbench
