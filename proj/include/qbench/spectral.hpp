#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "qbench/operators.hpp"
#include "qbench/types.hpp"

namespace qbench {

struct QuantumState {
    VectorXcd amplitudes;
    double time = 0.0;
    const Basis* basis = nullptr;

    std::int64_t dimension() const { return amplitudes.size(); }
    double norm() const { return amplitudes.norm(); }

    static QuantumState basis_state(const Basis& basis, std::int64_t index, double time = 0.0);
    static QuantumState from_amplitudes(VectorXcd amps, double time = 0.0,
                                        const Basis* basis = nullptr);
};

enum class DistributionKind { instantaneous, time_averaged, rescaled };

struct OutcomeDistribution {
    VectorXd values;
    double time = 0.0;
    DistributionKind kind = DistributionKind::instantaneous;

    double sum() const { return values.sum(); }
};

// Full eigensystem of a real-symmetric Hamiltonian in the configuration
// basis, with eigenvalues grouped into degenerate clusters. The overlap
// table <z|E> is stored as a dense real matrix (column E).
class SpectralData {
  public:
    const VectorXd& eigenvalues() const { return evals_; }
    const MatrixXd& eigenvectors() const { return evecs_; }
    std::int64_t dimension() const { return evals_.size(); }
    double degeneracy_tolerance() const { return eps_deg_; }

    // Half-open index ranges [begin, end) of equal eigenvalues.
    const std::vector<std::pair<int, int>>& degeneracy_groups() const { return groups_; }
    std::int64_t group_count() const { return static_cast<std::int64_t>(groups_.size()); }

    // <E|psi> for every eigenstate.
    VectorXcd eigenbasis_overlaps(const VectorXcd& psi) const;
    VectorXcd to_configuration_basis(const VectorXcd& eigen_coeffs) const;

    double spectral_width() const { return evals_.size() ? evals_(evals_.size() - 1) - evals_(0) : 0.0; }

    static SpectralData from_eigensystem(VectorXd evals, MatrixXd evecs, double eps_deg_rel);

  private:
    VectorXd evals_;
    MatrixXd evecs_;
    std::vector<std::pair<int, int>> groups_;
    double eps_deg_ = 0.0;
};

// Dense full diagonalization. Refuses dimensions above `dense_threshold`
// (callers should switch to the Krylov propagator instead of silently
// degrading). eps_deg_rel scales the spectral width to the degeneracy gap.
SpectralData diagonalize(const SparseOperator& hamiltonian, double eps_deg_rel = 1e-9,
                         std::int64_t dense_threshold = 20000);

QuantumState evolve_exact(const SpectralData& sd, const QuantumState& psi0, double t);

// Column j holds the configuration-basis amplitudes of exp(-iH t_j)|psi0>.
MatrixXcd evolve_exact_batch(const SpectralData& sd, const QuantumState& psi0,
                             const std::vector<double>& times);

OutcomeDistribution outcome_distribution(const QuantumState& psi);

// p_avg(z) = sum over degeneracy groups g of |<z|P_g|psi0>|^2.
OutcomeDistribution time_averaged_distribution(const SpectralData& sd, const QuantumState& psi0);

OutcomeDistribution finite_time_average(const SpectralData& sd, const QuantumState& psi0,
                                        double T, double dt);

struct RescaledDistribution {
    OutcomeDistribution p_tilde;
    double normalization = 0.0; // Z = sum_z p_avg p_tilde^2
};

RescaledDistribution rescale(const OutcomeDistribution& p, const OutcomeDistribution& p_avg);

// tr(rho_d^2) = sum_g |P_g psi0|^4.
double diagonal_ensemble_purity(const SpectralData& sd, const QuantumState& psi0);

} // namespace qbench
