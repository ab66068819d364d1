#pragma once

#include <cstdint>

#include "qbench/types.hpp"

namespace qbench {

// Static random-MPS toy model for short-quench estimator analysis.
// Error support is the contiguous site window [k, k+N_A-1] (1-based).
struct MpsModelParams {
    int local_dim = 2;   // d
    int bond_dim = 2;    // chi
    int sites = 8;       // N
    int error_support = 2; // N_A
    int error_offset = 1;  // k
    double theta = 0.0;    // error strength in V = W exp(i theta X) W^T*

    std::int64_t error_dim() const; // D_A = d^N_A
    Complex trace_v() const;        // tr exp(i theta X) with X = |0><0| on A
    double mean_fidelity() const;   // (|tr V|^2 - 1)/(D_A^2 - 1)
    void validate() const;
};

struct MpsPartitionFunctions {
    double f_xi_closed = 0.0; // 2 chi/(chi+1) ((chi d + d)/(chi d + 1))^N
    double f_xi_chain = 0.0;  // transfer-matrix evaluation of the same sum
    double f_xs = 0.0;        // error-locked chain
    double ratio = 0.0;       // f_xs / (D_A f_xi)
};

MpsPartitionFunctions mps_partition_functions(const MpsModelParams& params);

struct MpsCrossoverPrediction {
    double mean_fidelity = 0.0;          // the F entering the prediction
    double f_xeb_plus_one = 0.0;         // f_XI F + (f_XS/D_A)(1 - F)
    double f_xeb_plus_one_asymptotic = 0.0; // f_XI (F + exp[-(d-1)/d N_A/chi](1-F)/2)
    double f_id_plus_one = 0.0;          // f_XI
    bool f_e_regime = false;             // chi << N_A: F_e valid
    bool f_d_regime = false;             // chi >> N_A: F_d valid
};

MpsCrossoverPrediction mps_crossover_prediction(const MpsModelParams& params,
                                                double mean_fidelity);

struct MpsMonteCarloResult {
    std::int64_t n_samples = 0;
    // Sample means with standard errors. F_XEB/F_id are the chi-scaled raw
    // second moments matched to the partition-function normalisation
    // (p(z) = chi |psi(z)|^2, unit mean over disorder).
    double f_xeb_plus_one = 0.0, f_xeb_plus_one_se = 0.0;
    double f_id_plus_one = 0.0, f_id_plus_one_se = 0.0;
    double fidelity = 0.0, fidelity_se = 0.0; // normalised |<psi|V psi>|^2 / |psi|^4
    double purity_a = 0.0, purity_a_se = 0.0; // tr(rho_A^2) of the normalised state
};

// Samples random MPS states (Haar chi*d x chi*d unitary per site, aux legs
// contracted to |0>), applies V = W exp(i theta X) W^dagger with Haar W on
// the error window, and evaluates the estimator moments exactly on the
// dense state. Refuses d^N > 2^14.
MpsMonteCarloResult mps_monte_carlo(const MpsModelParams& params, std::int64_t n_samples,
                                    std::uint64_t seed);

} // namespace qbench
