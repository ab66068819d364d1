#pragma once

#include "qbench/spectral.hpp"

namespace qbench {

struct KrylovOptions {
    int max_subspace = 40;
    int max_steps = 100000;
    double breakdown_tol = 1e-14;
};

// Adaptive-step Lanczos exponential propagation exp(-iHt)|psi0>.
// Guarantees |psi_out - exp(-iHt)psi0| <= tol (error accumulated over the
// internal steps, estimated per step from the Lanczos residual series).
QuantumState evolve_krylov(const SparseOperator& hamiltonian, const QuantumState& psi0, double t,
                           double tol = 1e-10, const KrylovOptions& options = {});

} // namespace qbench
