#include "qbench/krylov.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace qbench {

namespace {

struct LanczosBasis {
    MatrixXcd vectors;   // D x m orthonormal Krylov vectors
    VectorXd alpha;      // m diagonal entries
    VectorXd beta;       // m-1 off-diagonal entries
    double next_beta = 0.0;
    bool breakdown = false;
    int m = 0;
};

LanczosBasis build_lanczos(const SparseOperator& h, const VectorXcd& v0, int max_m,
                           double breakdown_tol) {
    const std::int64_t d = v0.size();
    LanczosBasis lb;
    lb.vectors.resize(d, max_m);
    lb.alpha.resize(max_m);
    lb.beta.resize(std::max(max_m - 1, 0));
    VectorXcd v = v0;
    VectorXcd prev = VectorXcd::Zero(d);
    double beta_prev = 0.0;
    for (int j = 0; j < max_m; ++j) {
        lb.vectors.col(j) = v;
        VectorXcd w = h.apply(v);
        const double a = (v.adjoint() * w).value().real();
        lb.alpha(j) = a;
        w -= a * v + beta_prev * prev;
        // One pass of reorthogonalisation keeps the basis clean for m <= 40.
        w -= lb.vectors.leftCols(j + 1) * (lb.vectors.leftCols(j + 1).adjoint() * w);
        const double b = w.norm();
        lb.m = j + 1;
        if (j + 1 < max_m) {
            if (b < breakdown_tol) {
                lb.breakdown = true;
                lb.next_beta = 0.0;
                return lb;
            }
            lb.beta(j) = b;
        } else {
            lb.next_beta = b;
        }
        prev = v;
        v = w / b;
        beta_prev = b;
    }
    return lb;
}

// exp(-i T dt) e_1 for the tridiagonal Lanczos matrix.
VectorXcd tridiag_expm_e1(const LanczosBasis& lb, double dt) {
    const int m = lb.m;
    MatrixXd t = MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) t(i, i) = lb.alpha(i);
    for (int i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = lb.beta(i);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(t);
    const VectorXd& ev = es.eigenvalues();
    const MatrixXd& u = es.eigenvectors();
    VectorXcd phase(m);
    for (int i = 0; i < m; ++i) phase(i) = std::exp(Complex(0.0, -ev(i) * dt)) * u(0, i);
    VectorXcd out(m);
    const VectorXd re_in = phase.real();
    const VectorXd im_in = phase.imag();
    out.real() = u * re_in;
    out.imag() = u * im_in;
    return out;
}

} // namespace

QuantumState evolve_krylov(const SparseOperator& h, const QuantumState& psi0, double t,
                           double tol, const KrylovOptions& options) {
    if (h.dimension() != psi0.dimension())
        throw ValidationError("operator and state dimensions differ");
    if (h.hermiticity_violation() > 1e-10)
        throw ValidationError("evolve_krylov requires a Hermitian operator");

    const double total = t - psi0.time;
    VectorXcd v = psi0.amplitudes;
    if (total == 0.0) return QuantumState{std::move(v), t, psi0.basis};

    const double direction = total >= 0.0 ? 1.0 : -1.0;
    double remaining = std::abs(total);
    const double norm0 = v.norm();
    if (norm0 == 0.0) throw ValidationError("evolve_krylov: zero initial state");

    int steps = 0;
    while (remaining > 0.0) {
        if (++steps > options.max_steps)
            throw ComputeError("evolve_krylov did not converge within " +
                               std::to_string(options.max_steps) + " steps (tol=" +
                               std::to_string(tol) + ")");
        const double vnorm = v.norm();
        LanczosBasis lb = build_lanczos(h, v / vnorm, options.max_subspace, options.breakdown_tol);

        double dt = remaining;
        if (lb.breakdown) {
            // Invariant subspace reached: the subspace propagation is exact.
            const VectorXcd small = tridiag_expm_e1(lb, direction * dt);
            v = vnorm * (lb.vectors.leftCols(lb.m) * small);
            remaining = 0.0;
            continue;
        }

        // Saad residual estimate beta_{m+1} |[exp(-i dt T) e_1]_m|; halve dt
        // until the step fits its share of the total budget.
        VectorXcd small;
        for (;;) {
            small = tridiag_expm_e1(lb, direction * dt);
            const double err_est = lb.next_beta * std::abs(small(lb.m - 1));
            const double budget = tol * dt / std::abs(total);
            if (err_est <= budget || dt < 1e-12) break;
            dt *= 0.5;
        }
        v = vnorm * (lb.vectors.leftCols(lb.m) * small);
        remaining -= dt;
    }

    // Unitarity guard; drift at tol scale is renormalised away.
    const double drift = std::abs(v.norm() - norm0);
    if (drift > 100 * std::max(tol, 1e-12))
        throw ComputeError("evolve_krylov norm drift " + std::to_string(drift));
    v *= norm0 / v.norm();
    return QuantumState{std::move(v), t, psi0.basis};
}

} // namespace qbench
