#include "qbench/spectral.hpp"

#include <cmath>

#include <lapacke.h>

namespace qbench {

QuantumState QuantumState::basis_state(const Basis& basis, std::int64_t index, double time) {
    if (index < 0 || index >= basis.dimension())
        throw ValidationError("basis state index out of range");
    VectorXcd amps = VectorXcd::Zero(basis.dimension());
    amps(index) = Complex(1.0, 0.0);
    return QuantumState{std::move(amps), time, &basis};
}

QuantumState QuantumState::from_amplitudes(VectorXcd amps, double time, const Basis* basis) {
    return QuantumState{std::move(amps), time, basis};
}

SpectralData SpectralData::from_eigensystem(VectorXd evals, MatrixXd evecs, double eps_deg_rel) {
    SpectralData sd;
    sd.evals_ = std::move(evals);
    sd.evecs_ = std::move(evecs);
    const std::int64_t d = sd.evals_.size();
    const double width = d ? sd.evals_(d - 1) - sd.evals_(0) : 0.0;
    sd.eps_deg_ = eps_deg_rel * std::max(width, 1e-300);
    int begin = 0;
    for (int i = 1; i <= d; ++i) {
        if (i == d || sd.evals_(i) - sd.evals_(i - 1) > sd.eps_deg_) {
            sd.groups_.emplace_back(begin, i);
            begin = i;
        }
    }
    return sd;
}

VectorXcd SpectralData::eigenbasis_overlaps(const VectorXcd& psi) const {
    const VectorXd re = evecs_.transpose() * psi.real();
    const VectorXd im = evecs_.transpose() * psi.imag();
    VectorXcd out(re.size());
    out.real() = re;
    out.imag() = im;
    return out;
}

VectorXcd SpectralData::to_configuration_basis(const VectorXcd& eigen_coeffs) const {
    const VectorXd re = evecs_ * eigen_coeffs.real();
    const VectorXd im = evecs_ * eigen_coeffs.imag();
    VectorXcd out(re.size());
    out.real() = re;
    out.imag() = im;
    return out;
}

SpectralData diagonalize(const SparseOperator& hamiltonian, double eps_deg_rel,
                         std::int64_t dense_threshold) {
    const std::int64_t d = hamiltonian.dimension();
    if (d > dense_threshold)
        throw ComputeError("dimension " + std::to_string(d) + " exceeds the dense threshold " +
                           std::to_string(dense_threshold) +
                           "; use evolve_krylov / finite-time averages instead");
    if (hamiltonian.hermiticity_violation() > 1e-10)
        throw ValidationError("diagonalize requires a Hermitian operator");
    if (!hamiltonian.is_real(1e-12))
        throw ValidationError("diagonalize supports real-symmetric operators only; "
                              "all bundled models are real in the configuration basis");

    MatrixXd a = hamiltonian.to_dense_real();
    VectorXd w(d);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(d),
                                           a.data(), static_cast<lapack_int>(d), w.data());
    if (info != 0) throw ComputeError("dsyevd failed with info=" + std::to_string(info));
    return SpectralData::from_eigensystem(std::move(w), std::move(a), eps_deg_rel);
}

QuantumState evolve_exact(const SpectralData& sd, const QuantumState& psi0, double t) {
    if (psi0.dimension() != sd.dimension())
        throw ValidationError("state and spectral data dimensions differ");
    VectorXcd c = sd.eigenbasis_overlaps(psi0.amplitudes);
    const double dt = t - psi0.time;
    for (std::int64_t k = 0; k < c.size(); ++k)
        c(k) *= std::exp(Complex(0.0, -sd.eigenvalues()(k) * dt));
    return QuantumState{sd.to_configuration_basis(c), t, psi0.basis};
}

MatrixXcd evolve_exact_batch(const SpectralData& sd, const QuantumState& psi0,
                             const std::vector<double>& times) {
    if (psi0.dimension() != sd.dimension())
        throw ValidationError("state and spectral data dimensions differ");
    const VectorXcd b = sd.eigenbasis_overlaps(psi0.amplitudes);
    const std::int64_t d = sd.dimension();
    const std::int64_t n = static_cast<std::int64_t>(times.size());
    MatrixXcd coeffs(d, n);
    for (std::int64_t j = 0; j < n; ++j) {
        const double dt = times[j] - psi0.time;
        for (std::int64_t k = 0; k < d; ++k)
            coeffs(k, j) = b(k) * std::exp(Complex(0.0, -sd.eigenvalues()(k) * dt));
    }
    const MatrixXd re = sd.eigenvectors() * coeffs.real();
    const MatrixXd im = sd.eigenvectors() * coeffs.imag();
    MatrixXcd out(d, n);
    out.real() = re;
    out.imag() = im;
    return out;
}

OutcomeDistribution outcome_distribution(const QuantumState& psi) {
    OutcomeDistribution p;
    p.values = psi.amplitudes.cwiseAbs2();
    p.time = psi.time;
    p.kind = DistributionKind::instantaneous;
    return p;
}

OutcomeDistribution time_averaged_distribution(const SpectralData& sd, const QuantumState& psi0) {
    const VectorXcd b = sd.eigenbasis_overlaps(psi0.amplitudes);
    VectorXd pavg = VectorXd::Zero(sd.dimension());
    VectorXcd proj(sd.dimension());
    for (const auto& [begin, end] : sd.degeneracy_groups()) {
        if (end - begin == 1) {
            pavg += sd.eigenvectors().col(begin).cwiseAbs2() * std::norm(b(begin));
        } else {
            proj = sd.eigenvectors().middleCols(begin, end - begin) * b.segment(begin, end - begin);
            pavg += proj.cwiseAbs2();
        }
    }
    OutcomeDistribution out;
    out.values = std::move(pavg);
    out.time = 0.0;
    out.kind = DistributionKind::time_averaged;
    return out;
}

OutcomeDistribution finite_time_average(const SpectralData& sd, const QuantumState& psi0,
                                        double T, double dt) {
    if (T <= 0.0 || dt <= 0.0) throw ValidationError("finite_time_average requires T > 0, dt > 0");
    const auto n_steps = static_cast<std::int64_t>(std::llround(T / dt));
    if (n_steps < 1) throw ValidationError("finite_time_average window shorter than dt");
    VectorXd acc = VectorXd::Zero(sd.dimension());
    double weight_total = 0.0;
    for (std::int64_t k = 0; k <= n_steps; ++k) {
        const double w = (k == 0 || k == n_steps) ? 0.5 : 1.0; // trapezoid
        const QuantumState psi = evolve_exact(sd, psi0, psi0.time + k * dt);
        acc += w * psi.amplitudes.cwiseAbs2();
        weight_total += w;
    }
    OutcomeDistribution out;
    out.values = acc / weight_total;
    out.time = T;
    out.kind = DistributionKind::time_averaged;
    return out;
}

RescaledDistribution rescale(const OutcomeDistribution& p, const OutcomeDistribution& p_avg) {
    if (p.values.size() != p_avg.values.size())
        throw ValidationError("rescale: distribution sizes differ");
    const std::int64_t d = p.values.size();
    VectorXd pt(d);
    for (std::int64_t z = 0; z < d; ++z) {
        if (p_avg.values(z) > 0.0) {
            pt(z) = p.values(z) / p_avg.values(z);
        } else if (p.values(z) <= 1e-14) {
            pt(z) = 0.0; // z outside the accessible space; contributes nothing
        } else {
            throw ComputeError("rescale: p(z) > 0 where p_avg(z) = 0 at index " +
                               std::to_string(z) + "; wrong spectral reference?");
        }
    }
    RescaledDistribution out;
    out.normalization = 0.0;
    for (std::int64_t z = 0; z < d; ++z)
        out.normalization += p_avg.values(z) * pt(z) * pt(z);
    out.p_tilde.values = std::move(pt);
    out.p_tilde.time = p.time;
    out.p_tilde.kind = DistributionKind::rescaled;
    return out;
}

double diagonal_ensemble_purity(const SpectralData& sd, const QuantumState& psi0) {
    const VectorXcd b = sd.eigenbasis_overlaps(psi0.amplitudes);
    double purity = 0.0;
    for (const auto& [begin, end] : sd.degeneracy_groups()) {
        const double w = b.segment(begin, end - begin).squaredNorm();
        purity += w * w;
    }
    return purity;
}

} // namespace qbench
