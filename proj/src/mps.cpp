#include "qbench/mps.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "qbench/rng.hpp"

namespace qbench {

std::int64_t MpsModelParams::error_dim() const {
    std::int64_t d_a = 1;
    for (int i = 0; i < error_support; ++i) d_a *= local_dim;
    return d_a;
}

Complex MpsModelParams::trace_v() const {
    // X = |0><0| on the error window, so exp(i theta X) has one phased
    // eigenvalue and D_A - 1 unit ones.
    return Complex(static_cast<double>(error_dim() - 1), 0.0) +
           std::exp(Complex(0.0, theta));
}

double MpsModelParams::mean_fidelity() const {
    const double d_a = static_cast<double>(error_dim());
    return (std::norm(trace_v()) - 1.0) / (d_a * d_a - 1.0);
}

void MpsModelParams::validate() const {
    if (local_dim < 2) throw ValidationError("mps: local dimension d must be >= 2");
    if (bond_dim < 1) throw ValidationError("mps: bond dimension chi must be >= 1");
    if (sites < 1 || sites > 256) throw ValidationError("mps: sites must be in [1, 256]");
    if (error_support < 1 || error_support > sites)
        throw ValidationError("mps: error support N_A must be in [1, N]");
    if (error_support * std::log2(double(local_dim)) > 62.0)
        throw ValidationError("mps: d^N_A exceeds the 64-bit range");
    if (error_offset < 1 || error_offset > sites - error_support + 1)
        throw ValidationError("mps: error offset k must be in [1, N - N_A + 1]");
    if (bond_dim * local_dim < 2)
        throw ValidationError("mps: chi*d = 1 gives degenerate transfer denominators");
}

namespace {

using Mat2 = Eigen::Matrix2d;
using Row2 = Eigen::RowVector2d;
using Col2 = Eigen::Vector2d;

// Exact Weingarten transfer chain for the disorder average of the two-copy
// overlap sums. Per site the pairing weight is d * Wg(sigma tau^-1, chi d),
// with an extra physical factor d on the identity pairing inside the error
// window (the window's second copy carries independently summed outcomes).
// Bonds contribute chi^2 on equal pairings and chi otherwise. Outside the
// window this reduces to the ferromagnetic transfer matrix
// T_0 = d B W; inside it is the field-locked T_1 conjugate.
double weingarten_chain(const MpsModelParams& p, bool with_error_window) {
    const double d = p.local_dim, chi = p.bond_dim;
    const double n = chi * d;
    Mat2 w;
    w << 1.0, -1.0 / n, -1.0 / n, 1.0;
    w *= d / (n * n - 1.0);
    Mat2 b;
    b << chi * chi, chi, chi, chi * chi;
    const Mat2 scale_a = Eigen::Vector2d(d, 1.0).asDiagonal();

    auto in_window = [&](int site) { // 1-based
        return with_error_window && site >= p.error_offset &&
               site < p.error_offset + p.error_support;
    };

    Row2 acc = Row2::Ones();
    acc = acc * (in_window(1) ? Mat2(w * scale_a) : w);
    for (int site = 2; site <= p.sites; ++site)
        acc = acc * b * (in_window(site) ? Mat2(w * scale_a) : w);
    const double chain = acc.dot(Row2::Ones());
    return chi * chi * std::pow(d, p.sites) * chain;
}

MatrixXcd haar_unitary(std::int64_t n, Rng& rng) {
    MatrixXcd g(n, n);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j)
            g(i, j) = Complex(rng.normal(), rng.normal());
    Eigen::HouseholderQR<MatrixXcd> qr(g);
    MatrixXcd q = qr.householderQ();
    const MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (std::int64_t j = 0; j < n; ++j) {
        const Complex rjj = r(j, j);
        q.col(j) *= rjj / std::abs(rjj);
    }
    return q;
}

} // namespace

MpsPartitionFunctions mps_partition_functions(const MpsModelParams& params) {
    params.validate();
    const double d = params.local_dim, chi = params.bond_dim;
    MpsPartitionFunctions out;
    out.f_xi_closed =
        2.0 * chi / (chi + 1.0) * std::pow((chi * d + d) / (chi * d + 1.0), params.sites);
    out.f_xi_chain = weingarten_chain(params, false);
    out.f_xs = weingarten_chain(params, true);
    out.ratio = out.f_xs / (static_cast<double>(params.error_dim()) * out.f_xi_chain);
    return out;
}

MpsCrossoverPrediction mps_crossover_prediction(const MpsModelParams& params,
                                                double mean_fidelity) {
    if (mean_fidelity < -1e-9 || mean_fidelity > 1.0 + 1e-9)
        throw ValidationError("mps_crossover_prediction: mean fidelity outside [0, 1]");
    const MpsPartitionFunctions pf = mps_partition_functions(params);
    MpsCrossoverPrediction out;
    out.mean_fidelity = mean_fidelity;
    out.f_id_plus_one = pf.f_xi_chain;
    out.f_xeb_plus_one =
        pf.f_xi_chain * mean_fidelity +
        pf.f_xs / static_cast<double>(params.error_dim()) * (1.0 - mean_fidelity);
    const double suppression =
        std::exp(-(params.local_dim - 1.0) / params.local_dim * params.error_support /
                 static_cast<double>(params.bond_dim));
    out.f_xeb_plus_one_asymptotic =
        pf.f_xi_chain * (mean_fidelity + suppression * (1.0 - mean_fidelity) / 2.0);
    out.f_e_regime = params.bond_dim < params.error_support;
    out.f_d_regime = params.bond_dim > params.error_support;
    return out;
}

MpsMonteCarloResult mps_monte_carlo(const MpsModelParams& params, std::int64_t n_samples,
                                    std::uint64_t seed) {
    params.validate();
    if (n_samples < 1) throw ValidationError("mps_monte_carlo: need at least one sample");
    std::int64_t dim = 1;
    for (int i = 0; i < params.sites; ++i) {
        dim *= params.local_dim;
        if (dim > (std::int64_t{1} << 14))
            throw ValidationError("mps_monte_carlo: d^N exceeds 2^14; refused");
    }
    const int d = params.local_dim, chi = params.bond_dim, n_sites = params.sites;
    const std::int64_t d_a = params.error_dim();
    const std::int64_t left_dim = [&] {
        std::int64_t v = 1;
        for (int i = 1; i < params.error_offset; ++i) v *= d;
        return v;
    }();
    const std::int64_t right_dim = dim / (left_dim * d_a);

    // Fixed error generator exp(i theta X), X = |0><0| on the window.
    VectorXcd lambda = VectorXcd::Ones(d_a);
    lambda(0) = std::exp(Complex(0.0, params.theta));

    auto accumulate = [](double x, double& mean, double& sq) {
        mean += x;
        sq += x * x;
    };
    double m_xeb = 0.0, s_xeb = 0.0, m_id = 0.0, s_id = 0.0;
    double m_f = 0.0, s_f = 0.0, m_pur = 0.0, s_pur = 0.0;

    for (std::int64_t sample = 0; sample < n_samples; ++sample) {
        Rng rng(Rng::substream(seed, static_cast<std::uint64_t>(sample)));

        // Site tensors A^s_{ab} = U[(b s), (a 0)]; amplitudes by a left-to-
        // right sweep. Index convention: site-major configurations, site 1
        // slowest; bond index a, physical s flattened as a*d + s.
        MatrixXcd sweep = MatrixXcd::Zero(1, chi);
        sweep(0, 0) = 1.0; // left boundary |0>_chi
        // sweep has one row per configuration prefix.
        for (int site = 0; site < n_sites; ++site) {
            const MatrixXcd u = haar_unitary(static_cast<std::int64_t>(chi) * d, rng);
            MatrixXcd next(sweep.rows() * d, chi);
            for (std::int64_t prefix = 0; prefix < sweep.rows(); ++prefix) {
                for (int s = 0; s < d; ++s) {
                    for (int bnd = 0; bnd < chi; ++bnd) {
                        Complex acc = 0.0;
                        for (int a = 0; a < chi; ++a)
                            acc += sweep(prefix, a) * u(bnd * d + s, a * d + 0);
                        next(prefix * d + s, bnd) = acc;
                    }
                }
            }
            sweep = std::move(next);
        }
        VectorXcd psi = sweep.col(0); // right boundary <0|_chi

        // phi = V psi with V = W diag(lambda) W^dagger on the window.
        const MatrixXcd w_haar = haar_unitary(d_a, rng);
        const MatrixXcd v_op =
            w_haar * lambda.asDiagonal() * w_haar.adjoint();
        VectorXcd phi(dim);
        // psi index = (left * d_a + a) * right_dim + r.
        for (std::int64_t l = 0; l < left_dim; ++l) {
            for (std::int64_t r = 0; r < right_dim; ++r) {
                for (std::int64_t a = 0; a < d_a; ++a) {
                    Complex acc = 0.0;
                    for (std::int64_t a2 = 0; a2 < d_a; ++a2)
                        acc += v_op(a, a2) * psi((l * d_a + a2) * right_dim + r);
                    phi((l * d_a + a) * right_dim + r) = acc;
                }
            }
        }

        const double chi2 = static_cast<double>(chi) * chi;
        const double dimd = static_cast<double>(dim);
        double sum_p2 = 0.0, sum_pq = 0.0;
        for (std::int64_t z = 0; z < dim; ++z) {
            const double pz = std::norm(psi(z));
            sum_p2 += pz * pz;
            sum_pq += pz * std::norm(phi(z));
        }
        accumulate(chi2 * dimd * sum_pq, m_xeb, s_xeb);
        accumulate(chi2 * dimd * sum_p2, m_id, s_id);

        const double norm2 = psi.squaredNorm();
        const Complex overlap = (psi.adjoint() * phi).value();
        accumulate(std::norm(overlap) / (norm2 * norm2), m_f, s_f);

        // tr(rho_A^2) of the normalised state.
        MatrixXcd rho_a = MatrixXcd::Zero(d_a, d_a);
        for (std::int64_t l = 0; l < left_dim; ++l)
            for (std::int64_t r = 0; r < right_dim; ++r)
                for (std::int64_t a = 0; a < d_a; ++a)
                    for (std::int64_t a2 = 0; a2 < d_a; ++a2)
                        rho_a(a, a2) += psi((l * d_a + a) * right_dim + r) *
                                        std::conj(psi((l * d_a + a2) * right_dim + r));
        rho_a /= norm2;
        accumulate((rho_a * rho_a).trace().real(), m_pur, s_pur);
    }

    auto finalize = [n_samples](double mean, double sq, double& out_mean, double& out_se) {
        out_mean = mean / static_cast<double>(n_samples);
        const double var =
            std::max(sq / static_cast<double>(n_samples) - out_mean * out_mean, 0.0);
        out_se = n_samples > 1 ? std::sqrt(var / static_cast<double>(n_samples - 1)) : 0.0;
    };
    MpsMonteCarloResult out;
    out.n_samples = n_samples;
    finalize(m_xeb, s_xeb, out.f_xeb_plus_one, out.f_xeb_plus_one_se);
    finalize(m_id, s_id, out.f_id_plus_one, out.f_id_plus_one_se);
    finalize(m_f, s_f, out.fidelity, out.fidelity_se);
    finalize(m_pur, s_pur, out.purity_a, out.purity_a_se);
    return out;
}

} // namespace qbench
