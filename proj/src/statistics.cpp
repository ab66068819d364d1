#include "qbench/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qbench {

namespace {

// Group-collapsed amplitude coefficients c_g = sum_{E in g} <z|E> <E|psi0>
// and representative group energies. Free evolution of <z|psi(t)> is then
// sum_g c_g exp(-i E_g t).
struct OutcomeRow {
    VectorXcd coeff;   // per degeneracy group
    VectorXd energy;   // group representative (mean)
    double p_avg = 0.0;

    Complex amplitude(double t) const {
        Complex amp = 0.0;
        for (std::int64_t g = 0; g < coeff.size(); ++g)
            amp += coeff(g) * std::exp(Complex(0.0, -energy(g) * t));
        return amp;
    }
};

OutcomeRow outcome_row(const SpectralData& sd, const VectorXcd& b, std::int64_t z_index) {
    const auto& groups = sd.degeneracy_groups();
    OutcomeRow row;
    row.coeff.resize(static_cast<std::int64_t>(groups.size()));
    row.energy.resize(static_cast<std::int64_t>(groups.size()));
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto [begin, end] = groups[g];
        Complex amp = 0.0;
        double e_mean = 0.0;
        for (int e = begin; e < end; ++e) {
            amp += sd.eigenvectors()(z_index, e) * b(e);
            e_mean += sd.eigenvalues()(e);
        }
        row.coeff(static_cast<std::int64_t>(g)) = amp;
        row.energy(static_cast<std::int64_t>(g)) = e_mean / (end - begin);
        row.p_avg += std::norm(amp);
    }
    return row;
}

// Trapezoid average of p_tilde(z,t)^k over [0, T].
double quadrature_moment(const OutcomeRow& row, int k, double T, double dt) {
    const auto n = static_cast<std::int64_t>(std::ceil(T / dt));
    double acc = 0.0, weight = 0.0;
    for (std::int64_t i = 0; i <= n; ++i) {
        const double t = T * static_cast<double>(i) / static_cast<double>(n);
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        const double pt = std::norm(row.amplitude(t)) / row.p_avg;
        acc += w * std::pow(pt, k);
        weight += w;
    }
    return acc / weight;
}

} // namespace

EffectiveDimension effective_dimension(const SpectralData& sd, const QuantumState& psi0,
                                       const OutcomeDistribution& p_avg) {
    const std::int64_t d = sd.dimension();
    if (p_avg.values.size() != d)
        throw ValidationError("effective_dimension: p_avg dimension mismatch");
    const VectorXcd b = sd.eigenbasis_overlaps(psi0.amplitudes);
    const auto& groups = sd.degeneracy_groups();
    const std::int64_t n_groups = static_cast<std::int64_t>(groups.size());

    EffectiveDimension out;
    out.d_beta_inv_z = VectorXd::Zero(d);
    VectorXd col(d);
    VectorXcd proj(d);
    for (std::int64_t g = 0; g < n_groups; ++g) {
        const auto [begin, end] = groups[g];
        if (end - begin == 1) {
            col = sd.eigenvectors().col(begin).cwiseAbs2() * std::norm(b(begin));
        } else {
            proj = sd.eigenvectors().middleCols(begin, end - begin) *
                   b.segment(begin, end - begin);
            col = proj.cwiseAbs2();
        }
        out.d_beta_inv_z += col.cwiseAbs2(); // sum_g |<z|P_g|psi0>|^4
    }
    double global = 0.0;
    for (std::int64_t z = 0; z < d; ++z) {
        const double pa = p_avg.values(z);
        if (pa > 0.0) {
            out.d_beta_inv_z(z) /= pa * pa;
            global += pa * out.d_beta_inv_z(z);
        } else {
            out.d_beta_inv_z(z) = 0.0;
        }
    }
    out.d_beta = 1.0 / global;
    out.purity = diagonal_ensemble_purity(sd, psi0);
    out.crude = p_avg.values.squaredNorm();

    const double slack = 1e-9;
    if (!(1.0 / static_cast<double>(d) <= out.crude + slack &&
          out.crude <= out.purity + slack && out.purity <= global + slack &&
          global <= 1.0 + slack))
        throw ComputeError("effective dimension inequality chain violated (1/D <= sum p_avg^2 "
                           "<= tr rho_d^2 <= 1/D_beta <= 1)");
    return out;
}

double pt_moment(int k, std::int64_t dimension) {
    if (k < 1 || dimension < 1) throw ValidationError("pt_moment: k >= 1 and D >= 1 required");
    double value = 1.0;
    for (int i = 0; i < k; ++i)
        value *= static_cast<double>(i + 1) * static_cast<double>(dimension) /
                 static_cast<double>(dimension + i);
    return value;
}

double real_pt_moment(int k) {
    if (k < 1) throw ValidationError("real_pt_moment: k >= 1 required");
    double value = 1.0;
    for (int i = 2 * k - 1; i > 1; i -= 2) value *= static_cast<double>(i);
    return value;
}

std::vector<MomentReport> empirical_outcome_moments(const OutcomeDistribution& p_tilde,
                                                    const OutcomeDistribution& p_avg, int k_max,
                                                    double d_beta_inv) {
    if (p_tilde.values.size() != p_avg.values.size())
        throw ValidationError("empirical_outcome_moments: size mismatch");
    if (k_max < 1) throw ValidationError("k_max >= 1 required");
    std::vector<MomentReport> reports;
    reports.reserve(k_max);
    // Theorem band prefactors {k=2: 1, k=3: 3}, calibrated once on BH 6-on-6
    // and frozen; x3 covers quadrature noise at a single sampled time.
    auto prefactor = [](int k) { return k <= 2 ? 1.0 : 3.0 * std::tgamma(k - 1.0); };
    for (int k = 1; k <= k_max; ++k) {
        MomentReport r;
        r.k = k;
        r.ensemble = MomentEnsemble::outcomes_fixed_time;
        double acc = 0.0;
        for (std::int64_t z = 0; z < p_tilde.values.size(); ++z)
            acc += p_avg.values(z) * std::pow(p_tilde.values(z), k);
        r.empirical = acc;
        r.predicted = std::tgamma(k + 1.0);
        r.bound = 3.0 * prefactor(k) * std::sqrt(std::max(d_beta_inv, 0.0));
        reports.push_back(r);
    }
    return reports;
}

std::vector<MomentReport> temporal_moments(const SpectralData& sd, const QuantumState& psi0,
                                           std::int64_t z_index, int k_max,
                                           const std::vector<double>& time_grid) {
    if (z_index < 0 || z_index >= sd.dimension())
        throw ValidationError("temporal_moments: outcome index out of range");
    if (time_grid.size() < 2) throw ValidationError("temporal_moments: need a time grid");
    const VectorXcd b = sd.eigenbasis_overlaps(psi0.amplitudes);
    const OutcomeRow row = outcome_row(sd, b, z_index);
    if (row.p_avg <= 0.0)
        throw ComputeError("temporal_moments: outcome has p_avg = 0 (undefined rescaling)");
    const double d_beta_inv_z = row.coeff.cwiseAbs2().squaredNorm() / (row.p_avg * row.p_avg);

    std::vector<double> sums(static_cast<std::size_t>(k_max), 0.0);
    double weight_total = 0.0;
    for (std::size_t i = 0; i < time_grid.size(); ++i) {
        const double wq = (i == 0 || i + 1 == time_grid.size()) ? 0.5 : 1.0;
        const double ptilde = std::norm(row.amplitude(time_grid[i])) / row.p_avg;
        double powv = 1.0;
        for (int k = 1; k <= k_max; ++k) {
            powv *= ptilde;
            sums[k - 1] += wq * powv;
        }
        weight_total += wq;
    }

    std::vector<MomentReport> reports;
    for (int k = 1; k <= k_max; ++k) {
        MomentReport r;
        r.k = k;
        r.ensemble = MomentEnsemble::temporal_fixed_outcome;
        r.empirical = sums[k - 1] / weight_total;
        r.predicted = std::tgamma(k + 1.0) * (1.0 - 0.5 * k * (k - 1) * 0.5 * d_beta_inv_z);
        r.bound = std::tgamma(k + 1.0) * 0.5 * k * (k - 1) * d_beta_inv_z;
        reports.push_back(r);
    }
    return reports;
}

TwirlingCheck twirling_oracle(const SpectralData& sd, const QuantumState& psi0,
                              std::int64_t z_index, int k, double quad_T, double quad_dt) {
    if (k < 1 || k > 3) throw ValidationError("twirling_oracle supports k = 1, 2, 3");
    const std::int64_t n = sd.group_count();
    if (k == 2 && n > 3000)
        throw ValidationError("twirling_oracle: direct multiset sum refused for k=2 at " +
                              std::to_string(n) + " levels (limit 3000)");
    if (k == 3 && n > 300)
        throw ValidationError("twirling_oracle: direct multiset sum refused for k=3 at " +
                              std::to_string(n) + " levels (limit 300)");

    const VectorXcd b = sd.eigenbasis_overlaps(psi0.amplitudes);
    const OutcomeRow row = outcome_row(sd, b, z_index);
    if (row.p_avg <= 0.0) throw ComputeError("twirling_oracle: outcome has p_avg = 0");
    VectorXd q = row.coeff.cwiseAbs2() / row.p_avg;

    TwirlingCheck out;
    // Direct multiset sum: unordered multisets M of group energies with
    // weight |pi(M)|^2 (the |pi(M)| arrangements each carry weight |pi(M)|).
    if (k == 1) {
        out.direct = q.sum();
    } else if (k == 2) {
        double acc = 0.0;
        for (std::int64_t a = 0; a < n; ++a) {
            acc += q(a) * q(a);
            for (std::int64_t c = a + 1; c < n; ++c) acc += 4.0 * q(a) * q(c);
        }
        out.direct = acc;
    } else {
        double acc = 0.0;
        for (std::int64_t a = 0; a < n; ++a) {
            acc += q(a) * q(a) * q(a); // all equal, |pi| = 1
            for (std::int64_t c = 0; c < n; ++c)
                if (c != a) acc += 9.0 * q(a) * q(a) * q(c); // pattern aab, |pi| = 3
            for (std::int64_t c = a + 1; c < n; ++c)
                for (std::int64_t e = c + 1; e < n; ++e)
                    acc += 36.0 * q(a) * q(c) * q(e); // distinct, |pi| = 6
        }
        out.direct = acc;
    }

    // Long-time trapezoid average, with a T vs T/2 self-estimate.
    const double width = std::max(sd.spectral_width(), 1e-12);
    const double dt = std::min(quad_dt, 0.5 * M_PI / (k * width));
    out.quadrature = quadrature_moment(row, k, quad_T, dt);
    const double half = quadrature_moment(row, k, quad_T / 2.0, dt);
    out.quadrature_error = std::abs(out.quadrature - half);
    return out;
}

NoResonanceReport no_resonance_check(const VectorXd& eigenvalues, double tol,
                                     std::int64_t max_report) {
    const std::int64_t d = eigenvalues.size();
    if (d < 2) throw ValidationError("no_resonance_check: need at least two levels");
    if (d > 10000) throw ValidationError("no_resonance_check: refused above 10^4 levels");

    // Collapse degeneracy groups first.
    std::vector<double> levels;
    levels.reserve(d);
    VectorXd sorted = eigenvalues;
    std::sort(sorted.data(), sorted.data() + d);
    for (std::int64_t i = 0; i < d; ++i) {
        if (levels.empty() || sorted(i) - levels.back() > tol) levels.push_back(sorted(i));
    }
    const std::int64_t n = static_cast<std::int64_t>(levels.size());

    struct PairSum {
        double sum;
        int a, b;
    };
    std::vector<PairSum> sums;
    sums.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) sums.push_back({levels[a] + levels[b], a, b});
    std::sort(sums.begin(), sums.end(),
              [](const PairSum& x, const PairSum& y) { return x.sum < y.sum; });

    NoResonanceReport report;
    report.tolerance = tol;
    report.pair_sums = static_cast<std::int64_t>(sums.size());
    for (std::size_t i = 0; i + 1 < sums.size(); ++i) {
        // Compare against every later sum within tolerance, not just the
        // immediate neighbour.
        for (std::size_t j = i + 1; j < sums.size(); ++j) {
            const double gap = sums[j].sum - sums[i].sum;
            if (gap > 2.0 * tol) break;
            ++report.resonance_count;
            if (static_cast<std::int64_t>(report.resonances.size()) < max_report)
                report.resonances.push_back(
                    {sums[i].a, sums[i].b, sums[j].a, sums[j].b, gap});
        }
    }
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            if (std::abs(levels[a] + levels[b]) <= 2.0 * tol) ++report.phs_pairs;
            if (levels[a] + levels[b] > 2.0 * tol) break;
        }
    }
    return report;
}

AutocorrelationReport autocorrelation_time(const SpectralData& sd, const QuantumState& psi0,
                                           const std::vector<SparseOperator>& ops,
                                           const std::vector<double>& time_grid) {
    if (ops.empty()) throw ValidationError("autocorrelation_time: no operators");
    if (time_grid.size() < 8 || time_grid.front() != 0.0)
        throw ValidationError("autocorrelation_time: grid must start at 0 with several points");
    AutocorrelationReport report;
    const VectorXcd b = sd.eigenbasis_overlaps(psi0.amplitudes);

    for (const auto& op : ops) {
        // Work in the energy eigenbasis: X~ = V^T X V.
        const MatrixXd xv = op.to_dense_real() * sd.eigenvectors();
        const MatrixXd xt = sd.eigenvectors().transpose() * xv;
        const VectorXcd xb = [&] {
            VectorXcd out(b.size());
            const VectorXd re = xt * b.real();
            const VectorXd im = xt * b.imag();
            out.real() = re;
            out.imag() = im;
            return out;
        }();
        const double x2_0 = xb.squaredNorm(); // <psi0|X^2|psi0>
        if (x2_0 < 1e-14) {
            report.t_star.push_back(0.0);
            report.a_infinity.push_back(1.0);
            report.degenerate.push_back(true);
            report.tail_warning.push_back(false);
            continue;
        }

        // A(t) = |f(t)|^2 / (g(t) x2_0), f = <psi(t)|X|u(t)>, g = |X psi(t)|^2,
        // with u = X psi0.
        std::vector<double> a_curve(time_grid.size());
        for (std::size_t i = 0; i < time_grid.size(); ++i) {
            const double t = time_grid[i];
            VectorXcd phase(b.size());
            for (std::int64_t e = 0; e < b.size(); ++e)
                phase(e) = std::exp(Complex(0.0, -sd.eigenvalues()(e) * t));
            const VectorXcd ct = phase.asDiagonal() * b;   // psi(t) in eigenbasis
            const VectorXcd ut = phase.asDiagonal() * xb;  // u(t) in eigenbasis
            VectorXcd xct(b.size());
            {
                const VectorXd re = xt * ct.real();
                const VectorXd im = xt * ct.imag();
                xct.real() = re;
                xct.imag() = im;
            }
            const Complex f = (xct.adjoint() * ut).value();
            const double g = xct.squaredNorm();
            a_curve[i] = std::norm(f) / std::max(g * x2_0, 1e-300);
        }

        // A(inf) from the second twirling identity applied to numerator and
        // denominator time averages (degeneracy groups collapsed).
        const auto& groups = sd.degeneracy_groups();
        const std::int64_t ng = static_cast<std::int64_t>(groups.size());
        MatrixXcd w = MatrixXcd::Zero(ng, ng); // W_gg' = sum over members of b*_E Xt_EE' (Xt b)_E'
        for (std::int64_t g1 = 0; g1 < ng; ++g1)
            for (std::int64_t g2 = 0; g2 < ng; ++g2) {
                Complex acc = 0.0;
                for (int e1 = groups[g1].first; e1 < groups[g1].second; ++e1)
                    for (int e2 = groups[g2].first; e2 < groups[g2].second; ++e2)
                        acc += std::conj(b(e1)) * xt(e1, e2) * xb(e2);
                w(g1, g2) = acc;
            }
        double num_avg = 0.0;
        Complex diag_sum = 0.0;
        for (std::int64_t g1 = 0; g1 < ng; ++g1) {
            for (std::int64_t g2 = 0; g2 < ng; ++g2) {
                if (g1 == g2) {
                    diag_sum += w(g1, g1);
                } else {
                    num_avg += std::norm(w(g1, g2));
                }
            }
        }
        num_avg += std::norm(diag_sum);
        // E_t |X psi(t)|^2 with X^2 in the eigenbasis.
        const MatrixXd x2t = xt * xt;
        double den_avg = 0.0;
        for (std::int64_t g1 = 0; g1 < ng; ++g1) {
            Complex acc = 0.0;
            for (int e1 = groups[g1].first; e1 < groups[g1].second; ++e1)
                for (int e2 = groups[g1].first; e2 < groups[g1].second; ++e2)
                    acc += std::conj(b(e1)) * x2t(e1, e2) * b(e2);
            den_avg += acc.real();
        }
        const double a_inf = num_avg / std::max(den_avg * x2_0, 1e-300);

        report.a_infinity.push_back(a_inf);
        if (1.0 - a_inf < 1e-10) {
            report.t_star.push_back(0.0);
            report.degenerate.push_back(true);
            report.tail_warning.push_back(false);
            continue;
        }
        std::vector<double> dev(a_curve.size());
        for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = std::abs(a_curve[i] - a_inf);
        // Finite systems never relax |A - A_inf| to zero; the residual
        // fluctuation floor (final 20% of the window) would otherwise grow
        // the integral linearly with t_max. Integrate the transient above
        // the floor so t* is stable against the window choice.
        const std::size_t tail_begin = dev.size() - dev.size() / 5;
        double floor = 0.0;
        for (std::size_t i = tail_begin; i < dev.size(); ++i) floor += dev[i];
        floor /= static_cast<double>(dev.size() - tail_begin);
        std::vector<double> transient(dev.size());
        for (std::size_t i = 0; i < dev.size(); ++i)
            transient[i] = std::max(dev[i] - floor, 0.0);
        const double integral = trapezoid(time_grid, transient);
        std::vector<double> tail_t(time_grid.begin() + tail_begin, time_grid.end());
        std::vector<double> tail_d(transient.begin() + tail_begin, transient.end());
        const double tail = trapezoid(tail_t, tail_d);
        report.t_star.push_back(integral / (1.0 - a_inf));
        report.degenerate.push_back(false);
        report.tail_warning.push_back(tail > 0.01 * std::max(integral, 1e-300));
    }

    double mean = 0.0;
    int counted = 0;
    for (std::size_t i = 0; i < report.t_star.size(); ++i) {
        if (!report.degenerate[i]) {
            mean += report.t_star[i];
            ++counted;
        }
    }
    report.mean_t_star = counted ? mean / counted : 0.0;
    return report;
}

PerformancePrediction performance_predictions(double fidelity, double d_beta_inv,
                                              double var_t_f_id_d) {
    PerformancePrediction out;
    out.delta_sys = (1.0 - fidelity) * (0.5 * d_beta_inv + var_t_f_id_d / 8.0);
    out.delta_sys_crude = (1.0 - fidelity) * d_beta_inv;
    out.delta_temp_open = std::sqrt(0.25 * (1.0 - fidelity) * (1.0 - fidelity) * var_t_f_id_d);
    out.delta_temp_coherent = std::sqrt(1.25 * (1.0 - fidelity) * (1.0 - fidelity) * var_t_f_id_d);
    out.sample_complexity = 1.0 + 2.0 * fidelity - fidelity * fidelity;
    return out;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("trapezoid: size mismatch");
    if (x.size() < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        acc += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
    return acc;
}

double weighted_ks_exponential(const VectorXd& values, const VectorXd& weights) {
    const std::int64_t n = values.size();
    if (n < 1) throw ValidationError("weighted_ks_exponential: empty sample");
    const bool uniform = weights.size() == 0;
    if (!uniform && weights.size() != n)
        throw ValidationError("weighted_ks_exponential: weight size mismatch");
    std::vector<std::int64_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::int64_t a, std::int64_t b) { return values(a) < values(b); });
    const double total = uniform ? static_cast<double>(n) : weights.sum();
    double cdf = 0.0, ks = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double x = values(order[i]);
        const double model = 1.0 - std::exp(-x);
        ks = std::max(ks, std::abs(cdf - model)); // just below the jump
        cdf += (uniform ? 1.0 : weights(order[i])) / total;
        ks = std::max(ks, std::abs(cdf - model)); // just above
    }
    return ks;
}

double delay_time(const std::vector<double>& tau, const std::vector<double>& response,
                  double f_beta) {
    std::vector<double> dev(response.size());
    for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = response[i] - f_beta;
    return trapezoid(tau, dev);
}

double cost_function(const std::vector<double>& t, const std::vector<double>& f_d_curve,
                     const std::vector<double>& f_curve) {
    if (f_d_curve.size() != f_curve.size())
        throw ValidationError("cost_function: curve sizes differ");
    std::vector<double> dev(f_curve.size());
    for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = std::abs(f_d_curve[i] - f_curve[i]);
    return trapezoid(t, dev);
}

} // namespace qbench
