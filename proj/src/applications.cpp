#include "qbench/applications.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include "qbench/rng.hpp"

namespace qbench {

void ParameterSpace::validate() const {
    if (parameters.empty()) throw ValidationError("parameter space needs at least one parameter");
    for (const auto& p : parameters) {
        if (!(p.lo < p.hi))
            throw ValidationError("parameter '" + p.name + "' has an empty interval");
        if (p.grid_points < 3)
            throw ValidationError("parameter '" + p.name + "' needs at least 3 grid points");
    }
    if (!build) throw ValidationError("parameter space needs a builder");
}

EstimateReport evaluate_forward(const SparseOperator& hamiltonian, const QuantumState& psi0,
                                double t, const MeasurementRecord& record, double eps_deg_rel) {
    const SpectralData sd = diagonalize(hamiltonian, eps_deg_rel);
    const QuantumState psi_t = evolve_exact(sd, psi0, t);
    const OutcomeDistribution p = outcome_distribution(psi_t);
    const OutcomeDistribution p_avg = time_averaged_distribution(sd, psi0);
    return f_hat_d(record, p, p_avg);
}

EstimateReport evaluate_forward(const SparseOperator& hamiltonian, const QuantumState& psi0,
                                const std::vector<TimedRecord>& records, double eps_deg_rel) {
    if (records.empty()) throw ValidationError("evaluate_forward: no records");
    const SpectralData sd = diagonalize(hamiltonian, eps_deg_rel);
    const OutcomeDistribution p_avg = time_averaged_distribution(sd, psi0);
    EstimateReport total;
    double var_acc = 0.0;
    for (const auto& tr : records) {
        const OutcomeDistribution p =
            outcome_distribution(evolve_exact(sd, psi0, tr.time));
        const EstimateReport rep = f_hat_d(tr.record, p, p_avg);
        total.value += rep.value;
        var_acc += rep.delta_stat * rep.delta_stat;
        total.samples += rep.samples;
        total.normalization += rep.normalization;
        total.f_id_d += rep.f_id_d;
        total.f_xeb_d += rep.f_xeb_d;
    }
    const double n = static_cast<double>(records.size());
    total.value /= n;
    total.delta_stat = std::sqrt(var_acc) / n;
    total.normalization /= n;
    total.f_id_d /= n;
    total.f_xeb_d /= n;
    total.time = records.back().time;
    return total;
}

namespace {

struct Objective1D {
    // Returns F_d_hat at theta along one coordinate.
    std::function<double(double)> eval;
};

// Coarse grid argmax followed by golden-section refinement between the
// bracketing grid neighbours.
std::pair<double, double> maximise_1d(const Objective1D& obj, double lo, double hi,
                                      int grid_points, int golden_iterations) {
    std::vector<double> grid(grid_points), val(grid_points);
    for (int i = 0; i < grid_points; ++i) {
        grid[i] = lo + (hi - lo) * i / (grid_points - 1);
        val[i] = obj.eval(grid[i]);
    }
    int best = 0;
    for (int i = 1; i < grid_points; ++i)
        if (val[i] > val[best]) best = i;
    double a = grid[std::max(best - 1, 0)];
    double b = grid[std::min(best + 1, grid_points - 1)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = obj.eval(x1), f2 = obj.eval(x2);
    for (int it = 0; it < golden_iterations; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = obj.eval(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = obj.eval(x1);
        }
    }
    const double xm = 0.5 * (a + b);
    return {xm, obj.eval(xm)};
}

} // namespace

GreedyFitResult greedy_fit(const MeasurementRecord& record, const ParameterSpace& space,
                           const QuantumState& psi0, double t, std::uint64_t seed,
                           const GreedyFitOptions& options) {
    return greedy_fit(std::vector<TimedRecord>{{record, t}}, space, psi0, seed, options);
}

GreedyFitResult greedy_fit(const std::vector<TimedRecord>& records, const ParameterSpace& space,
                           const QuantumState& psi0, std::uint64_t seed,
                           const GreedyFitOptions& options) {
    space.validate();
    if (records.empty()) throw ValidationError("greedy_fit: no records");
    for (const auto& tr : records)
        if (tr.record.sample_count() < 1) throw ValidationError("greedy_fit: empty record");
    const int n = static_cast<int>(space.parameters.size());

    auto objective = [&](const std::vector<double>& theta) {
        const SparseOperator h = space.build(theta);
        return evaluate_forward(h, psi0, records, options.eps_deg_rel);
    };

    GreedyFitResult best_overall;
    best_overall.f_hat = -std::numeric_limits<double>::infinity();

    for (int start = 0; start < options.multi_starts; ++start) {
        Rng rng(Rng::substream(seed, static_cast<std::uint64_t>(start)));
        std::vector<double> theta(n);
        for (int j = 0; j < n; ++j) {
            const auto& p = space.parameters[j];
            theta[j] = start == 0 ? 0.5 * (p.lo + p.hi) : rng.uniform(p.lo, p.hi);
        }
        GreedyFitResult result;
        EstimateReport current = objective(theta);
        if (!std::isfinite(current.value))
            throw ComputeError("greedy_fit: non-finite objective at the initial guess");
        result.trace.push_back(current.value);

        for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
            const double sweep_start_value = current.value;
            std::vector<int> order(n);
            std::iota(order.begin(), order.end(), 0);
            for (int i = n - 1; i > 0; --i)
                std::swap(order[i], order[rng.uniform_index(static_cast<std::uint64_t>(i + 1))]);

            for (const int j : order) {
                const auto& p = space.parameters[j];
                Objective1D obj;
                obj.eval = [&, j](double x) {
                    std::vector<double> probe = theta;
                    probe[j] = x;
                    const double v = objective(probe).value;
                    if (!std::isfinite(v))
                        throw ComputeError("greedy_fit: non-finite objective for '" + p.name +
                                           "'");
                    return v;
                };
                const auto [x_best, f_best] =
                    maximise_1d(obj, p.lo, p.hi, p.grid_points, options.golden_iterations);
                if (f_best >= current.value) { // accept only improvements
                    theta[j] = x_best;
                    current = objective(theta);
                    result.trace.push_back(current.value);
                }
            }
            result.sweeps = sweep + 1;
            if (current.value - sweep_start_value < options.tol_conv) break;
        }

        result.theta = theta;
        result.f_hat = current.value;
        result.delta_stat = current.delta_stat;
        if (result.f_hat > best_overall.f_hat) best_overall = std::move(result);
    }

    // Curvature-based uncertainties at the optimum: F_d_hat is locally
    // quadratic, so theta_j is resolved once c_j dtheta^2 ~ delta_stat.
    // Curvature-based uncertainties: theta is resolved out to the contour
    // where F_d_hat drops by delta_stat, so the per-parameter half-width is
    // sqrt(2 delta_stat (H^-1)_jj) with H the (negated, clipped) Hessian.
    // Differences are taken at the grid-cell scale; sub-cell steps would
    // probe the finite-size speckle wiggles of the objective instead of the
    // basin. Off-diagonal terms matter: correlated parameters widen the
    // marginal uncertainty well beyond the axis curvature alone.
    const EstimateReport at_opt = objective(best_overall.theta);
    MatrixXd hessian(n, n);
    auto probe_at = [&](int a, double ha, int bcoord, double hb) {
        std::vector<double> probe = best_overall.theta;
        probe[a] = std::clamp(probe[a] + ha, space.parameters[a].lo, space.parameters[a].hi);
        if (bcoord >= 0)
            probe[bcoord] =
                std::clamp(probe[bcoord] + hb, space.parameters[bcoord].lo,
                           space.parameters[bcoord].hi);
        return objective(probe).value;
    };
    std::vector<double> steps(n);
    for (int j = 0; j < n; ++j)
        steps[j] = (space.parameters[j].hi - space.parameters[j].lo) /
                   (space.parameters[j].grid_points - 1);
    for (int a = 0; a < n; ++a) {
        const double fp = probe_at(a, steps[a], -1, 0.0);
        const double fm = probe_at(a, -steps[a], -1, 0.0);
        hessian(a, a) = (fp + fm - 2.0 * at_opt.value) / (steps[a] * steps[a]);
        for (int b = a + 1; b < n; ++b) {
            const double fpp = probe_at(a, steps[a], b, steps[b]);
            const double fpm = probe_at(a, steps[a], b, -steps[b]);
            const double fmp = probe_at(a, -steps[a], b, steps[b]);
            const double fmm = probe_at(a, -steps[a], b, -steps[b]);
            hessian(a, b) = hessian(b, a) =
                (fpp - fpm - fmp + fmm) / (4.0 * steps[a] * steps[b]);
        }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(MatrixXd(-hessian));
    const VectorXd clipped = es.eigenvalues().cwiseMax(1e-3);
    const MatrixXd covariance =
        es.eigenvectors() * clipped.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    best_overall.uncertainty.assign(n, 0.0);
    const double noise = std::max(at_opt.delta_stat, 1e-12);
    for (int j = 0; j < n; ++j)
        best_overall.uncertainty[j] = std::sqrt(2.0 * noise * covariance(j, j));
    return best_overall;
}

std::vector<ScanPoint> state_family_scan(const SpectralData& sd,
                                         const std::function<QuantumState(double)>& family,
                                         double theta_star,
                                         const std::vector<double>& theta_grid, std::int64_t M,
                                         double t, std::uint64_t seed) {
    const QuantumState prepared = family(theta_star);
    const QuantumState prepared_t = evolve_exact(sd, prepared, t);
    const MeasurementRecord record =
        sample_record(outcome_distribution(prepared_t), M, seed);

    std::vector<ScanPoint> out;
    out.reserve(theta_grid.size());
    for (const double theta : theta_grid) {
        const QuantumState target = family(theta);
        const QuantumState target_t = evolve_exact(sd, target, t);
        const OutcomeDistribution p = outcome_distribution(target_t);
        const OutcomeDistribution p_avg = time_averaged_distribution(sd, target);
        const EstimateReport report = f_hat_d(record, p, p_avg);
        ScanPoint point;
        point.theta = theta;
        point.f_hat = report.value;
        point.delta_stat = report.delta_stat;
        point.fidelity = std::norm((target.amplitudes.adjoint() * prepared.amplitudes).value());
        out.push_back(point);
    }
    return out;
}

QuantumState ground_state(const SparseOperator& hamiltonian) {
    const SpectralData sd = diagonalize(hamiltonian);
    VectorXcd amps(sd.dimension());
    amps.real() = sd.eigenvectors().col(0);
    amps.imag().setZero();
    return QuantumState{std::move(amps), 0.0, nullptr};
}

std::vector<ScanPoint> ground_state_scan(const SparseOperator& quench_hamiltonian,
                                         const std::function<SparseOperator(double)>& build,
                                         double theta_star,
                                         const std::vector<double>& theta_grid, std::int64_t M,
                                         double t, std::uint64_t seed, double eps_deg_rel) {
    const SpectralData sdq = diagonalize(quench_hamiltonian, eps_deg_rel);
    const QuantumState prepared = ground_state(build(theta_star));
    const QuantumState prepared_t = evolve_exact(sdq, prepared, t);
    const MeasurementRecord record = sample_record(outcome_distribution(prepared_t), M, seed);

    std::vector<ScanPoint> out;
    out.reserve(theta_grid.size());
    for (const double theta : theta_grid) {
        const QuantumState target = ground_state(build(theta));
        const QuantumState target_t = evolve_exact(sdq, target, t);
        const OutcomeDistribution p = outcome_distribution(target_t);
        const OutcomeDistribution p_avg = time_averaged_distribution(sdq, target);
        const EstimateReport report = f_hat_d(record, p, p_avg);
        ScanPoint point;
        point.theta = theta;
        point.f_hat = report.value;
        point.delta_stat = report.delta_stat;
        point.fidelity = std::norm((target.amplitudes.adjoint() * prepared.amplitudes).value());
        out.push_back(point);
    }
    return out;
}

std::vector<TemperatureScanPoint> temperature_scan(const SparseOperator& prep_hamiltonian,
                                                   const SparseOperator& quench_hamiltonian,
                                                   const std::vector<double>& temperatures,
                                                   double t, double eps_deg_rel) {
    for (const double temp : temperatures)
        if (temp <= 0.0) throw ValidationError("temperature_scan: T must be > 0");
    const SpectralData sd_prep = diagonalize(prep_hamiltonian, eps_deg_rel);
    const SpectralData sd_quench = diagonalize(quench_hamiltonian, eps_deg_rel);
    const std::int64_t d = sd_prep.dimension();

    // Reference: quenched ground state of the preparation Hamiltonian.
    VectorXcd gs(d);
    gs.real() = sd_prep.eigenvectors().col(0);
    gs.imag().setZero();
    const QuantumState ground{gs, 0.0, nullptr};
    const QuantumState ground_t = evolve_exact(sd_quench, ground, t);
    const OutcomeDistribution p = outcome_distribution(ground_t);
    const OutcomeDistribution p_avg = time_averaged_distribution(sd_quench, ground);

    // Quenched eigenstates of the preparation Hamiltonian give the Boltzmann
    // mixture's outcome distribution exactly.
    MatrixXd quenched_probs(d, d); // column k: |<z|U_t|E_k^prep>|^2
    for (std::int64_t k = 0; k < d; ++k) {
        VectorXcd ek(d);
        ek.real() = sd_prep.eigenvectors().col(k);
        ek.imag().setZero();
        const QuantumState ek_t = evolve_exact(sd_quench, QuantumState{ek, 0.0, nullptr}, t);
        quenched_probs.col(k) = ek_t.amplitudes.cwiseAbs2();
    }

    const double e0 = sd_prep.eigenvalues()(0);
    std::vector<TemperatureScanPoint> out;
    out.reserve(temperatures.size());
    for (const double temp : temperatures) {
        VectorXd weights(d);
        for (std::int64_t k = 0; k < d; ++k)
            weights(k) = std::exp(-(sd_prep.eigenvalues()(k) - e0) / temp);
        const double zpart = weights.sum();
        weights /= zpart;

        OutcomeDistribution q;
        q.values = quenched_probs * weights;
        q.time = t;
        q.kind = DistributionKind::instantaneous;

        TemperatureScanPoint point;
        point.temperature = temp;
        point.fidelity_exact = weights(0); // exp(-E0/T)/Z with the shifted spectrum
        point.f_d_value = f_d(q, p, p_avg);
        point.f_e_value = f_e(q, p, p_avg);
        out.push_back(point);
    }
    return out;
}

} // namespace qbench
