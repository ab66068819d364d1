#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qbench/spectral.hpp"

namespace qbench {

struct EffectiveDimension {
    double d_beta = 0.0;          // global effective dimension
    VectorXd d_beta_inv_z;        // per-outcome inverse effective dimension
    double purity = 0.0;          // tr(rho_d^2)
    double crude = 0.0;           // sum_z p_avg(z)^2
    double d_beta_inv() const { return 1.0 / d_beta; }
};

// q_z(E) collision statistics. Degeneracy groups replace per-eigenstate
// amplitudes by group-projected ones. The inequality chain
// 1/D <= sum p_avg^2 <= tr(rho_d^2) <= 1/D_beta <= 1 is asserted.
EffectiveDimension effective_dimension(const SpectralData& sd, const QuantumState& psi0,
                                       const OutcomeDistribution& p_avg);

// Finite-D Porter-Thomas moment k! D^k / (D (D+1) ... (D+k-1)).
double pt_moment(int k, std::int64_t dimension);
// Real-spectrum analog (2k-1)!!.
double real_pt_moment(int k);

enum class MomentEnsemble { outcomes_fixed_time, temporal_fixed_outcome };

struct MomentReport {
    int k = 0;
    MomentEnsemble ensemble = MomentEnsemble::outcomes_fixed_time;
    double empirical = 0.0;
    double predicted = 0.0;
    double bound = 0.0; // half-width of the expected band around `predicted`
};

// P^(k)(t) = sum_z p_avg(z) p_tilde(z,t)^k against k!, with bands
// c_k D_beta^{-1/2} (c_2 = 1, c_3 = 3, inflated x3 for quadrature noise).
std::vector<MomentReport> empirical_outcome_moments(const OutcomeDistribution& p_tilde,
                                                    const OutcomeDistribution& p_avg, int k_max,
                                                    double d_beta_inv);

// Quadrature estimate of E_t[p_tilde(z,t)^k] for a fixed outcome, against
// k! (1 - k(k-1)/2 * D_beta^{-1}(z)/2).
std::vector<MomentReport> temporal_moments(const SpectralData& sd, const QuantumState& psi0,
                                           std::int64_t z_index, int k_max,
                                           const std::vector<double>& time_grid);

struct TwirlingCheck {
    double direct = 0.0;     // multiset sum over degeneracy-grouped energies
    double quadrature = 0.0; // long-time average of p_tilde(z,t)^k
    double quadrature_error = 0.0; // |Q(T) - Q(T/2)| self-estimate
};

// Oracle for the k-th twirling identity at a fixed outcome z. The direct
// branch enumerates all multisets of k group energies, so it is limited to
// k=2: D<=3000 and k=3: D<=300 (group counts).
TwirlingCheck twirling_oracle(const SpectralData& sd, const QuantumState& psi0,
                              std::int64_t z_index, int k, double quad_T = 2000.0,
                              double quad_dt = 0.05);

struct ResonancePair {
    int a = 0, b = 0, c = 0, d = 0; // level indices with E_a + E_b = E_c + E_d
    double gap = 0.0;
};

struct NoResonanceReport {
    std::vector<ResonancePair> resonances; // capped at max_report entries
    std::int64_t resonance_count = 0;
    std::int64_t pair_sums = 0;
    std::int64_t phs_pairs = 0; // (E, -E) pairs within tolerance
    double tolerance = 0.0;
};

// k=2 check: after collapsing degeneracy groups, reports distinct index
// pairs with equal sums within tol.
NoResonanceReport no_resonance_check(const VectorXd& eigenvalues, double tol,
                                     std::int64_t max_report = 32);

struct AutocorrelationReport {
    std::vector<double> t_star;      // per operator
    std::vector<double> a_infinity;
    std::vector<bool> degenerate;    // 1 - A(inf) ~ 0, t* undefined
    std::vector<bool> tail_warning;  // tail contribution above 1% of integral
    double mean_t_star = 0.0;
};

// Error-operator autocorrelation time t*_j = int |A_j(t)-A_j(inf)| dt /
// (1 - A_j(inf)); A(inf) from the second twirling identity.
AutocorrelationReport autocorrelation_time(const SpectralData& sd, const QuantumState& psi0,
                                           const std::vector<SparseOperator>& ops,
                                           const std::vector<double>& time_grid);

struct PerformancePrediction {
    double delta_sys = 0.0;
    double delta_sys_crude = 0.0; // the (1-F) D_beta^{-1} one-term variant
    double delta_temp_open = 0.0;
    double delta_temp_coherent = 0.0;
    double sample_complexity = 0.0; // M delta_stat^2
};

PerformancePrediction performance_predictions(double fidelity, double d_beta_inv,
                                              double var_t_f_id_d);

// tau_d = int (F_d^(1)(tau) - F_beta) dtau (trapezoid).
double delay_time(const std::vector<double>& tau, const std::vector<double>& response,
                  double f_beta);
// C = int |F_d(t) - F(t)| dt over the sampled window.
double cost_function(const std::vector<double>& t, const std::vector<double>& f_d_curve,
                     const std::vector<double>& f_curve);

double trapezoid(const std::vector<double>& x, const std::vector<double>& y);

// Kolmogorov-Smirnov distance between the weight-`w` empirical distribution
// of `values` and the unit exponential. Uniform weights when w is empty.
double weighted_ks_exponential(const VectorXd& values, const VectorXd& weights);

} // namespace qbench
