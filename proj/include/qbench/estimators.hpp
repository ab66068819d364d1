#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qbench/spectral.hpp"

namespace qbench {

struct MeasurementRecord {
    std::vector<std::int64_t> outcomes; // basis indices z_1..z_M
    std::string source = "simulated";   // simulated | ingested
    std::uint64_t seed = 0;
    std::string provenance;             // file path for ingested records

    std::int64_t sample_count() const { return static_cast<std::int64_t>(outcomes.size()); }
};

struct EstimateReport {
    std::string estimator = "F_d_hat";
    double value = 0.0;
    double delta_stat = 0.0;
    std::int64_t samples = 0;
    double time = 0.0;
    double normalization = 0.0; // Z(t)
    double f_id_d = 0.0;
    double f_xeb_d = 0.0;
};

// Population estimators. q, p are instantaneous distributions over the same
// basis; p_avg the infinite-time average used for rescaling.
double f_d(const OutcomeDistribution& q, const OutcomeDistribution& p,
           const OutcomeDistribution& p_avg);
double f_xeb(const OutcomeDistribution& q, const OutcomeDistribution& p, std::int64_t dimension);
double f_c(const OutcomeDistribution& q, const OutcomeDistribution& p);
double f_id_d(const OutcomeDistribution& p, const OutcomeDistribution& p_avg);
double f_xeb_d(const OutcomeDistribution& q, const OutcomeDistribution& p,
               const OutcomeDistribution& p_avg);
double f_e(const OutcomeDistribution& q, const OutcomeDistribution& p,
           const OutcomeDistribution& p_avg);
// Particle-hole variant for real-spectrum quenches (definite-parity initial
// state, PXP at zero detuning).
double f_d_ph(const OutcomeDistribution& q, const OutcomeDistribution& p,
              const OutcomeDistribution& p_avg);

// Finite-sample estimator F_d_hat with its statistical uncertainty
// (plug-in sample standard deviation of the per-sample statistic / sqrt(M)).
EstimateReport f_hat_d(const MeasurementRecord& record, const OutcomeDistribution& p,
                       const OutcomeDistribution& p_avg);

// Bootstrap cross-check for delta_stat (resampled records).
double f_hat_d_bootstrap_sigma(const MeasurementRecord& record, const OutcomeDistribution& p,
                               const OutcomeDistribution& p_avg, int n_resamples,
                               std::uint64_t seed);

// Moving-average variant: p'_avg(z,t) is a boxcar mean of p(z,.) over
// [t - window/2, t + window/2] (shrunk at the edges), and
// F'_e = (sum_z q p~' - 1) / (sum_z p p~' - 1).
std::vector<double> f_e_moving(const std::vector<OutcomeDistribution>& q_series,
                               const std::vector<OutcomeDistribution>& p_series,
                               const std::vector<double>& times, double window);

MeasurementRecord sample_record(const OutcomeDistribution& q, std::int64_t samples,
                                std::uint64_t seed);

} // namespace qbench
