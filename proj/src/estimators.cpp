#include "qbench/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "qbench/rng.hpp"

namespace qbench {

namespace {

void check_sizes(const OutcomeDistribution& a, const OutcomeDistribution& b, const char* who) {
    if (a.values.size() != b.values.size())
        throw ValidationError(std::string(who) + ": distribution sizes differ");
}

} // namespace

double f_d(const OutcomeDistribution& q, const OutcomeDistribution& p,
           const OutcomeDistribution& p_avg) {
    check_sizes(q, p, "f_d");
    const RescaledDistribution rd = rescale(p, p_avg);
    if (rd.normalization <= 0.0)
        throw ComputeError("f_d: degenerate normalization Z = 0");
    const double overlap = q.values.dot(rd.p_tilde.values);
    return 2.0 * overlap / rd.normalization - 1.0;
}

double f_xeb(const OutcomeDistribution& q, const OutcomeDistribution& p, std::int64_t dimension) {
    check_sizes(q, p, "f_xeb");
    return static_cast<double>(dimension) * q.values.dot(p.values) - 1.0;
}

double f_c(const OutcomeDistribution& q, const OutcomeDistribution& p) {
    check_sizes(q, p, "f_c");
    const double pp = p.values.squaredNorm();
    if (pp <= 0.0) throw ComputeError("f_c: sum p^2 = 0");
    return 2.0 * q.values.dot(p.values) / pp - 1.0;
}

double f_id_d(const OutcomeDistribution& p, const OutcomeDistribution& p_avg) {
    return rescale(p, p_avg).normalization - 1.0;
}

double f_xeb_d(const OutcomeDistribution& q, const OutcomeDistribution& p,
               const OutcomeDistribution& p_avg) {
    check_sizes(q, p, "f_xeb_d");
    const RescaledDistribution rd = rescale(p, p_avg);
    return q.values.dot(rd.p_tilde.values) - 1.0;
}

double f_e(const OutcomeDistribution& q, const OutcomeDistribution& p,
           const OutcomeDistribution& p_avg) {
    const double denom = f_id_d(p, p_avg);
    if (std::abs(denom) < 1e-12)
        throw ComputeError("f_e: degenerate F_id,d = 0");
    return f_xeb_d(q, p, p_avg) / denom;
}

double f_d_ph(const OutcomeDistribution& q, const OutcomeDistribution& p,
              const OutcomeDistribution& p_avg) {
    check_sizes(q, p, "f_d_ph");
    const RescaledDistribution rd = rescale(p, p_avg);
    const double denom = p.values.dot(rd.p_tilde.values);
    if (denom <= 0.0) throw ComputeError("f_d_ph: degenerate denominator");
    return 1.5 * q.values.dot(rd.p_tilde.values) / denom - 0.5;
}

EstimateReport f_hat_d(const MeasurementRecord& record, const OutcomeDistribution& p,
                       const OutcomeDistribution& p_avg) {
    if (record.sample_count() < 1) throw ValidationError("f_hat_d: empty record");
    const RescaledDistribution rd = rescale(p, p_avg);
    if (rd.normalization <= 0.0) throw ComputeError("f_hat_d: degenerate normalization Z = 0");
    const std::int64_t m = record.sample_count();
    double mean = 0.0, sq = 0.0;
    for (const std::int64_t z : record.outcomes) {
        if (z < 0 || z >= rd.p_tilde.values.size())
            throw ValidationError("f_hat_d: outcome index out of range");
        if (p_avg.values(z) <= 0.0)
            throw ComputeError("f_hat_d: recorded outcome with p_avg = 0 (inconsistent record)");
        const double f = 2.0 * rd.p_tilde.values(z) / rd.normalization - 1.0;
        mean += f;
        sq += f * f;
    }
    mean /= static_cast<double>(m);
    const double var = std::max(sq / static_cast<double>(m) - mean * mean, 0.0);

    EstimateReport report;
    report.value = mean;
    report.delta_stat = m > 1 ? std::sqrt(var / static_cast<double>(m - 1)) : 0.0;
    report.samples = m;
    report.time = p.time;
    report.normalization = rd.normalization;
    report.f_id_d = rd.normalization - 1.0;
    double xebd = 0.0;
    for (const std::int64_t z : record.outcomes) xebd += rd.p_tilde.values(z);
    report.f_xeb_d = xebd / static_cast<double>(m) - 1.0;
    return report;
}

double f_hat_d_bootstrap_sigma(const MeasurementRecord& record, const OutcomeDistribution& p,
                               const OutcomeDistribution& p_avg, int n_resamples,
                               std::uint64_t seed) {
    if (record.sample_count() < 2) throw ValidationError("bootstrap needs at least 2 samples");
    const RescaledDistribution rd = rescale(p, p_avg);
    const std::int64_t m = record.sample_count();
    std::vector<double> stat(record.outcomes.size());
    for (std::size_t i = 0; i < stat.size(); ++i)
        stat[i] = 2.0 * rd.p_tilde.values(record.outcomes[i]) / rd.normalization - 1.0;
    Rng rng(seed);
    double mean = 0.0, sq = 0.0;
    for (int r = 0; r < n_resamples; ++r) {
        double v = 0.0;
        for (std::int64_t i = 0; i < m; ++i)
            v += stat[rng.uniform_index(static_cast<std::uint64_t>(m))];
        v /= static_cast<double>(m);
        mean += v;
        sq += v * v;
    }
    mean /= n_resamples;
    return std::sqrt(std::max(sq / n_resamples - mean * mean, 0.0));
}

std::vector<double> f_e_moving(const std::vector<OutcomeDistribution>& q_series,
                               const std::vector<OutcomeDistribution>& p_series,
                               const std::vector<double>& times, double window) {
    if (q_series.size() != p_series.size() || q_series.size() != times.size())
        throw ValidationError("f_e_moving: series lengths differ");
    if (q_series.empty()) throw ValidationError("f_e_moving: empty series");
    const std::size_t n = times.size();
    if (n >= 3) {
        const double dt = times[1] - times[0];
        if (window < 3.0 * dt)
            throw ValidationError("f_e_moving: window must span at least 3 grid points");
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = times[i] - window / 2.0, hi = times[i] + window / 2.0;
        VectorXd pavg = VectorXd::Zero(p_series[i].values.size());
        int count = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (times[j] < lo - 1e-12 || times[j] > hi + 1e-12) continue;
            pavg += p_series[j].values;
            ++count;
        }
        pavg /= static_cast<double>(count); // edge windows shrink
        OutcomeDistribution mov;
        mov.values = std::move(pavg);
        mov.kind = DistributionKind::time_averaged;
        const double num = f_xeb_d(q_series[i], p_series[i], mov);
        const double den = f_id_d(p_series[i], mov);
        if (std::abs(den) < 1e-12)
            throw ComputeError("f_e_moving: degenerate moving F_id,d at t=" +
                               std::to_string(times[i]));
        out[i] = num / den;
    }
    return out;
}

MeasurementRecord sample_record(const OutcomeDistribution& q, std::int64_t samples,
                                std::uint64_t seed) {
    if (samples < 1) throw ValidationError("sample_record: need at least one sample");
    const double total = q.values.sum();
    if (std::abs(total - 1.0) > 1e-6)
        throw ValidationError("sample_record: distribution does not sum to 1");
    // Inverse CDF over the canonical index order.
    VectorXd cdf(q.values.size());
    double acc = 0.0;
    for (std::int64_t z = 0; z < q.values.size(); ++z) {
        acc += q.values(z);
        cdf(z) = acc;
    }
    Rng rng(seed);
    MeasurementRecord record;
    record.seed = seed;
    record.outcomes.resize(static_cast<std::size_t>(samples));
    for (auto& z : record.outcomes) {
        const double u = rng.uniform() * acc;
        const double* begin = cdf.data();
        const double* it = std::lower_bound(begin, begin + cdf.size(), u);
        z = std::min<std::int64_t>(it - begin, cdf.size() - 1);
    }
    return record;
}

} // namespace qbench
