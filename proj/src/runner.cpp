#include "qbench/runner.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qbench/applications.hpp"
#include "qbench/mps.hpp"
#include "qbench/rng.hpp"
#include "qbench/statistics.hpp"
#include "qbench/trajectory.hpp"

namespace qbench {

using nlohmann::json;

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double peak_rss_mb() {
    rusage usage{};
    getrusage(RUSAGE_SELF, &usage);
    return static_cast<double>(usage.ru_maxrss) / 1024.0;
}

// Exclusive lock file; a stale lock is a hard error (one run owns the
// output directory).
class DirectoryLock {
  public:
    explicit DirectoryLock(const std::filesystem::path& dir) : path_(dir / ".qbench.lock") {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        FILE* f = std::fopen(path_.c_str(), "wx");
        if (!f)
            throw ValidationError("output directory is locked by " + path_.string() +
                                  " (remove the stale lock if no run is active)");
        std::fputs("qbench\n", f);
        std::fclose(f);
    }
    ~DirectoryLock() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }

  private:
    std::filesystem::path path_;
};

} // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& config_hash)
    : path_(path), out_(path) {
    if (!out_) throw ComputeError("cannot open output file " + path.string());
    out_ << "# qbench config_hash=" << config_hash << "\n";
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::columns(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) out_ << (i ? "," : "") << names[i];
    out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
        out_ << (i ? "," : "") << format_double(values[i]);
    out_ << "\n";
}

void CsvWriter::raw_row(const std::string& line) { out_ << line << "\n"; }

PreparedModel prepare_model(const RunConfig& config) {
    Basis basis = enumerate_basis(config.lattice);
    SparseOperator h = build_hamiltonian(basis, config.model);
    SpectralData sd = diagonalize(h, config.quench.eps_deg_rel, config.quench.dense_threshold);

    QuantumState psi0;
    const auto& init = config.initial_state;
    if (init.type == "product") {
        const Configuration z = configuration_from_string(init.occupations);
        const auto index = basis.index_of(z);
        if (!index)
            throw ValidationError("initial_state.occupations '" + init.occupations +
                                  "' is not in the constrained basis");
        psi0 = QuantumState::basis_state(basis, *index);
    } else if (init.type == "basis-index") {
        psi0 = QuantumState::basis_state(basis, init.index);
    } else if (init.type == "gibbs") {
        // |psi0> ~ sum_E exp(-beta E / 2) |E> on the shifted spectrum.
        VectorXd w(sd.dimension());
        for (std::int64_t e = 0; e < sd.dimension(); ++e)
            w(e) = std::exp(-0.5 * init.beta * (sd.eigenvalues()(e) - sd.eigenvalues()(0)));
        VectorXcd amps(sd.dimension());
        amps.real() = sd.eigenvectors() * w;
        amps.imag().setZero();
        amps /= amps.norm();
        psi0 = QuantumState{std::move(amps), 0.0, nullptr};
    } else if (init.type == "amplitudes-file") {
        std::ifstream in(init.path);
        if (!in) throw ValidationError("cannot open amplitudes file " + init.path);
        VectorXcd amps(basis.dimension());
        double re = 0.0, im = 0.0;
        for (std::int64_t i = 0; i < basis.dimension(); ++i) {
            if (!(in >> re >> im))
                throw ValidationError("amplitudes file too short at row " + std::to_string(i));
            amps(i) = Complex(re, im);
        }
        const double nrm = amps.norm();
        if (nrm < 1e-12) throw ValidationError("amplitudes file holds a zero state");
        amps /= nrm;
        psi0 = QuantumState{std::move(amps), 0.0, nullptr};
    } else {
        throw ValidationError("unsupported initial_state.type " + init.type);
    }
    psi0.basis = nullptr; // The basis owner moves; re-point below.

    PreparedModel prepared{std::move(basis), std::move(h), std::move(sd), std::move(psi0)};
    prepared.psi0.basis = &prepared.basis;
    return prepared;
}

void write_snapshot(const std::filesystem::path& path, const std::string& model_hash, double time,
                    const Basis& basis, const MeasurementRecord& record) {
    std::ofstream out(path);
    if (!out) throw ComputeError("cannot open snapshot file " + path.string());
    out << "# qbench snapshot model_hash=" << model_hash << " t=" << format_double(time)
        << " M=" << record.sample_count() << "\n";
    for (const auto z : record.outcomes)
        out << configuration_to_string(basis.configuration_of(z)) << "\n";
}

SnapshotData read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open snapshot file " + path.string());
    SnapshotData data;
    std::string line;
    std::int64_t line_number = 0;
    std::int64_t declared = -1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::stringstream ss(line);
            std::string tok;
            while (ss >> tok) {
                if (tok.rfind("model_hash=", 0) == 0) data.model_hash = tok.substr(11);
                if (tok.rfind("t=", 0) == 0) data.time = std::stod(tok.substr(2));
                if (tok.rfind("M=", 0) == 0) declared = std::stoll(tok.substr(2));
            }
            continue;
        }
        try {
            data.configurations.push_back(configuration_from_string(line));
        } catch (const ValidationError& err) {
            throw ValidationError("snapshot " + path.string() + " line " +
                                  std::to_string(line_number) + ": " + err.what());
        }
    }
    if (data.model_hash.empty())
        throw ValidationError("snapshot " + path.string() + " is missing the model_hash header");
    if (declared >= 0 && declared != static_cast<std::int64_t>(data.configurations.size()))
        throw ValidationError("snapshot " + path.string() + " declares M=" +
                              std::to_string(declared) + " but holds " +
                              std::to_string(data.configurations.size()) + " lines");
    return data;
}

namespace {

constexpr char kCacheMagic[8] = {'Q', 'B', 'S', 'P', 'E', 'C', '0', '1'};

void write_doubles(std::ofstream& out, const double* data, std::int64_t count) {
    // Little-endian hosts only (x86-64/aarch64); asserted at cache open.
    out.write(reinterpret_cast<const char*>(data), count * sizeof(double));
}

void read_doubles(std::ifstream& in, double* data, std::int64_t count) {
    in.read(reinterpret_cast<char*>(data), count * sizeof(double));
    if (!in) throw ValidationError("spectral cache truncated");
}

} // namespace

void write_spectral_cache(const std::filesystem::path& path, const std::string& model_hash,
                          const LatticeSpec& lattice, const SpectralData& sd,
                          const QuantumState& psi0) {
    static_assert(std::endian::native == std::endian::little,
                  "spectral cache assumes a little-endian host");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ComputeError("cannot open cache file " + path.string());
    out.write(kCacheMagic, sizeof(kCacheMagic));
    char hash[17] = {};
    std::snprintf(hash, sizeof(hash), "%16s", model_hash.c_str());
    out.write(hash, 16);
    const std::int32_t lattice_words[7] = {
        static_cast<std::int32_t>(lattice.kind), lattice.length,   lattice.rows,
        lattice.cols,                            lattice.n_bosons, lattice.n_up,
        lattice.n_down};
    out.write(reinterpret_cast<const char*>(lattice_words), sizeof(lattice_words));
    const std::int32_t periodic = lattice.periodic ? 1 : 0;
    out.write(reinterpret_cast<const char*>(&periodic), sizeof(periodic));
    const std::int64_t d = sd.dimension();
    const double eps = sd.degeneracy_tolerance();
    out.write(reinterpret_cast<const char*>(&d), sizeof(d));
    out.write(reinterpret_cast<const char*>(&eps), sizeof(eps));
    write_doubles(out, sd.eigenvalues().data(), d);
    write_doubles(out, sd.eigenvectors().data(), d * d);
    VectorXd re = psi0.amplitudes.real(), im = psi0.amplitudes.imag();
    write_doubles(out, re.data(), d);
    write_doubles(out, im.data(), d);
}

SpectralCache read_spectral_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open cache file " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCacheMagic, 8) != 0)
        throw ValidationError("not a qbench spectral cache: " + path.string());
    char hash[17] = {};
    in.read(hash, 16);
    std::int32_t lattice_words[7] = {};
    in.read(reinterpret_cast<char*>(lattice_words), sizeof(lattice_words));
    std::int32_t periodic = 0;
    in.read(reinterpret_cast<char*>(&periodic), sizeof(periodic));
    std::int64_t d = 0;
    double eps = 0.0;
    in.read(reinterpret_cast<char*>(&d), sizeof(d));
    in.read(reinterpret_cast<char*>(&eps), sizeof(eps));
    if (!in || d < 1) throw ValidationError("corrupt spectral cache header");
    VectorXd evals(d);
    MatrixXd evecs(d, d);
    read_doubles(in, evals.data(), d);
    read_doubles(in, evecs.data(), d * d);
    VectorXd re(d), im(d);
    read_doubles(in, re.data(), d);
    read_doubles(in, im.data(), d);

    SpectralCache cache;
    std::string hash_text(hash);
    const auto first = hash_text.find_first_not_of(' ');
    cache.model_hash = first == std::string::npos ? "" : hash_text.substr(first);
    cache.lattice.kind = static_cast<ModelKind>(lattice_words[0]);
    cache.lattice.length = lattice_words[1];
    cache.lattice.rows = lattice_words[2];
    cache.lattice.cols = lattice_words[3];
    cache.lattice.n_bosons = lattice_words[4];
    cache.lattice.n_up = lattice_words[5];
    cache.lattice.n_down = lattice_words[6];
    cache.lattice.periodic = periodic != 0;
    const double width = std::max(evals(d - 1) - evals(0), 1e-300);
    cache.spectral = SpectralData::from_eigensystem(std::move(evals), std::move(evecs),
                                                    eps / width);
    VectorXcd amps(d);
    amps.real() = re;
    amps.imag() = im;
    cache.psi0 = QuantumState{std::move(amps), 0.0, nullptr};
    return cache;
}

IngestResult ingest_snapshot(const std::filesystem::path& snapshot_path,
                             const std::filesystem::path& cache_path) {
    const SnapshotData snapshot = read_snapshot(snapshot_path);
    const SpectralCache cache = read_spectral_cache(cache_path);
    if (snapshot.model_hash != cache.model_hash)
        throw ValidationError("snapshot model hash " + snapshot.model_hash +
                              " does not match cache " + cache.model_hash);
    const Basis basis = enumerate_basis(cache.lattice);
    if (basis.dimension() != cache.spectral.dimension())
        throw ValidationError("spectral cache dimension does not match its lattice spec");

    const QuantumState psi_t = evolve_exact(cache.spectral, cache.psi0, snapshot.time);
    const OutcomeDistribution p = outcome_distribution(psi_t);
    const OutcomeDistribution p_avg = time_averaged_distribution(cache.spectral, cache.psi0);

    MeasurementRecord record;
    record.source = "ingested";
    record.provenance = snapshot_path.string();
    record.outcomes.reserve(snapshot.configurations.size());
    for (std::size_t i = 0; i < snapshot.configurations.size(); ++i) {
        const auto index = basis.index_of(snapshot.configurations[i]);
        if (!index)
            throw ValidationError("snapshot line " + std::to_string(i + 2) +
                                  ": configuration '" +
                                  configuration_to_string(snapshot.configurations[i]) +
                                  "' is not in the model basis");
        record.outcomes.push_back(*index);
    }

    IngestResult result;
    result.f_d_hat = f_hat_d(record, p, p_avg);
    const double fidd = result.f_d_hat.f_id_d;
    result.f_e_value = std::abs(fidd) < 1e-12 ? 0.0 : result.f_d_hat.f_xeb_d / fidd;
    return result;
}

namespace {

struct ExperimentContext {
    const RunConfig& config;
    const std::filesystem::path& out_dir;
    std::vector<std::filesystem::path> outputs;

    std::filesystem::path file(const std::string& suffix) const {
        return out_dir / (config.output_prefix + "_" + suffix);
    }
};

std::vector<SparseOperator> jump_operators_for(const RunConfig& config, const Basis& basis) {
    const ErrorModel model = config.noise.error_model.empty()
                                 ? default_error_model(config.lattice.kind)
                                 : error_model_from_name(config.noise.error_model);
    return build_jump_operators(basis, model);
}

TrajectorySpec trajectory_spec_for(const RunConfig& config,
                                   const std::vector<SparseOperator>& ops) {
    TrajectorySpec spec;
    spec.jump_operators = &ops;
    spec.gamma = config.noise.gamma;
    spec.rate_convention = config.noise.rate_convention == "total"
                               ? RateConvention::total
                               : RateConvention::per_operator;
    spec.sample_times = config.quench.times;
    spec.t_final = config.quench.times.empty() ? 0.0 : config.quench.times.back();
    spec.seed = config.noise.seed;
    spec.unraveling = config.noise.unraveling == "norm-weighted" ? Unraveling::norm_weighted
                                                                 : Unraveling::uniform_poisson;
    spec.krylov_tol = config.quench.krylov_tol;
    return spec;
}

bool wants(const RunConfig& config, const std::string& name) {
    const auto& which = config.estimators.which;
    return std::find(which.begin(), which.end(), name) != which.end();
}

void run_decay_curve(ExperimentContext& ctx) {
    const RunConfig& config = ctx.config;
    PreparedModel model = prepare_model(config);
    const OutcomeDistribution p_avg = time_averaged_distribution(model.spectral, model.psi0);
    const auto ops = jump_operators_for(config, model.basis);
    const TrajectorySpec spec = trajectory_spec_for(config, ops);
    const EnsembleResult ensemble =
        run_trajectory_ensemble(model.spectral, model.psi0, spec, config.noise.trajectories);

    const MatrixXcd ideal =
        evolve_exact_batch(model.spectral, model.psi0, config.quench.times);

    CsvWriter csv(ctx.file("decay.csv"), config.config_hash);
    csv.columns({"t", "F", "F_d", "F_hat_d", "delta_stat", "F_c", "F_XEB", "F_e", "F_id_d",
                 "F_xeb_d", "Z"});
    for (std::size_t i = 0; i < config.quench.times.size(); ++i) {
        const double t = config.quench.times[i];
        OutcomeDistribution p;
        p.values = ideal.col(static_cast<std::int64_t>(i)).cwiseAbs2();
        p.time = t;
        OutcomeDistribution q;
        q.values = ensemble.q.col(static_cast<std::int64_t>(i));
        q.time = t;

        const RescaledDistribution rd = rescale(p, p_avg);
        const MeasurementRecord record = sample_record(
            q, config.estimators.samples,
            Rng::substream(config.estimators.seed, static_cast<std::uint64_t>(i)));
        const EstimateReport hat = f_hat_d(record, p, p_avg);
        csv.row({t, ensemble.fidelity[i], f_d(q, p, p_avg), hat.value, hat.delta_stat,
                 f_c(q, p), f_xeb(q, p, model.basis.dimension()), f_e(q, p, p_avg),
                 rd.normalization - 1.0, f_xeb_d(q, p, p_avg), rd.normalization});
    }
    ctx.outputs.push_back(ctx.file("decay.csv"));
}

void run_pt_statistics(ExperimentContext& ctx) {
    const RunConfig& config = ctx.config;
    PreparedModel model = prepare_model(config);
    const double t = config.quench.times.at(0);
    const OutcomeDistribution p_avg = time_averaged_distribution(model.spectral, model.psi0);
    const OutcomeDistribution p =
        outcome_distribution(evolve_exact(model.spectral, model.psi0, t));
    const RescaledDistribution rd = rescale(p, p_avg);
    const std::int64_t d = model.basis.dimension();

    // Histogram of p~ weighted by p_avg and of D p unweighted, with the
    // exponential reference.
    const double x_max = 8.0, width = 0.25;
    const int bins = static_cast<int>(x_max / width);
    std::vector<double> weighted(bins, 0.0), unweighted(bins, 0.0);
    for (std::int64_t z = 0; z < d; ++z) {
        const int bw = static_cast<int>(rd.p_tilde.values(z) / width);
        if (bw >= 0 && bw < bins) weighted[bw] += p_avg.values(z) / width;
        const int bu = static_cast<int>(static_cast<double>(d) * p.values(z) / width);
        if (bu >= 0 && bu < bins) unweighted[bu] += 1.0 / (static_cast<double>(d) * width);
    }
    CsvWriter hist(ctx.file("pt_histogram.csv"), config.config_hash);
    hist.columns({"x", "density_p_tilde_weighted", "density_p_times_D", "exp_reference"});
    for (int b = 0; b < bins; ++b) {
        const double x = (b + 0.5) * width;
        hist.row({x, weighted[b], unweighted[b], std::exp(-x)});
    }
    ctx.outputs.push_back(ctx.file("pt_histogram.csv"));

    const EffectiveDimension ed = effective_dimension(model.spectral, model.psi0, p_avg);
    const auto moments = empirical_outcome_moments(rd.p_tilde, p_avg, 3, ed.d_beta_inv());
    VectorXd p_scaled = static_cast<double>(d) * p.values;
    CsvWriter summary(ctx.file("pt_summary.csv"), config.config_hash);
    summary.columns({"t", "P2", "P3", "ks_p_tilde", "ks_p_times_D", "D_beta", "Z"});
    summary.row({t, moments[1].empirical, moments[2].empirical,
                 weighted_ks_exponential(rd.p_tilde.values, p_avg.values),
                 weighted_ks_exponential(p_scaled, VectorXd()), ed.d_beta, rd.normalization});
    ctx.outputs.push_back(ctx.file("pt_summary.csv"));
}

void run_single_error_response(ExperimentContext& ctx) {
    const RunConfig& config = ctx.config;
    PreparedModel model = prepare_model(config);
    const OutcomeDistribution p_avg = time_averaged_distribution(model.spectral, model.psi0);
    const auto& se = *config.single_error;
    const auto ops = jump_operators_for(config, model.basis);

    std::vector<int> sites;
    if (se.site >= 0) {
        sites.push_back(se.site);
    } else {
        for (std::size_t j = 0; j < ops.size(); ++j) sites.push_back(static_cast<int>(j));
    }

    std::vector<double> taus, response, fids;
    CsvWriter csv(ctx.file("response.csv"), config.config_hash);
    csv.columns({"t", "tau", "F", "F_d_mean"});
    for (const double t : config.quench.times) {
        if (t < se.t_err) continue;
        const auto ideal = evolve_exact(model.spectral, model.psi0, t);
        const OutcomeDistribution p = outcome_distribution(ideal);
        double fd_mean = 0.0, f_mean = 0.0;
        for (const int site : sites) {
            const auto err =
                single_error_state(model.spectral, model.psi0, ops.at(site), se.t_err, t);
            const OutcomeDistribution q = outcome_distribution(err);
            fd_mean += f_d(q, p, p_avg);
            f_mean += std::norm((ideal.amplitudes.adjoint() * err.amplitudes).value());
        }
        fd_mean /= static_cast<double>(sites.size());
        f_mean /= static_cast<double>(sites.size());
        csv.row({t, t - se.t_err, f_mean, fd_mean});
        taus.push_back(t - se.t_err);
        response.push_back(fd_mean);
        fids.push_back(f_mean);
    }
    ctx.outputs.push_back(ctx.file("response.csv"));

    const double f_beta = fids.empty() ? 0.0 : fids.back();
    CsvWriter summary(ctx.file("response_summary.csv"), config.config_hash);
    summary.columns({"F_beta", "tau_d"});
    summary.row({f_beta, delay_time(taus, response, f_beta)});
    ctx.outputs.push_back(ctx.file("response_summary.csv"));
}

void run_sample_complexity(ExperimentContext& ctx) {
    const RunConfig& config = ctx.config;
    PreparedModel model = prepare_model(config);
    const OutcomeDistribution p_avg = time_averaged_distribution(model.spectral, model.psi0);
    const std::int64_t m = config.estimators.samples;
    const int replicates = 200;

    CsvWriter csv(ctx.file("complexity.csv"), config.config_hash);
    csv.columns({"t", "F", "M", "M_var_F_hat", "prediction"});
    for (std::size_t i = 0; i < config.quench.times.size(); ++i) {
        const double t = config.quench.times[i];
        const OutcomeDistribution p =
            outcome_distribution(evolve_exact(model.spectral, model.psi0, t));
        double mean = 0.0, sq = 0.0;
        for (int r = 0; r < replicates; ++r) {
            const auto record = sample_record(
                p, m,
                Rng::substream(config.estimators.seed, 1000 * i + static_cast<std::uint64_t>(r)));
            const double v = f_hat_d(record, p, p_avg).value;
            mean += v;
            sq += v * v;
        }
        mean /= replicates;
        const double var = std::max(sq / replicates - mean * mean, 0.0);
        csv.row({t, 1.0, static_cast<double>(m), static_cast<double>(m) * var, 2.0});
    }
    ctx.outputs.push_back(ctx.file("complexity.csv"));
}

void run_greedy_fit(ExperimentContext& ctx) {
    const RunConfig& config = ctx.config;
    if (config.lattice.kind != ModelKind::spin_chain)
        throw ValidationError("greedy-fit drives trapped-ion disorder fields; model.kind must "
                              "be spin-chain");
    const auto& fit_config = *config.fit;
    Basis basis = enumerate_basis(config.lattice);
    const QuantumState psi0 = QuantumState::basis_state(basis, 0);
    const int n = fit_config.fields;
    if (n != config.lattice.sites())
        throw ValidationError("fit.fields must equal the site count");

    Rng truth_rng(fit_config.truth_seed);
    std::vector<double> truth(n);
    for (auto& v : truth) v = truth_rng.uniform(fit_config.lo, fit_config.hi);

    auto build = [&](const std::vector<double>& theta) {
        ModelParams params = config.model;
        params.disorder_fields = theta;
        return build_hamiltonian(basis, params);
    };

    const SpectralData sd_truth =
        diagonalize(build(truth), config.quench.eps_deg_rel, config.quench.dense_threshold);
    std::vector<TimedRecord> records;
    const bool noisy = config.noise.gamma > 0.0;
    std::vector<SparseOperator> ops;
    if (noisy) ops = jump_operators_for(config, basis);
    for (std::size_t k = 0; k < fit_config.times.size(); ++k) {
        const double t = fit_config.times[k];
        OutcomeDistribution q;
        if (noisy) {
            TrajectorySpec spec = trajectory_spec_for(config, ops);
            spec.sample_times = {t};
            spec.t_final = t;
            const auto ensemble =
                run_trajectory_ensemble(sd_truth, psi0, spec, config.noise.trajectories);
            q.values = ensemble.q.col(0);
        } else {
            q = outcome_distribution(evolve_exact(sd_truth, psi0, t));
        }
        q.time = t;
        records.push_back({sample_record(q, fit_config.samples_per_time,
                                         Rng::substream(config.estimators.seed, k)),
                           t});
    }

    ParameterSpace space;
    for (int j = 0; j < n; ++j)
        space.parameters.push_back({"delta" + std::to_string(j), fit_config.lo, fit_config.hi,
                                    fit_config.grid_points});
    space.build = build;
    GreedyFitOptions options;
    options.multi_starts = fit_config.multi_starts;
    options.eps_deg_rel = config.quench.eps_deg_rel;
    const GreedyFitResult result =
        greedy_fit(records, space, psi0, config.estimators.seed, options);

    CsvWriter csv(ctx.file("fit.csv"), config.config_hash);
    csv.columns({"field", "truth", "estimate", "uncertainty"});
    for (int j = 0; j < n; ++j)
        csv.row({static_cast<double>(j), truth[j], result.theta[j], result.uncertainty[j]});
    ctx.outputs.push_back(ctx.file("fit.csv"));

    std::ofstream trace(ctx.file("fit_trace.log"));
    trace << "# F_d_hat after each accepted coordinate maximisation\n";
    for (const double v : result.trace) trace << format_double(v) << "\n";
    ctx.outputs.push_back(ctx.file("fit_trace.log"));
}

void run_scan(ExperimentContext& ctx) {
    const RunConfig& config = ctx.config;
    const auto& scan_config = *config.scan;
    std::vector<double> grid;
    for (int i = 0; i < scan_config.points; ++i)
        grid.push_back(scan_config.lo +
                       (scan_config.hi - scan_config.lo) * i / (scan_config.points - 1));

    std::vector<ScanPoint> points;
    if (scan_config.type == "phase") {
        PreparedModel model = prepare_model(config);
        const auto base_index = *model.basis.index_of(
            configuration_from_string(config.initial_state.occupations));
        const auto rotated = [&]() -> std::int64_t {
            // Locally rotated partner: move one particle across the middle
            // bond (Hubbard chains) or flip the middle spin (spin chains).
            Configuration z = model.basis.configuration_of(base_index);
            const int mid = config.lattice.sites() / 2;
            switch (config.lattice.kind) {
                case ModelKind::bose_hubbard:
                    z[mid - 1] += 1;
                    z[mid] -= 1;
                    break;
                case ModelKind::spin_chain:
                case ModelKind::pxp_1d:
                case ModelKind::pxp_2d:
                    z[mid] ^= 1;
                    break;
                case ModelKind::fermi_hubbard: {
                    const int l = config.lattice.sites();
                    z[mid] = 1;
                    z[l + mid] = 1;
                    z[mid + 1] = 0;
                    z[l + mid - 1] = 0;
                    break;
                }
            }
            const auto idx = model.basis.index_of(z);
            if (!idx) throw ComputeError("rotated partner left the constrained basis");
            return *idx;
        }();
        auto family = [&](double phi) {
            VectorXcd amps = VectorXcd::Zero(model.basis.dimension());
            amps(base_index) = std::cos(phi);
            amps(rotated) = Complex(0.0, std::sin(phi));
            return QuantumState{std::move(amps), 0.0, &model.basis};
        };
        points = state_family_scan(model.spectral, family, scan_config.theta_star, grid,
                                   scan_config.samples, scan_config.time, scan_config.seed);
    } else {
        Basis basis = enumerate_basis(config.lattice);
        const SparseOperator quench_h = build_hamiltonian(basis, config.model);
        auto family = [&](double coupling) {
            ModelParams params = config.model;
            params.disorder_fields.reset();
            params.interaction = coupling;
            return build_hamiltonian(basis, params);
        };
        points = ground_state_scan(quench_h, family, scan_config.theta_star, grid,
                                   scan_config.samples, scan_config.time, scan_config.seed,
                                   config.quench.eps_deg_rel);
    }

    CsvWriter csv(ctx.file("scan.csv"), config.config_hash);
    csv.columns({"theta", "F_hat_d", "delta_stat", "F"});
    for (const auto& point : points)
        csv.row({point.theta, point.f_hat, point.delta_stat, point.fidelity});
    ctx.outputs.push_back(ctx.file("scan.csv"));
}

void run_mps_model(ExperimentContext& ctx) {
    const RunConfig& config = ctx.config;
    const auto& mps_config = *config.mps;
    CsvWriter csv(ctx.file("mps.csv"), config.config_hash);
    csv.columns({"N_A", "F_xeb_plus_one_mc", "se", "prediction_exact", "prediction_asymptotic",
                 "F_id_plus_one_mc", "F_id_se", "f_XI", "mean_fidelity"});
    for (const int support : mps_config.supports) {
        MpsModelParams params;
        params.local_dim = mps_config.local_dim;
        params.bond_dim = mps_config.bond_dim;
        params.sites = mps_config.sites;
        params.error_support = support;
        params.error_offset = std::min(mps_config.offset, mps_config.sites - support + 1);
        params.theta = mps_config.theta;
        const auto mc = mps_monte_carlo(params, mps_config.samples, mps_config.seed);
        const auto pred = mps_crossover_prediction(params, params.mean_fidelity());
        csv.row({static_cast<double>(support), mc.f_xeb_plus_one, mc.f_xeb_plus_one_se,
                 pred.f_xeb_plus_one, pred.f_xeb_plus_one_asymptotic, mc.f_id_plus_one,
                 mc.f_id_plus_one_se, pred.f_id_plus_one, params.mean_fidelity()});
    }
    ctx.outputs.push_back(ctx.file("mps.csv"));
}

void run_failure_case(ExperimentContext& ctx) {
    const RunConfig& config = ctx.config;
    PreparedModel model = prepare_model(config);
    const OutcomeDistribution p_avg = time_averaged_distribution(model.spectral, model.psi0);

    if (config.failure_case == "non-interacting") {
        const auto report = no_resonance_check(
            model.spectral.eigenvalues(), 1e-9 * model.spectral.spectral_width());
        CsvWriter csv(ctx.file("failure_resonances.csv"), config.config_hash);
        csv.columns({"resonances", "phs_pairs", "pair_sums"});
        csv.row({static_cast<double>(report.resonance_count),
                 static_cast<double>(report.phs_pairs),
                 static_cast<double>(report.pair_sums)});
        ctx.outputs.push_back(ctx.file("failure_resonances.csv"));
    }

    // Common curve: F, F_d, F_d_ph, F_e (plus moving-average F_e for the
    // inhomogeneous case) after a single error.
    if (!config.single_error) return;
    const auto& se = *config.single_error;
    const auto ops = jump_operators_for(config, model.basis);
    std::vector<double> times;
    std::vector<OutcomeDistribution> p_series, q_series;
    CsvWriter csv(ctx.file("failure_curve.csv"), config.config_hash);
    csv.columns({"t", "F", "F_d", "F_d_ph", "F_e", "F_id_d"});
    for (const double t : config.quench.times) {
        if (t < se.t_err) continue;
        const auto ideal = evolve_exact(model.spectral, model.psi0, t);
        const auto err =
            single_error_state(model.spectral, model.psi0, ops.at(se.site), se.t_err, t);
        const OutcomeDistribution p = outcome_distribution(ideal);
        const OutcomeDistribution q = outcome_distribution(err);
        const double fid = std::norm((ideal.amplitudes.adjoint() * err.amplitudes).value());
        csv.row({t, fid, f_d(q, p, p_avg), f_d_ph(q, p, p_avg), f_e(q, p, p_avg),
                 f_id_d(p, p_avg)});
        times.push_back(t);
        p_series.push_back(p);
        q_series.push_back(q);
    }
    ctx.outputs.push_back(ctx.file("failure_curve.csv"));

    if (config.failure_case == "inhomogeneous" && times.size() >= 5) {
        const double window = 4.0 * (times[1] - times[0]);
        const auto moving = f_e_moving(q_series, p_series, times, window);
        CsvWriter csv2(ctx.file("failure_moving.csv"), config.config_hash);
        csv2.columns({"t", "F_e_moving"});
        for (std::size_t i = 0; i < times.size(); ++i) csv2.row({times[i], moving[i]});
        ctx.outputs.push_back(ctx.file("failure_moving.csv"));
    }
}

} // namespace

RunResult run_experiment(const RunConfig& config, const std::filesystem::path& out_dir,
                         const RunOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    RunResult result;
    DirectoryLock lock(out_dir);

    RunConfig effective = config;
    if (options.seed_override) {
        effective.noise.seed = *options.seed_override;
        effective.estimators.seed = *options.seed_override;
    }
    ExperimentContext effective_ctx{effective, out_dir, {}};

    std::string status = "ok";
    std::string error_message;
    try {
        switch (effective.experiment) {
            case ExperimentKind::decay_curve: run_decay_curve(effective_ctx); break;
            case ExperimentKind::pt_statistics: run_pt_statistics(effective_ctx); break;
            case ExperimentKind::single_error_response:
                run_single_error_response(effective_ctx);
                break;
            case ExperimentKind::sample_complexity: run_sample_complexity(effective_ctx); break;
            case ExperimentKind::greedy_fit: run_greedy_fit(effective_ctx); break;
            case ExperimentKind::scan: run_scan(effective_ctx); break;
            case ExperimentKind::mps_model: run_mps_model(effective_ctx); break;
            case ExperimentKind::failure_case: run_failure_case(effective_ctx); break;
        }
    } catch (const ValidationError& err) {
        status = "validation-error";
        error_message = err.what();
        result.exit_code = 1;
    } catch (const std::exception& err) {
        status = "runtime-error";
        error_message = err.what();
        result.exit_code = 2;
    }
    result.outputs = effective_ctx.outputs;
    result.message = error_message;

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest;
    manifest["config_hash"] = effective.config_hash;
    manifest["model_hash"] = effective.model_hash;
    manifest["experiment"] = experiment_kind_name(effective.experiment);
    manifest["qbench_version"] = "0.1.0";
    manifest["status"] = status;
    if (!error_message.empty()) manifest["error"] = error_message;
    manifest["wall_seconds"] = wall;
    manifest["peak_rss_mb"] = peak_rss_mb();
    manifest["threads"] = options.threads;
    manifest["deterministic"] = options.deterministic;
    json files = json::array();
    for (const auto& f : result.outputs) files.push_back(f.filename().string());
    manifest["outputs"] = files;

    const auto manifest_path = out_dir / (effective.output_prefix + "_manifest.json");
    const auto tmp_path = out_dir / (effective.output_prefix + "_manifest.json.tmp");
    {
        std::ofstream out(tmp_path);
        out << manifest.dump(2) << "\n";
    }
    std::filesystem::rename(tmp_path, manifest_path);
    result.outputs.push_back(manifest_path);
    return result;
}

std::filesystem::path merge_reports(const std::filesystem::path& out_dir) {
    const auto summary_path = out_dir / "summary.csv";
    std::ofstream out(summary_path);
    if (!out) throw ComputeError("cannot open " + summary_path.string());
    out << "# qbench merged report\n";
    out << "source,row\n";
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(out_dir)) {
        if (entry.path().extension() == ".csv" && entry.path().filename() != "summary.csv")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        std::ifstream in(file);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            out << file.filename().string() << ",\"" << line << "\"\n";
        }
    }
    return summary_path;
}

} // namespace qbench
