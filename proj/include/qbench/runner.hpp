#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "qbench/config.hpp"
#include "qbench/estimators.hpp"

namespace qbench {

struct RunOptions {
    int threads = 1;          // recorded; module internals are sequential
    bool deterministic = false;
    std::optional<std::uint64_t> seed_override;
};

struct RunResult {
    int exit_code = 0;
    std::vector<std::filesystem::path> outputs;
    std::string message;
};

// Executes the configured experiment into out_dir (created if needed; an
// exclusive lock file guards concurrent runs). A manifest json is written
// atomically at the end.
RunResult run_experiment(const RunConfig& config, const std::filesystem::path& out_dir,
                         const RunOptions& options = {});

// Snapshot files: '#'-prefixed metadata header (model hash, time, count),
// one configuration string per line.
void write_snapshot(const std::filesystem::path& path, const std::string& model_hash, double time,
                    const Basis& basis, const MeasurementRecord& record);

struct SnapshotData {
    std::string model_hash;
    double time = 0.0;
    std::vector<Configuration> configurations;
};

SnapshotData read_snapshot(const std::filesystem::path& path);

// Versioned binary spectral cache: header (magic, version, model hash, D,
// eps_deg) + little-endian doubles (eigenvalues, eigenvectors column-major,
// initial-state amplitudes re/im).
void write_spectral_cache(const std::filesystem::path& path, const std::string& model_hash,
                          const LatticeSpec& lattice, const SpectralData& sd,
                          const QuantumState& psi0);

struct SpectralCache {
    std::string model_hash;
    LatticeSpec lattice;
    SpectralData spectral;
    QuantumState psi0;
};

SpectralCache read_spectral_cache(const std::filesystem::path& path);

// Builds basis/Hamiltonian/initial state from a parsed config and caches the
// spectrum when a cache directory is set (QBENCH_CACHE_DIR or explicit).
struct PreparedModel {
    Basis basis;
    SparseOperator hamiltonian;
    SpectralData spectral;
    QuantumState psi0;
};

PreparedModel prepare_model(const RunConfig& config);

// F_d_hat |- delta_stat (and the F_e variant) for an external snapshot
// against a cached reference. Hash mismatches and unknown configurations
// are hard errors.
struct IngestResult {
    EstimateReport f_d_hat;
    double f_e_value = 0.0;
};

IngestResult ingest_snapshot(const std::filesystem::path& snapshot_path,
                             const std::filesystem::path& cache_path);

// Merges estimate-style CSVs (t,name,value,delta_stat,...) under a directory
// into summary.csv with a source column.
std::filesystem::path merge_reports(const std::filesystem::path& out_dir);

// CSV with the config-hash echo header; 17 significant digits.
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::string& config_hash);
    ~CsvWriter();
    void columns(const std::vector<std::string>& names);
    void row(const std::vector<double>& values);
    void raw_row(const std::string& line);
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
    std::ofstream out_;
};

} // namespace qbench
