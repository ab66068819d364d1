#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qbench/basis.hpp"
#include "qbench/operators.hpp"
#include "qbench/spectral.hpp"

namespace qbench {

enum class ExperimentKind {
    decay_curve,
    pt_statistics,
    single_error_response,
    sample_complexity,
    greedy_fit,
    scan,
    mps_model,
    failure_case,
};

std::string experiment_kind_name(ExperimentKind kind);

struct InitialStateConfig {
    std::string type = "product"; // product | basis-index | gibbs | amplitudes-file
    std::string occupations;      // canonical configuration string
    std::int64_t index = 0;
    double beta = 1.0;
    std::string path;
};

struct QuenchConfig {
    std::vector<double> times;   // sample grid
    double average_window = 500.0;
    double average_step = 0.25;
    double krylov_tol = 1e-9;
    double eps_deg_rel = 1e-9;
    std::int64_t dense_threshold = 20000;
};

struct NoiseConfig {
    double gamma = 0.0;
    std::string rate_convention = "total"; // total | per-operator
    std::string error_model;               // empty -> model default
    std::int64_t trajectories = 2000;
    std::uint64_t seed = 0;
    std::string unraveling = "uniform-poisson"; // | norm-weighted
};

struct EstimatorConfig {
    std::vector<std::string> which{"F_d", "F_hat_d", "F_XEB", "F_c", "F_e"};
    std::int64_t samples = 1000;
    std::uint64_t seed = 0;
    int bootstrap_resamples = 0;
};

struct SingleErrorConfig {
    int site = 0;
    double t_err = 5.0;
};

struct FitConfig {
    int fields = 8;
    double lo = -0.5, hi = 0.5;
    int grid_points = 21;
    std::uint64_t truth_seed = 0;
    std::vector<double> times{3.0, 4.5, 6.0, 7.5};
    std::int64_t samples_per_time = 250;
    int multi_starts = 3;
};

struct ScanConfig {
    std::string type = "phase"; // phase | coupling
    double theta_star = 0.0;
    double lo = 0.0, hi = 1.0;
    int points = 21;
    double time = 5.0;
    std::int64_t samples = 1000;
    std::uint64_t seed = 0;
};

struct MpsConfig {
    int local_dim = 2, bond_dim = 2, sites = 8;
    std::vector<int> supports{1, 2, 4};
    int offset = 3;
    double theta = 0.7853981633974483;
    std::int64_t samples = 500;
    std::uint64_t seed = 0;
};

struct RunConfig {
    int schema_version = 1;
    ExperimentKind experiment = ExperimentKind::decay_curve;
    ModelParams model;
    LatticeSpec lattice;
    InitialStateConfig initial_state;
    QuenchConfig quench;
    NoiseConfig noise;
    EstimatorConfig estimators;
    std::optional<SingleErrorConfig> single_error;
    std::optional<FitConfig> fit;
    std::optional<ScanConfig> scan;
    std::optional<MpsConfig> mps;
    std::string failure_case; // phs | non-interacting | low-temperature | inhomogeneous
    std::string output_prefix = "run";
    double memory_budget_gb = 4.0;

    std::string config_hash;  // canonical-json FNV hash, filled on parse
    std::string model_hash;   // model + initial state + quench tolerances
};

// Parses and fully validates; unknown keys are errors. Problems are
// collected into `problems`; when non-empty the config must not be run.
RunConfig parse_run_config(const nlohmann::json& doc, std::vector<std::string>& problems);
RunConfig load_run_config(const std::filesystem::path& path, std::vector<std::string>& problems);

// Validation report including the D^2 spectral-table memory estimate.
struct ValidationReport {
    std::vector<std::string> problems;
    std::int64_t dimension = 0;
    double overlap_table_gb = 0.0;
    bool over_budget = false;
    bool ok() const { return problems.empty() && !over_budget; }
};

ValidationReport validate_run_config(const nlohmann::json& doc);

std::uint64_t fnv1a(const std::string& text);
std::string hash_hex(std::uint64_t value);

} // namespace qbench
