#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qbench/config.hpp"
#include "qbench/runner.hpp"

namespace fs = std::filesystem;
using namespace qbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

nlohmann::json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    nlohmann::json doc;
    in >> doc;
    return doc;
}

fs::path cache_directory(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("QBENCH_CACHE_DIR")) return env;
    return fs::current_path();
}

int cmd_validate(const fs::path& config_path) {
    nlohmann::json doc;
    try {
        doc = load_json(config_path);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitValidation;
    }
    const ValidationReport report = validate_run_config(doc);
    if (report.dimension > 0) {
        std::cout << "dimension: " << report.dimension << "\n";
        std::cout << "overlap table: " << report.overlap_table_gb << " GiB\n";
    }
    if (report.problems.empty()) {
        std::cout << "config ok\n";
        return kExitOk;
    }
    for (const auto& problem : report.problems) std::cout << "problem: " << problem << "\n";
    return kExitValidation;
}

int cmd_run(const fs::path& config_path, const fs::path& out_dir, const RunOptions& options) {
    nlohmann::json doc;
    std::vector<std::string> problems;
    RunConfig config;
    try {
        doc = load_json(config_path);
        const ValidationReport report = validate_run_config(doc);
        if (!report.ok()) {
            for (const auto& problem : report.problems)
                std::cerr << "problem: " << problem << "\n";
            return kExitValidation;
        }
        config = parse_run_config(doc, problems);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitValidation;
    }
    try {
        const RunResult result = run_experiment(config, out_dir, options);
        if (result.exit_code != 0) {
            std::cerr << "error: " << result.message << "\n";
            return result.exit_code;
        }
        for (const auto& file : result.outputs) std::cout << "wrote " << file.string() << "\n";
        return kExitOk;
    } catch (const ValidationError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_cache_spectrum(const fs::path& config_path, const std::string& cache_flag) {
    try {
        const nlohmann::json doc = load_json(config_path);
        std::vector<std::string> problems;
        const RunConfig config = parse_run_config(doc, problems);
        if (!problems.empty()) {
            for (const auto& problem : problems) std::cerr << "problem: " << problem << "\n";
            return kExitValidation;
        }
        const PreparedModel model = prepare_model(config);
        const fs::path path =
            cache_directory(cache_flag) / (config.model_hash + ".qbspec");
        write_spectral_cache(path, config.model_hash, config.lattice, model.spectral,
                             model.psi0);
        std::cout << "wrote " << path.string() << "\n";
        return kExitOk;
    } catch (const ValidationError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_ingest(const fs::path& snapshot, const fs::path& cache, const fs::path& out_csv) {
    try {
        const IngestResult result = ingest_snapshot(snapshot, cache);
        std::cout << "F_d_hat = " << result.f_d_hat.value << " +- " << result.f_d_hat.delta_stat
                  << " (M = " << result.f_d_hat.samples << ", t = " << result.f_d_hat.time
                  << ")\n";
        std::cout << "F_e = " << result.f_e_value << "\n";
        if (!out_csv.empty()) {
            const bool fresh = !fs::exists(out_csv);
            std::ofstream out(out_csv, std::ios::app);
            if (fresh) out << "t,name,value,delta_stat,Z,F_id_d,F_xeb_d\n";
            char line[256];
            std::snprintf(line, sizeof(line), "%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          result.f_d_hat.time, "F_d_hat", result.f_d_hat.value,
                          result.f_d_hat.delta_stat, result.f_d_hat.normalization,
                          result.f_d_hat.f_id_d, result.f_d_hat.f_xeb_d);
            out << line;
        }
        return kExitOk;
    } catch (const ValidationError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_report(const fs::path& out_dir) {
    try {
        const fs::path summary = merge_reports(out_dir);
        std::cout << "wrote " << summary.string() << "\n";
        return kExitOk;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitRuntime;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qbench: fidelity benchmarking for analog quantum simulators"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", snapshot_path, cache_path, csv_path;
    RunOptions options;
    std::uint64_t seed_override = 0;
    bool have_seed_override = false;

    auto* run = app.add_subcommand("run", "execute a configured experiment");
    run->add_option("--config", config_path, "run configuration (json)")->required();
    run->add_option("--out-dir", out_dir, "output directory");
    run->add_option("--threads", options.threads, "worker threads (recorded in the manifest)");
    run->add_flag("--deterministic", options.deterministic, "force single-threaded reductions");
    run->add_option("--seed-override", seed_override, "replace every configured seed")
        ->each([&](const std::string&) { have_seed_override = true; });

    auto* validate = app.add_subcommand("validate", "check a configuration without running");
    validate->add_option("--config", config_path, "run configuration (json)")->required();

    auto* cache = app.add_subcommand("cache-spectrum", "precompute and store spectral data");
    cache->add_option("--config", config_path, "run configuration (json)")->required();
    cache->add_option("--cache-dir", cache_path, "cache directory (default QBENCH_CACHE_DIR)");

    auto* ingest = app.add_subcommand("ingest", "estimate fidelity from a snapshot file");
    ingest->add_option("--snapshot", snapshot_path, "snapshot file")->required();
    ingest->add_option("--cache", cache_path, "spectral cache file")->required();
    ingest->add_option("--append-csv", csv_path, "append the estimate to this csv");

    auto* report = app.add_subcommand("report", "merge output csv files into summary.csv");
    report->add_option("--out-dir", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    if (have_seed_override) options.seed_override = seed_override;
    if (run->parsed()) return cmd_run(config_path, out_dir, options);
    if (validate->parsed()) return cmd_validate(config_path);
    if (cache->parsed()) return cmd_cache_spectrum(config_path, cache_path);
    if (ingest->parsed()) return cmd_ingest(snapshot_path, cache_path, csv_path);
    if (report->parsed()) return cmd_report(out_dir);
    return kExitValidation;
}
