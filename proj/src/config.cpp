#include "qbench/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace qbench {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string experiment_kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::decay_curve: return "decay-curve";
        case ExperimentKind::pt_statistics: return "pt-statistics";
        case ExperimentKind::single_error_response: return "single-error-response";
        case ExperimentKind::sample_complexity: return "sample-complexity";
        case ExperimentKind::greedy_fit: return "greedy-fit";
        case ExperimentKind::scan: return "scan";
        case ExperimentKind::mps_model: return "mps-model";
        case ExperimentKind::failure_case: return "failure-case";
    }
    return "unknown";
}

namespace {

const std::vector<std::string> kKnownEstimators{"F_d",   "F_hat_d", "F_XEB", "F_c",
                                                "F_e",   "F_id_d",  "F_xeb_d", "F_d_ph"};

// Checks every key of `obj` against `allowed`; typos are hard errors.
void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where,
                std::vector<std::string>& problems) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key))
            problems.push_back("unknown key '" + where + key + "'");
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return obj.at(key).get<T>();
}

std::optional<ExperimentKind> experiment_from_name(const std::string& name) {
    for (int k = 0; k <= static_cast<int>(ExperimentKind::failure_case); ++k) {
        const auto kind = static_cast<ExperimentKind>(k);
        if (experiment_kind_name(kind) == name) return kind;
    }
    return std::nullopt;
}

std::vector<double> parse_time_grid(const json& q, std::vector<std::string>& problems) {
    std::vector<double> times;
    if (q.contains("times")) {
        const auto& t = q.at("times");
        if (t.is_array()) {
            for (const auto& v : t) times.push_back(v.get<double>());
        } else if (t.is_object()) {
            std::vector<std::string> dummy;
            check_keys(t, {"from", "to", "step"}, "quench.times.", problems);
            const double from = get_or(t, "from", 0.0);
            const double to = get_or(t, "to", 0.0);
            const double step = get_or(t, "step", 1.0);
            if (step <= 0.0) {
                problems.push_back("quench.times.step must be > 0");
            } else {
                for (double x = from; x <= to + 1e-12; x += step) times.push_back(x);
            }
        } else {
            problems.push_back("quench.times must be an array or {from,to,step}");
        }
    } else if (q.contains("time")) {
        times.push_back(q.at("time").get<double>());
    }
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] < times[i - 1]) problems.push_back("quench times must be ascending");
    return times;
}

} // namespace

RunConfig parse_run_config(const json& doc, std::vector<std::string>& problems) {
    RunConfig config;
    if (!doc.is_object()) {
        problems.push_back("config root must be an object");
        return config;
    }
    check_keys(doc,
               {"schema_version", "experiment", "model", "initial_state", "quench", "noise",
                "estimators", "single_error", "fit", "scan", "mps", "failure_case", "output",
                "memory_budget_gb"},
               "", problems);

    config.schema_version = get_or(doc, "schema_version", 0);
    if (config.schema_version != 1)
        problems.push_back("schema_version must be 1, got " +
                           std::to_string(config.schema_version));

    const std::string experiment = get_or<std::string>(doc, "experiment", "");
    if (const auto kind = experiment_from_name(experiment)) {
        config.experiment = *kind;
    } else {
        problems.push_back("unknown experiment '" + experiment + "'");
    }

    // Model block.
    if (!doc.contains("model") || !doc.at("model").is_object()) {
        problems.push_back("missing model block");
    } else {
        const auto& m = doc.at("model");
        check_keys(m,
                   {"kind", "sites", "rows", "cols", "bosons", "n_up", "n_down", "omega",
                    "omega_per_bond", "interaction", "field_rescaled", "alpha",
                    "disorder_fields", "detuning", "periodic", "hopping_disorder_seed"},
                   "model.", problems);
        try {
            config.model.kind = model_kind_from_name(get_or<std::string>(m, "kind", ""));
        } catch (const ValidationError& err) {
            problems.push_back(err.what());
        }
        config.lattice.kind = config.model.kind;
        config.lattice.length = get_or(m, "sites", 0);
        config.lattice.rows = get_or(m, "rows", 0);
        config.lattice.cols = get_or(m, "cols", 0);
        config.lattice.n_bosons = get_or(m, "bosons", 0);
        config.lattice.n_up = get_or(m, "n_up", 0);
        config.lattice.n_down = get_or(m, "n_down", 0);
        config.lattice.periodic = get_or(m, "periodic", false);
        config.model.omega = get_or(m, "omega", 1.0);
        config.model.interaction = get_or(m, "interaction", 0.0);
        config.model.field_rescaled = get_or(m, "field_rescaled", 0.0);
        config.model.alpha = get_or(m, "alpha", 1.0);
        config.model.detuning = get_or(m, "detuning", 0.0);
        if (m.contains("omega_per_bond"))
            config.model.omega_per_bond = m.at("omega_per_bond").get<std::vector<double>>();
        if (m.contains("hopping_disorder_seed")) {
            if (config.model.omega_per_bond)
                problems.push_back("model: give omega_per_bond or hopping_disorder_seed, not both");
            config.model.omega_per_bond = disordered_hoppings(
                config.lattice.sites(), m.at("hopping_disorder_seed").get<std::uint64_t>());
        }
        if (m.contains("disorder_fields"))
            config.model.disorder_fields = m.at("disorder_fields").get<std::vector<double>>();
        try {
            config.lattice.validate();
        } catch (const ValidationError& err) {
            problems.push_back(err.what());
        }
        if (config.model.alpha <= 0.0) problems.push_back("model.alpha must be > 0");
        if (config.model.omega_per_bond &&
            static_cast<int>(config.model.omega_per_bond->size()) !=
                std::max(config.lattice.sites() - 1, 0))
            problems.push_back("model.omega_per_bond must have sites-1 entries");
        if (config.model.disorder_fields &&
            static_cast<int>(config.model.disorder_fields->size()) != config.lattice.sites())
            problems.push_back("model.disorder_fields must have one entry per site");
    }

    // Initial state.
    if (doc.contains("initial_state")) {
        const auto& s = doc.at("initial_state");
        check_keys(s, {"type", "occupations", "index", "beta", "path"}, "initial_state.",
                   problems);
        config.initial_state.type = get_or<std::string>(s, "type", "product");
        config.initial_state.occupations = get_or<std::string>(s, "occupations", "");
        config.initial_state.index = get_or<std::int64_t>(s, "index", 0);
        config.initial_state.beta = get_or(s, "beta", 1.0);
        config.initial_state.path = get_or<std::string>(s, "path", "");
        const std::set<std::string> kinds{"product", "basis-index", "gibbs", "amplitudes-file"};
        if (!kinds.count(config.initial_state.type))
            problems.push_back("initial_state.type must be product, basis-index, gibbs or "
                               "amplitudes-file");
        if (config.initial_state.type == "product" && config.initial_state.occupations.empty())
            problems.push_back("initial_state.occupations required for product states");
        if (config.initial_state.type == "amplitudes-file" &&
            !std::filesystem::exists(config.initial_state.path))
            problems.push_back("initial_state.path does not exist: " + config.initial_state.path);
        if (config.initial_state.type == "gibbs" && config.initial_state.beta <= 0.0)
            problems.push_back("initial_state.beta must be > 0");
    } else if (config.experiment != ExperimentKind::mps_model) {
        problems.push_back("missing initial_state block");
    }

    // Quench block.
    if (doc.contains("quench")) {
        const auto& q = doc.at("quench");
        check_keys(q,
                   {"time", "times", "average_window", "average_step", "krylov_tol",
                    "eps_deg_rel", "dense_threshold"},
                   "quench.", problems);
        config.quench.times = parse_time_grid(q, problems);
        config.quench.average_window = get_or(q, "average_window", 500.0);
        config.quench.average_step = get_or(q, "average_step", 0.25);
        config.quench.krylov_tol = get_or(q, "krylov_tol", 1e-9);
        config.quench.eps_deg_rel = get_or(q, "eps_deg_rel", 1e-9);
        config.quench.dense_threshold = get_or<std::int64_t>(q, "dense_threshold", 20000);
        if (config.quench.average_window <= 0.0 || config.quench.average_step <= 0.0)
            problems.push_back("quench.average_window and average_step must be > 0");
    }

    // Noise block.
    if (doc.contains("noise")) {
        const auto& n = doc.at("noise");
        check_keys(n, {"gamma", "rate_convention", "error_model", "trajectories", "seed",
                       "unraveling"},
                   "noise.", problems);
        config.noise.gamma = get_or(n, "gamma", 0.0);
        config.noise.rate_convention = get_or<std::string>(n, "rate_convention", "total");
        config.noise.error_model = get_or<std::string>(n, "error_model", "");
        config.noise.trajectories = get_or<std::int64_t>(n, "trajectories", 2000);
        if (!n.contains("seed")) {
            problems.push_back("noise.seed is required (no entropy defaults)");
        } else {
            config.noise.seed = n.at("seed").get<std::uint64_t>();
        }
        config.noise.unraveling = get_or<std::string>(n, "unraveling", "uniform-poisson");
        if (config.noise.gamma < 0.0) problems.push_back("noise.gamma must be >= 0");
        if (config.noise.trajectories < 1) problems.push_back("noise.trajectories must be >= 1");
        if (config.noise.rate_convention != "total" &&
            config.noise.rate_convention != "per-operator")
            problems.push_back("noise.rate_convention must be total or per-operator");
        if (config.noise.unraveling != "uniform-poisson" &&
            config.noise.unraveling != "norm-weighted")
            problems.push_back("noise.unraveling must be uniform-poisson or norm-weighted");
        if (!config.noise.error_model.empty()) {
            try {
                (void)error_model_from_name(config.noise.error_model);
            } catch (const ValidationError& err) {
                problems.push_back(err.what());
            }
        }
    }

    // Estimator block.
    if (doc.contains("estimators")) {
        const auto& e = doc.at("estimators");
        check_keys(e, {"which", "samples", "seed", "bootstrap_resamples"}, "estimators.",
                   problems);
        if (e.contains("which"))
            config.estimators.which = e.at("which").get<std::vector<std::string>>();
        config.estimators.samples = get_or<std::int64_t>(e, "samples", 1000);
        if (!e.contains("seed")) {
            problems.push_back("estimators.seed is required (no entropy defaults)");
        } else {
            config.estimators.seed = e.at("seed").get<std::uint64_t>();
        }
        config.estimators.bootstrap_resamples = get_or(e, "bootstrap_resamples", 0);
        for (const auto& name : config.estimators.which) {
            if (std::find(kKnownEstimators.begin(), kKnownEstimators.end(), name) ==
                kKnownEstimators.end()) {
                std::string suggestion = "unknown estimator '" + name + "'; known:";
                for (const auto& known : kKnownEstimators) suggestion += " " + known;
                problems.push_back(suggestion);
            }
        }
        if (config.estimators.samples < 1) problems.push_back("estimators.samples must be >= 1");
    }

    if (doc.contains("single_error")) {
        const auto& s = doc.at("single_error");
        check_keys(s, {"site", "t_err"}, "single_error.", problems);
        SingleErrorConfig se;
        se.site = get_or(s, "site", 0);
        se.t_err = get_or(s, "t_err", 5.0);
        config.single_error = se;
    }

    if (doc.contains("fit")) {
        const auto& f = doc.at("fit");
        check_keys(f,
                   {"fields", "lo", "hi", "grid_points", "truth_seed", "times",
                    "samples_per_time", "multi_starts"},
                   "fit.", problems);
        FitConfig fit;
        fit.fields = get_or(f, "fields", 8);
        fit.lo = get_or(f, "lo", -0.5);
        fit.hi = get_or(f, "hi", 0.5);
        fit.grid_points = get_or(f, "grid_points", 21);
        fit.truth_seed = get_or<std::uint64_t>(f, "truth_seed", 0);
        if (f.contains("times")) fit.times = f.at("times").get<std::vector<double>>();
        fit.samples_per_time = get_or<std::int64_t>(f, "samples_per_time", 250);
        fit.multi_starts = get_or(f, "multi_starts", 3);
        if (!(fit.lo < fit.hi)) problems.push_back("fit interval is empty");
        config.fit = fit;
    }

    if (doc.contains("scan")) {
        const auto& s = doc.at("scan");
        check_keys(s, {"type", "theta_star", "lo", "hi", "points", "time", "samples", "seed"},
                   "scan.", problems);
        ScanConfig scan;
        scan.type = get_or<std::string>(s, "type", "phase");
        scan.theta_star = get_or(s, "theta_star", 0.0);
        scan.lo = get_or(s, "lo", 0.0);
        scan.hi = get_or(s, "hi", 1.0);
        scan.points = get_or(s, "points", 21);
        scan.time = get_or(s, "time", 5.0);
        scan.samples = get_or<std::int64_t>(s, "samples", 1000);
        scan.seed = get_or<std::uint64_t>(s, "seed", 0);
        if (scan.type != "phase" && scan.type != "coupling")
            problems.push_back("scan.type must be phase or coupling");
        if (!(scan.lo < scan.hi)) problems.push_back("scan interval is empty");
        config.scan = scan;
    }

    if (doc.contains("mps")) {
        const auto& m = doc.at("mps");
        check_keys(m, {"local_dim", "bond_dim", "sites", "supports", "offset", "theta",
                       "samples", "seed"},
                   "mps.", problems);
        MpsConfig mps;
        mps.local_dim = get_or(m, "local_dim", 2);
        mps.bond_dim = get_or(m, "bond_dim", 2);
        mps.sites = get_or(m, "sites", 8);
        if (m.contains("supports")) mps.supports = m.at("supports").get<std::vector<int>>();
        mps.offset = get_or(m, "offset", 3);
        mps.theta = get_or(m, "theta", 0.7853981633974483);
        mps.samples = get_or<std::int64_t>(m, "samples", 500);
        mps.seed = get_or<std::uint64_t>(m, "seed", 0);
        config.mps = mps;
    }

    config.failure_case = get_or<std::string>(doc, "failure_case", "");
    if (config.experiment == ExperimentKind::failure_case) {
        const std::set<std::string> cases{"phs", "non-interacting", "low-temperature",
                                          "inhomogeneous"};
        if (!cases.count(config.failure_case))
            problems.push_back("failure_case must be phs, non-interacting, low-temperature or "
                               "inhomogeneous");
    }

    if (doc.contains("output")) {
        const auto& o = doc.at("output");
        check_keys(o, {"prefix"}, "output.", problems);
        config.output_prefix = get_or<std::string>(o, "prefix", "run");
    }
    config.memory_budget_gb = get_or(doc, "memory_budget_gb", 4.0);

    // Kind-specific requirements.
    switch (config.experiment) {
        case ExperimentKind::decay_curve:
            if (!doc.contains("noise")) problems.push_back("decay-curve needs a noise block");
            if (config.quench.times.empty())
                problems.push_back("decay-curve needs quench.times");
            break;
        case ExperimentKind::pt_statistics:
            if (config.quench.times.size() != 1)
                problems.push_back("pt-statistics needs a single quench.time");
            break;
        case ExperimentKind::single_error_response:
            if (!config.single_error) problems.push_back("single-error-response needs single_error");
            if (config.quench.times.empty())
                problems.push_back("single-error-response needs quench.times");
            break;
        case ExperimentKind::sample_complexity:
            if (config.quench.times.empty())
                problems.push_back("sample-complexity needs quench.times");
            break;
        case ExperimentKind::greedy_fit:
            if (!config.fit) problems.push_back("greedy-fit needs a fit block");
            break;
        case ExperimentKind::scan:
            if (!config.scan) problems.push_back("scan needs a scan block");
            break;
        case ExperimentKind::mps_model:
            if (!config.mps) problems.push_back("mps-model needs an mps block");
            break;
        case ExperimentKind::failure_case:
            break;
    }

    // Hashes over the canonical (sorted-key) serialisation.
    config.config_hash = hash_hex(fnv1a(doc.dump()));
    json model_part;
    if (doc.contains("model")) model_part["model"] = doc.at("model");
    if (doc.contains("initial_state")) model_part["initial_state"] = doc.at("initial_state");
    model_part["eps_deg_rel"] = config.quench.eps_deg_rel;
    config.model_hash = hash_hex(fnv1a(model_part.dump()));
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path, std::vector<std::string>& problems) {
    std::ifstream in(path);
    if (!in) {
        problems.push_back("cannot open config file " + path.string());
        return RunConfig{};
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& err) {
        problems.push_back(std::string("config is not valid JSON: ") + err.what());
        return RunConfig{};
    }
    return parse_run_config(doc, problems);
}

ValidationReport validate_run_config(const json& doc) {
    ValidationReport report;
    const RunConfig config = parse_run_config(doc, report.problems);
    if (!report.problems.empty()) return report;
    if (config.experiment == ExperimentKind::mps_model) return report;
    try {
        report.dimension = basis_dimension_formula(config.lattice);
    } catch (const ValidationError&) {
        // PXP with periodic boundaries has no closed form; enumerate.
        report.dimension = enumerate_basis(config.lattice).dimension();
    }
    const double bytes = 8.0 * static_cast<double>(report.dimension) *
                         static_cast<double>(report.dimension);
    report.overlap_table_gb = bytes / (1024.0 * 1024.0 * 1024.0);
    if (report.dimension > config.quench.dense_threshold) {
        report.over_budget = true;
        report.problems.push_back(
            "dimension " + std::to_string(report.dimension) + " exceeds the dense threshold " +
            std::to_string(config.quench.dense_threshold) + "; spectral pipeline refused");
    } else if (report.overlap_table_gb > config.memory_budget_gb) {
        report.over_budget = true;
        std::ostringstream msg;
        msg << "overlap table needs " << report.overlap_table_gb << " GiB for D = "
            << report.dimension << ", over the " << config.memory_budget_gb << " GiB budget";
        report.problems.push_back(msg.str());
    }
    return report;
}

} // namespace qbench
