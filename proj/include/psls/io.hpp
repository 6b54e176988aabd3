#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "psls/error.hpp"
#include "psls/language.hpp"
#include "psls/sim.hpp"
#include "psls/sls.hpp"
#include "psls/synth.hpp"
#include "psls/system.hpp"

// Scenario configuration, solution files and simulation exports.
//
// Scenario schema (JSON object, unknown keys rejected):
//   name            string, optional
//   problem         "h2" | "l1"
//   model           "admire_drift" | "admire_sensor" | {"modes": [{"A": M, "B": M, "C": M}, ...]}
//   horizon         T (required)
//   language        {"fault_model": {"horizon": T, "include_never_faulty": bool}}  uniform probabilities
//                   {"explicit": [[modes...], ...], "probabilities": [...]}  probabilities optional
//   noise           {"gaussian": {"isotropic": s}} | {"gaussian": {"modes": [{"P_x0","P_w","P_v"}]}}
//                   {"bounded": {"w_bar": x, "v_bar": y}}
//   cost            {"Q": M, "R": M} | {"q": s, "r": s} | {"Q_t": [M...], "R_t": [M...]}
//   delay, runs, seed, output_dir, formulation ("shared_slab" | "explicit_equality"),
//   literal_covariance, consistency_tol, sampling ("interior" | "vertex")
// Matrices are nested row-major arrays.
namespace psls::io {

using json = nlohmann::json;

inline constexpr const char* kSolutionFormat = "psls-solution/1";

struct LanguageSource {
    bool fault_model = true;
    bool include_never_faulty = false;
    std::vector<std::vector<int>> explicit_signals;
    std::optional<std::vector<double>> probabilities;

    friend bool operator==(const LanguageSource&, const LanguageSource&) = default;
};

struct Scenario {
    std::string name;
    Problem problem = Problem::H2;
    std::string preset;  // empty for an inline model
    SwitchedModel model;
    LanguageSource language_source;
    SwitchingLanguage language;
    NoiseSpec noise;
    CostSpec cost;
    int delay = 0;
    int runs = 1000;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    Formulation formulation = Formulation::SharedSlab;
    bool literal_covariance = false;
    double consistency_tol = 1e-7;
    BoundedSampling sampling = BoundedSampling::Interior;

    [[nodiscard]] int horizon() const { return model.horizon(); }

    [[nodiscard]] SynthesisOptions options() const {
        SynthesisOptions o;
        o.delay = delay;
        o.formulation = formulation;
        o.literal_covariance = literal_covariance;
        o.consistency_tol = consistency_tol;
        return o;
    }
};

// ---- matrices ----

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

// An empty array is a 0 x cols matrix; `cols` is needed only in that case.
inline Matrix matrix_from_json(const json& j, const std::string& what, Eigen::Index empty_cols = 0) {
    if (!j.is_array()) throw ConfigError(what + ": matrix must be an array of rows");
    if (j.empty()) return Matrix(0, empty_cols);
    const auto cols = j.front().is_array() ? j.front().size() : 0;
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw ConfigError(what + ": rows must have equal length");
        for (std::size_t k = 0; k < cols; ++k) {
            if (!j[i][k].is_number()) throw ConfigError(what + ": entries must be numbers");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
        }
    }
    return m;
}

// ---- enums ----

inline Problem parse_problem(const std::string& s) {
    if (s == "h2") return Problem::H2;
    if (s == "l1") return Problem::L1;
    throw ConfigError("unknown problem '" + s + "' (expected h2 or l1)");
}
inline std::string problem_key(Problem p) { return p == Problem::H2 ? "h2" : "l1"; }

inline Formulation parse_formulation(const std::string& s) {
    if (s == "shared_slab") return Formulation::SharedSlab;
    if (s == "explicit_equality") return Formulation::ExplicitEquality;
    throw ConfigError("unknown formulation '" + s + "'");
}
inline std::string formulation_key(Formulation f) {
    return f == Formulation::SharedSlab ? "shared_slab" : "explicit_equality";
}

inline BoundedSampling parse_sampling(const std::string& s) {
    if (s == "interior") return BoundedSampling::Interior;
    if (s == "vertex") return BoundedSampling::Vertex;
    throw ConfigError("unknown sampling '" + s + "'");
}
inline std::string sampling_key(BoundedSampling b) { return b == BoundedSampling::Interior ? "interior" : "vertex"; }

// ---- scenario ----

namespace detail {

template <class T>
T get(const json& j, const char* key, const std::string& what) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(what + "." + key + ": " + e.what());
    }
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
    if (!j.is_object()) throw ConfigError(what + ": expected an object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw ConfigError(what + ": unknown key '" + k + "'");
    }
}

inline SwitchedModel parse_model(const json& j, int horizon, std::string& preset) {
    if (j.is_string()) {
        preset = j.get<std::string>();
        if (preset == "admire_drift") return admire_model(AdmireFault::Drift, horizon);
        if (preset == "admire_sensor") return admire_model(AdmireFault::Sensor, horizon);
        throw ConfigError("model: unknown preset '" + preset + "'");
    }
    preset.clear();
    reject_unknown(j, {"modes"}, "model");
    const json& modes = j.at("modes");
    if (!modes.is_array() || modes.empty()) throw ConfigError("model.modes: need at least one mode");
    std::vector<Mode> out;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const std::string w = "model.modes[" + std::to_string(i) + "]";
        reject_unknown(modes[i], {"A", "B", "C"}, w);
        const Matrix a = matrix_from_json(modes[i].at("A"), w + ".A");
        out.push_back(Mode{a, matrix_from_json(modes[i].at("B"), w + ".B"),
                           matrix_from_json(modes[i].at("C"), w + ".C", a.cols())});
    }
    try {
        return SwitchedModel(std::move(out), horizon);
    } catch (const DimensionError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

inline LanguageSource parse_language(const json& j, int horizon) {
    LanguageSource src;
    reject_unknown(j, {"fault_model", "explicit", "probabilities"}, "language");
    if (j.contains("fault_model") == j.contains("explicit"))
        throw ConfigError("language: give exactly one of fault_model or explicit");
    if (j.contains("fault_model")) {
        const json& f = j.at("fault_model");
        reject_unknown(f, {"include_never_faulty", "horizon"}, "language.fault_model");
        src.fault_model = true;
        src.include_never_faulty = f.value("include_never_faulty", false);
        if (f.value("horizon", horizon) != horizon)
            throw ConfigError("language.fault_model.horizon does not match the scenario horizon");
        if (j.contains("probabilities")) throw ConfigError("language: fault_model uses uniform probabilities");
    } else {
        src.fault_model = false;
        src.explicit_signals = get<std::vector<std::vector<int>>>(j, "explicit", "language");
        if (j.contains("probabilities")) src.probabilities = get<std::vector<double>>(j, "probabilities", "language");
    }
    return src;
}

inline SwitchingLanguage build_language(const LanguageSource& src, int horizon) {
    if (src.fault_model) return uniform(fault_language(horizon, src.include_never_faulty));
    std::vector<SwitchingSignal> sigs;
    for (const auto& s : src.explicit_signals) {
        if (static_cast<int>(s.size()) != horizon + 1)
            throw ConfigError("language: signal " + SwitchingSignal::join(s) + " does not have horizon + 1 entries");
        sigs.emplace_back(s);
    }
    if (sigs.empty()) throw ConfigError("language: no signals");
    return SwitchingLanguage(std::move(sigs), src.probabilities);
}

inline NoiseSpec parse_noise(const json& j, const SwitchedModel& model) {
    reject_unknown(j, {"gaussian", "bounded"}, "noise");
    if (j.contains("gaussian") == j.contains("bounded")) throw ConfigError("noise: give exactly one of gaussian or bounded");
    if (j.contains("bounded")) {
        const json& b = j.at("bounded");
        reject_unknown(b, {"w_bar", "v_bar"}, "noise.bounded");
        return NoiseSpec::bounded(get<double>(b, "w_bar", "noise.bounded"), get<double>(b, "v_bar", "noise.bounded"));
    }
    const json& g = j.at("gaussian");
    reject_unknown(g, {"isotropic", "modes"}, "noise.gaussian");
    if (g.contains("isotropic") == g.contains("modes"))
        throw ConfigError("noise.gaussian: give exactly one of isotropic or modes");
    if (g.contains("isotropic")) {
        const double s = get<double>(g, "isotropic", "noise.gaussian");
        if (!(s >= 0.0)) throw ConfigError("noise.gaussian.isotropic must be non-negative");
        return NoiseSpec::isotropic(model, s);
    }
    const json& modes = g.at("modes");
    if (!modes.is_array() || static_cast<int>(modes.size()) != model.mode_count())
        throw ConfigError("noise.gaussian.modes: need one entry per mode");
    std::vector<ModeCovariance> per;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const std::string w = "noise.gaussian.modes[" + std::to_string(i) + "]";
        reject_unknown(modes[i], {"P_x0", "P_w", "P_v"}, w);
        ModeCovariance c{matrix_from_json(modes[i].at("P_x0"), w + ".P_x0"), matrix_from_json(modes[i].at("P_w"), w + ".P_w"),
                         matrix_from_json(modes[i].at("P_v"), w + ".P_v", model.m())};
        if (c.P_x0.rows() != model.n() || c.P_w.rows() != model.n() || c.P_v.rows() != model.m())
            throw ConfigError(w + ": covariance dimensions do not match the model");
        per.push_back(std::move(c));
    }
    return NoiseSpec::make_gaussian(std::move(per));
}

inline CostSpec parse_cost(const json& j, const SwitchedModel& model) {
    const int T = model.horizon(), n = model.n(), p = model.p();
    reject_unknown(j, {"Q", "R", "q", "r", "Q_t", "R_t"}, "cost");
    std::vector<Matrix> q, r;
    if (j.contains("q") || j.contains("r")) {
        q.assign(T + 1, detail::get<double>(j, "q", "cost") * Matrix::Identity(n, n));
        r.assign(T + 1, detail::get<double>(j, "r", "cost") * Matrix::Identity(p, p));
    } else if (j.contains("Q") || j.contains("R")) {
        q.assign(T + 1, matrix_from_json(j.at("Q"), "cost.Q"));
        r.assign(T + 1, matrix_from_json(j.at("R"), "cost.R"));
    } else {
        for (const auto& m : j.at("Q_t")) q.push_back(matrix_from_json(m, "cost.Q_t"));
        for (const auto& m : j.at("R_t")) r.push_back(matrix_from_json(m, "cost.R_t"));
    }
    if (static_cast<int>(q.size()) != T + 1 || static_cast<int>(r.size()) != T + 1)
        throw ConfigError("cost: need T + 1 blocks");
    for (const auto& m : q)
        if (m.rows() != n || m.cols() != n) throw ConfigError("cost: Q blocks must be n x n");
    for (const auto& m : r)
        if (m.rows() != p || m.cols() != p) throw ConfigError("cost: R blocks must be p x p");
    return CostSpec::make(std::move(q), std::move(r));
}

}  // namespace detail

inline Scenario scenario_from_json(const json& j) {
    detail::reject_unknown(j,
                           {"name", "problem", "model", "horizon", "language", "noise", "cost", "delay", "runs", "seed",
                            "output_dir", "formulation", "literal_covariance", "consistency_tol", "sampling"},
                           "scenario");
    Scenario s;
    s.name = j.value("name", std::string());
    s.problem = parse_problem(detail::get<std::string>(j, "problem", "scenario"));
    const int T = detail::get<int>(j, "horizon", "scenario");
    if (T < 0) throw ConfigError("scenario.horizon must be >= 0");
    s.model = detail::parse_model(j.at("model"), T, s.preset);
    s.language_source = j.contains("language") ? detail::parse_language(j.at("language"), T) : LanguageSource{};
    s.language = detail::build_language(s.language_source, T);
    if (s.language.max_mode() > s.model.mode_count()) throw ConfigError("language: mode index exceeds the model's modes");
    if (j.contains("noise"))
        s.noise = detail::parse_noise(j.at("noise"), s.model);
    else
        s.noise = s.problem == Problem::H2 ? NoiseSpec::isotropic(s.model, 1.0) : NoiseSpec::bounded(1.0, 1.0);
    if (s.problem == Problem::H2 && s.noise.kind != NoiseKind::Gaussian)
        throw ConfigError("scenario: h2 requires gaussian noise");
    if (s.problem == Problem::L1 && s.noise.kind != NoiseKind::Bounded)
        throw ConfigError("scenario: l1 requires bounded noise");
    s.cost = j.contains("cost") ? detail::parse_cost(j.at("cost"), s.model)
                                : CostSpec::time_invariant(T, Matrix::Identity(s.model.n(), s.model.n()),
                                                           Matrix::Identity(s.model.p(), s.model.p()));
    s.delay = j.value("delay", 0);
    if (s.delay < 0) throw ConfigError("scenario.delay must be >= 0");
    s.runs = j.value("runs", 1000);
    if (s.runs < 1) throw ConfigError("scenario.runs must be >= 1");
    s.seed = j.value("seed", std::uint64_t{1});
    s.output_dir = j.value("output_dir", std::string("out"));
    s.formulation = parse_formulation(j.value("formulation", std::string("shared_slab")));
    s.literal_covariance = j.value("literal_covariance", false);
    s.consistency_tol = j.value("consistency_tol", 1e-7);
    if (!(s.consistency_tol > 0.0)) throw ConfigError("scenario.consistency_tol must be positive");
    s.sampling = parse_sampling(j.value("sampling", std::string("interior")));
    return s;
}

inline Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario: invalid JSON: ") + e.what());
    }
    try {
        return scenario_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    } catch (const DimensionError& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

inline Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

// Fields that determine the synthesized controller.
inline json synthesis_json(const Scenario& s) {
    json j;
    j["problem"] = problem_key(s.problem);
    j["horizon"] = s.horizon();
    if (!s.preset.empty()) {
        j["model"] = s.preset;
    } else {
        json modes = json::array();
        for (const auto& m : s.model.modes())
            modes.push_back({{"A", matrix_to_json(m.A)}, {"B", matrix_to_json(m.B)}, {"C", matrix_to_json(m.C)}});
        j["model"] = {{"modes", modes}};
    }
    if (s.language_source.fault_model) {
        j["language"] = {{"fault_model",
                           {{"horizon", s.horizon()}, {"include_never_faulty", s.language_source.include_never_faulty}}}};
    } else {
        j["language"] = {{"explicit", s.language_source.explicit_signals}};
        if (s.language_source.probabilities) j["language"]["probabilities"] = *s.language_source.probabilities;
    }
    if (s.noise.kind == NoiseKind::Bounded) {
        j["noise"] = {{"bounded", {{"w_bar", s.noise.w_bar}, {"v_bar", s.noise.v_bar}}}};
    } else {
        json modes = json::array();
        for (const auto& c : s.noise.gaussian)
            modes.push_back({{"P_x0", matrix_to_json(c.P_x0)}, {"P_w", matrix_to_json(c.P_w)}, {"P_v", matrix_to_json(c.P_v)}});
        j["noise"] = {{"gaussian", {{"modes", modes}}}};
    }
    json qt = json::array(), rt = json::array();
    for (const auto& m : s.cost.Q) qt.push_back(matrix_to_json(m));
    for (const auto& m : s.cost.R) rt.push_back(matrix_to_json(m));
    j["cost"] = {{"Q_t", qt}, {"R_t", rt}};
    j["delay"] = s.delay;
    j["formulation"] = formulation_key(s.formulation);
    j["literal_covariance"] = s.literal_covariance;
    j["consistency_tol"] = s.consistency_tol;
    return j;
}

inline json scenario_to_json(const Scenario& s) {
    json j = synthesis_json(s);
    if (!s.name.empty()) j["name"] = s.name;
    j["runs"] = s.runs;
    j["seed"] = s.seed;
    j["output_dir"] = s.output_dir;
    j["sampling"] = sampling_key(s.sampling);
    return j;
}

inline bool same_scenario(const Scenario& a, const Scenario& b) {
    return scenario_to_json(a) == scenario_to_json(b) && a.model == b.model && a.language == b.language &&
           a.noise == b.noise && a.cost == b.cost;
}

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << v;
    return ss.str();
}

// FNV-1a of the canonical (sorted-key) synthesis fields; run count, seed and
// output location do not change the hash.
inline std::string scenario_hash(const Scenario& s) { return hex64(fnv1a64(synthesis_json(s).dump())); }

// ---- solutions ----

inline json diagnostics_to_json(const SynthesisDiagnostics& d) {
    return {{"status", solver::to_string(d.status)},
            {"variables", d.variables},
            {"equality_rows", d.equality_rows},
            {"inequality_rows", d.inequality_rows},
            {"removed_rows", d.removed_rows},
            {"iterations", d.iterations},
            {"primal_residual", d.primal_residual},
            {"max_affine_residual", d.max_affine_residual},
            {"solver_objective", d.solver_objective},
            {"seconds", d.seconds},
            {"regularized", d.regularized},
            {"warnings", d.warnings}};
}

// Gain rows in (t, tau) order, keyed by the observed prefix.
inline json controller_to_json(const PrefixController& ctrl) {
    std::vector<int> order(ctrl.tree().size());
    for (int i = 0; i < ctrl.tree().size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& na = ctrl.tree().node(a);
        const auto& nb = ctrl.tree().node(b);
        return std::tie(na.depth, na.key) < std::tie(nb.depth, nb.key);
    });
    json gains = json::array();
    for (int i : order) {
        const auto& nd = ctrl.tree().node(i);
        json blocks = json::array();
        for (int tau = 0; tau <= nd.depth; ++tau)
            blocks.push_back({{"tau", tau}, {"K", matrix_to_json(ctrl.gain(i, tau))}});
        gains.push_back({{"t", nd.depth}, {"prefix", SwitchingSignal::join(nd.key)}, {"blocks", blocks}});
    }
    return {{"delay", ctrl.tree().delay()}, {"horizon", ctrl.horizon()}, {"p", ctrl.p()}, {"m", ctrl.m()}, {"gains", gains}};
}

inline std::vector<int> parse_prefix(const std::string& s) {
    std::vector<int> out;
    if (s.empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw ConfigError("bad prefix '" + s + "'");
        }
    }
    return out;
}

inline PrefixController controller_from_json(const json& j, const SwitchingLanguage& lang) {
    const int delay = detail::get<int>(j, "delay", "controller");
    const int p = detail::get<int>(j, "p", "controller"), m = detail::get<int>(j, "m", "controller");
    auto tree = build_prefix_tree(lang, delay);
    std::vector<Matrix> rows(tree.size());
    std::vector<bool> seen(tree.size(), false);
    for (const auto& g : j.at("gains")) {
        const int t = detail::get<int>(g, "t", "controller.gains");
        const auto key = parse_prefix(detail::get<std::string>(g, "prefix", "controller.gains"));
        const auto node = tree.lookup(t, key);
        if (!node) throw ConfigError("controller: prefix '" + SwitchingSignal::join(key) + "' at t = " + std::to_string(t) +
                                     " is not in the language's tree");
        Matrix row(p, m * (t + 1));
        const auto& blocks = g.at("blocks");
        if (static_cast<int>(blocks.size()) != t + 1) throw ConfigError("controller: need t + 1 blocks per prefix");
        for (const auto& b : blocks) {
            const int tau = detail::get<int>(b, "tau", "controller.blocks");
            const Matrix k = matrix_from_json(b.at("K"), "controller.K", m);
            if (tau < 0 || tau > t || k.rows() != p || k.cols() != m) throw ConfigError("controller: bad gain block");
            row.middleCols(tau * m, m) = k;
        }
        rows[*node] = row;
        seen[*node] = true;
    }
    for (int i = 0; i < tree.size(); ++i)
        if (!seen[i]) throw ConfigError("controller: missing gains for a prefix of the language");
    return PrefixController(std::move(tree), p, m, std::move(rows));
}

struct SolutionFile {
    std::string scenario_hash;
    Problem problem = Problem::H2;
    double objective = 0.0;
    int worst_signal = -1;
    std::vector<double> per_signal;
    PrefixController controller;
};

inline json solution_to_json(const Scenario& s, const SynthesisSolution& sol) {
    json sigs = json::array();
    for (const auto& sg : s.language.signals()) sigs.push_back(sg.to_string());
    json j{{"format", kSolutionFormat},
           {"scenario_hash", scenario_hash(s)},
           {"problem", problem_key(sol.problem)},
           {"objective", sol.objective},
           {"signals", sigs},
           {"per_signal", sol.per_signal},
           {"diagnostics", diagnostics_to_json(sol.diagnostics)}};
    if (sol.problem == Problem::L1 && sol.worst_signal >= 0) {
        j["worst_signal"] = sol.worst_signal;
        j["worst_signal_modes"] = s.language.signal(sol.worst_signal).to_string();
    }
    if (sol.ok()) j["controller"] = controller_to_json(sol.controller);
    return j;
}

inline SolutionFile solution_from_json(const json& j, const Scenario& s) {
    try {
        if (j.value("format", std::string()) != kSolutionFormat) throw ConfigError("solution: unknown format");
        SolutionFile f;
        f.scenario_hash = j.at("scenario_hash").get<std::string>();
        f.problem = parse_problem(j.at("problem").get<std::string>());
        f.objective = j.at("objective").get<double>();
        f.per_signal = j.at("per_signal").get<std::vector<double>>();
        f.worst_signal = j.value("worst_signal", -1);
        if (!j.contains("controller")) throw ConfigError("solution: no controller (synthesis failed)");
        f.controller = controller_from_json(j.at("controller"), s.language);
        return f;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("solution: ") + e.what());
    }
}

// ---- simulation exports ----

inline std::string format_double(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

// time,signal_id,run,cost,state_inf_norm,x1..xn (optionally preceded by a label column).
inline std::string traces_csv_header(int n, bool labeled = false) {
    std::string h = labeled ? "controller," : "";
    h += "time,signal_id,run,cost,state_inf_norm";
    for (int i = 1; i <= n; ++i) h += ",x" + std::to_string(i);
    return h + "\n";
}

inline void append_traces_csv(std::string& out, const MonteCarloResult& mc, int n, const std::string& label = "") {
    for (std::size_t k = 0; k < mc.traces.size(); ++k) {
        const auto& tr = mc.traces[k];
        const auto signal = k / static_cast<std::size_t>(mc.runs), run = k % static_cast<std::size_t>(mc.runs);
        for (std::size_t t = 0; t < tr.x.size(); ++t) {
            if (!label.empty()) out += label + ",";
            out += std::to_string(t) + "," + std::to_string(signal) + "," + std::to_string(run) + "," +
                   format_double(tr.cost[t]) + "," + format_double(tr.state_norm[t]);
            for (int i = 0; i < n; ++i) out += "," + format_double(tr.x[t](i));
            out += "\n";
        }
    }
}

inline std::string stats_csv_header(bool labeled = false) {
    return std::string(labeled ? "controller," : "") +
           "signal_id,time,cost_mean,cost_std,cost_max,cost_max_minus_std,"
           "norm_mean,norm_std,norm_max,norm_max_minus_std\n";
}

// One row per (signal, time); signal_id "marginal" holds the probability-weighted mixture.
inline void append_stats_csv(std::string& out, const MonteCarloResult& mc, const std::string& label = "") {
    auto rows = [&](const std::string& id, const TimeStats& c, const TimeStats& x) {
        for (std::size_t t = 0; t < c.mean.size(); ++t) {
            if (!label.empty()) out += label + ",";
            out += id + "," + std::to_string(t);
            for (const auto* st : {&c, &x})
                out += "," + format_double(st->mean[t]) + "," + format_double(st->std[t]) + "," + format_double(st->max[t]) +
                       "," + format_double(st->max_minus_std[t]);
            out += "\n";
        }
    };
    for (std::size_t s = 0; s < mc.per_signal.size(); ++s)
        rows(std::to_string(s), mc.per_signal[s].cost, mc.per_signal[s].state_norm);
    rows("marginal", mc.marginal_cost, mc.marginal_state_norm);
}

inline json time_stats_to_json(const TimeStats& st) {
    return {{"mean", st.mean}, {"std", st.std}, {"max", st.max}, {"max_minus_std", st.max_minus_std}};
}

inline json monte_carlo_to_json(const MonteCarloResult& mc) {
    json per = json::array();
    for (const auto& s : mc.per_signal)
        per.push_back({{"cost", time_stats_to_json(s.cost)},
                       {"state_norm", time_stats_to_json(s.state_norm)},
                       {"mean_total_cost", s.mean_total_cost},
                       {"std_total_cost", s.std_total_cost},
                       {"max_state_norm", s.max_state_norm}});
    return {{"runs", mc.runs},
            {"seed", mc.seed},
            {"per_signal", per},
            {"marginal", {{"cost", time_stats_to_json(mc.marginal_cost)}, {"state_norm", time_stats_to_json(mc.marginal_state_norm)}}},
            {"mean_total_cost", mc.mean_total_cost},
            {"total_cost_std_error", mc.total_cost_std_error},
            {"max_state_norm", mc.max_state_norm}};
}

}  // namespace psls::io
