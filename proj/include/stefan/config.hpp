#pragma once

// Run configuration: JSON with polynomial expression strings, strict key
// checking (unknown and duplicate keys are reported with line and column),
// and a validation pass that lists every violation at once.

#include "stefan/control.hpp"
#include "stefan/error.hpp"
#include "stefan/function.hpp"
#include "stefan/interpolants.hpp"
#include "stefan/physics.hpp"
#include "stefan/polynomial.hpp"
#include "stefan/solver.hpp"
#include "stefan/verification.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace stefan {

enum class RunMode { solve, optimize, verify };

inline const char* to_string(RunMode m) {
    switch (m) {
    case RunMode::solve: return "solve";
    case RunMode::optimize: return "optimize";
    case RunMode::verify: return "verify";
    }
    return "?";
}

inline RunMode parse_run_mode(const std::string& s) {
    if (s == "solve") return RunMode::solve;
    if (s == "optimize") return RunMode::optimize;
    if (s == "verify") return RunMode::verify;
    throw ConfigError("unknown mode '" + s + "' (expected solve, optimize or verify)");
}

struct LatticeConfig {
    int nx = 11;
    int nt = 11;
    InterpolantKind kind = InterpolantKind::hat_v_tau;
};

struct OutputConfig {
    std::filesystem::path directory = "out";
    bool csv = true;
    bool binary = true;
    std::optional<LatticeConfig> lattice;
};

struct VerifyConfig {
    std::string benchmark = "neumann";  ///< neumann or heat
    NeumannConstants constants{1.0, 1.0, 1.0, 2.0, 1.0, 1.0, -0.5};
    double t0 = 0.05;
    double T = 0.5;
    double L = 1.0;
    double amplitude = 1.0;
    std::vector<std::pair<int, int>> levels{{32, 32}, {64, 64}, {128, 128}};
    std::vector<int> functional_ns;  ///< empty: no functional study
    int refinement = 4;
};

struct RunConfig {
    RunMode mode = RunMode::solve;
    std::filesystem::path source;

    PhaseSpec material;
    ProblemData data;
    ScalarFunction control;  ///< g for solve mode
    bool has_gamma = false;
    double T = 1.0;
    double L = 1.0;
    double R = 1.0;

    int n = 0;
    int m = 0;
    double epsilon = 0.0;  ///< 1/n unless given
    SolverParams solver;
    OptimizerParams optimizer;
    std::optional<std::vector<double>> initial_control;

    VerifyConfig verify;
    OutputConfig output;
    int workers = 1;
};

namespace detail {

struct KeyLocation {
    std::size_t line;
    std::size_t column;
};

inline KeyLocation location_of(const std::string& text, std::size_t offset) {
    KeyLocation loc{1, 1};
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++loc.line;
            loc.column = 1;
        } else {
            ++loc.column;
        }
    }
    return loc;
}

/// Input iterator that publishes how far the parser has read.
struct TrackingIterator {
    using iterator_category = std::input_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    const char* p = nullptr;
    const char** cursor = nullptr;

    reference operator*() const { return *p; }
    TrackingIterator& operator++() {
        ++p;
        *cursor = p;
        return *this;
    }
    TrackingIterator operator++(int) {
        TrackingIterator old = *this;
        ++*this;
        return old;
    }
    bool operator==(const TrackingIterator& o) const { return p == o.p; }
    bool operator!=(const TrackingIterator& o) const { return p != o.p; }
};

/// SAX pass recording the source offset of every object key (by JSON pointer)
/// and rejecting duplicates.
class KeyIndexer : public nlohmann::json_sax<nlohmann::json> {
public:
    KeyIndexer(const std::string& text, const char* const* cursor) : text_(text), cursor_(cursor) {}

    std::map<std::string, std::size_t> offsets;

    bool null() override { return value(); }
    bool boolean(bool) override { return value(); }
    bool number_integer(number_integer_t) override { return value(); }
    bool number_unsigned(number_unsigned_t) override { return value(); }
    bool number_float(number_float_t, const string_t&) override { return value(); }
    bool string(string_t&) override { return value(); }
    bool binary(binary_t&) override { return value(); }

    bool start_object(std::size_t) override {
        open_child();
        frames_.push_back({true, {}, -1});
        return true;
    }
    bool end_object() override {
        frames_.pop_back();
        pop_child();
        return true;
    }
    bool start_array(std::size_t) override {
        open_child();
        frames_.push_back({false, {}, -1});
        return true;
    }
    bool end_array() override {
        frames_.pop_back();
        pop_child();
        return true;
    }
    bool key(string_t& k) override {
        Frame& f = frames_.back();
        const std::size_t end = static_cast<std::size_t>(*cursor_ - text_.data());
        const std::size_t start = text_.rfind('"', end >= 2 ? end - 2 : 0);
        const std::size_t offset = start == std::string::npos ? end : start;
        if (!f.keys.insert(k).second) {
            const auto loc = location_of(text_, offset);
            throw ConfigError("duplicate key '" + k + "' at line " + std::to_string(loc.line) + ", column " +
                              std::to_string(loc.column));
        }
        pending_ = escape(k);
        offsets[pointer() + "/" + pending_] = offset;
        return true;
    }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) override {
        throw ConfigError(std::string("JSON parse error: ") + ex.what());
    }

private:
    struct Frame {
        bool object;
        std::set<std::string> keys;
        long index;
    };

    static std::string escape(const std::string& k) {
        std::string out;
        for (char c : k) {
            if (c == '~') out += "~0";
            else if (c == '/') out += "~1";
            else out += c;
        }
        return out;
    }

    std::string pointer() const {
        std::string p;
        for (const auto& t : path_) p += "/" + t;
        return p;
    }

    void open_child() {
        if (frames_.empty()) return;
        Frame& f = frames_.back();
        if (f.object) path_.push_back(pending_);
        else path_.push_back(std::to_string(++f.index));
    }
    void pop_child() {
        if (!path_.empty() && !frames_.empty()) path_.pop_back();
    }
    bool value() {
        if (!frames_.empty() && !frames_.back().object) ++frames_.back().index;
        return true;
    }

    const std::string& text_;
    const char* const* cursor_;
    std::vector<Frame> frames_;
    std::vector<std::string> path_;
    std::string pending_;
};

/// Walks the parsed document, checking keys against the allowed set and
/// collecting every violation.
class ConfigReader {
public:
    ConfigReader(const std::string& text, std::map<std::string, std::size_t> offsets, std::filesystem::path base)
        : text_(text), offsets_(std::move(offsets)), base_(std::move(base)) {}

    std::vector<std::string> issues;

    std::string where(const std::string& ptr) const {
        auto it = offsets_.find(ptr);
        if (it == offsets_.end()) return ptr.empty() ? "/" : ptr;
        const auto loc = location_of(text_, it->second);
        return ptr + " (line " + std::to_string(loc.line) + ", column " + std::to_string(loc.column) + ")";
    }

    void allow(const nlohmann::json& obj, const std::string& ptr, std::initializer_list<const char*> keys) {
        if (!obj.is_object()) {
            issues.push_back(where(ptr) + ": expected an object");
            return;
        }
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!ok.count(it.key())) issues.push_back("unknown key '" + it.key() + "' at " + where(ptr + "/" + it.key()));
    }

    template <class T>
    std::optional<T> get(const nlohmann::json& obj, const std::string& ptr, const char* key) {
        if (!obj.is_object() || !obj.contains(key)) return std::nullopt;
        try {
            return obj.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            issues.push_back(where(ptr + "/" + key) + ": wrong value type");
            return std::nullopt;
        }
    }

    std::optional<Polynomial> expression(const nlohmann::json& v, const std::string& ptr,
                                         const std::vector<std::string>& vars) {
        try {
            if (v.is_number()) return Polynomial::constant(v.get<double>());
            if (v.is_string()) return parse_polynomial(v.get<std::string>(), vars);
            issues.push_back(where(ptr) + ": expected a number or an expression string");
        } catch (const ConfigError& e) {
            issues.push_back(where(ptr) + ": " + e.what());
        }
        return std::nullopt;
    }

    /// Number, expression string, {"samples": {"t": [...], "values": [...]}} or {"csv": "file"}.
    std::optional<ScalarFunction> scalar(const nlohmann::json& v, const std::string& ptr, const std::string& var) {
        if (!v.is_object()) {
            auto p = expression(v, ptr, {var});
            if (p) return ScalarFunction(*p);
            return std::nullopt;
        }
        allow(v, ptr, {"samples", "csv"});
        try {
            if (v.contains("samples")) {
                const auto& s = v.at("samples");
                allow(s, ptr + "/samples", {"t", "x", "values"});
                const std::string axis = s.contains("x") ? "x" : "t";
                if (!s.contains(axis) || !s.contains("values")) {
                    issues.push_back(where(ptr + "/samples") + ": needs '" + axis + "' and 'values'");
                    return std::nullopt;
                }
                return ScalarFunction(
                    PiecewiseLinear(s.at(axis).get<std::vector<double>>(), s.at("values").get<std::vector<double>>()));
            }
            if (v.contains("csv")) return ScalarFunction(read_samples(base_ / v.at("csv").get<std::string>()));
            issues.push_back(where(ptr) + ": expected 'samples' or 'csv'");
        } catch (const nlohmann::json::exception&) {
            issues.push_back(where(ptr) + ": malformed samples");
        } catch (const StefanError& e) {
            issues.push_back(where(ptr) + ": " + e.what());
        }
        return std::nullopt;
    }

    static PiecewiseLinear read_samples(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read samples file " + path.string());
        std::vector<double> t, v;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ss(line);
            double a, b;
            if (ss >> a >> b) {
                t.push_back(a);
                v.push_back(b);
            }
        }
        return PiecewiseLinear(std::move(t), std::move(v));
    }

private:
    const std::string& text_;
    std::map<std::string, std::size_t> offsets_;
    std::filesystem::path base_;
};

inline SolverMode parse_solver_mode(const std::string& s) {
    if (s == "jacobi") return SolverMode::jacobi;
    if (s == "gauss_seidel") return SolverMode::gauss_seidel;
    if (s == "newton") return SolverMode::newton;
    throw ConfigError("unknown solver mode '" + s + "'");
}

inline InterpolantKind parse_interpolant_kind(const std::string& s) {
    if (s == "tilde_v") return InterpolantKind::tilde_v;
    if (s == "hat_v_tau") return InterpolantKind::hat_v_tau;
    if (s == "v_tau") return InterpolantKind::v_tau;
    throw ConfigError("unknown interpolant kind '" + s + "'");
}

} // namespace detail

/// Parses and validates a configuration held in memory; `source` locates relative sample files.
inline RunConfig parse_config_text(const std::string& text, const std::filesystem::path& source = {},
                                   std::optional<RunMode> mode_override = std::nullopt) {
    using nlohmann::json;
    const char* cursor = text.data();
    detail::KeyIndexer indexer(text, &cursor);
    detail::TrackingIterator first{text.data(), &cursor};
    detail::TrackingIterator last{text.data() + text.size(), &cursor};
    json::sax_parse(first, last, &indexer);
    const json doc = json::parse(text);

    detail::ConfigReader rd(text, indexer.offsets, source.has_parent_path() ? source.parent_path() : ".");
    RunConfig cfg;
    cfg.source = source;
    rd.allow(doc, "", {"mode", "problem", "numerics", "verify", "output", "workers"});
    if (!rd.issues.empty()) goto done;
    {
        try {
            if (mode_override) cfg.mode = *mode_override;
            else if (auto m = rd.get<std::string>(doc, "", "mode")) cfg.mode = parse_run_mode(*m);
            else rd.issues.push_back("missing field 'mode'");
        } catch (const ConfigError& e) {
            rd.issues.push_back(rd.where("/mode") + ": " + e.what());
        }
        if (auto w = rd.get<int>(doc, "", "workers")) cfg.workers = *w;

        const bool needs_problem = cfg.mode != RunMode::verify;
        if (doc.contains("problem")) {
            const json& p = doc.at("problem");
            rd.allow(p, "/problem", {"T", "L", "R", "material", "f", "p", "phi", "gamma", "g"});
            if (auto v = rd.get<double>(p, "/problem", "T")) cfg.T = *v;
            else rd.issues.push_back("missing field problem.T");
            if (auto v = rd.get<double>(p, "/problem", "L")) cfg.L = *v;
            else rd.issues.push_back("missing field problem.L");
            if (auto v = rd.get<double>(p, "/problem", "R")) cfg.R = *v;
            else if (cfg.mode == RunMode::optimize) rd.issues.push_back("missing field problem.R");
            else cfg.R = 1e300;
            if (!(cfg.T > 0.0)) rd.issues.push_back("problem.T must be positive");
            if (!(cfg.L > 0.0)) rd.issues.push_back("problem.L must be positive");
            if (!(cfg.R > 0.0)) rd.issues.push_back("problem.R must be positive");

            if (p.contains("material")) {
                const json& mat = p.at("material");
                rd.allow(mat, "/problem/material",
                         {"critical_temps", "latent_heats", "alpha", "k", "reference_temp", "bbar"});
                cfg.material.critical_temps =
                    rd.get<std::vector<double>>(mat, "/problem/material", "critical_temps").value_or(std::vector<double>{});
                cfg.material.latent_heats =
                    rd.get<std::vector<double>>(mat, "/problem/material", "latent_heats").value_or(std::vector<double>{});
                cfg.material.reference_temp = rd.get<double>(mat, "/problem/material", "reference_temp").value_or(0.0);
                cfg.material.bbar = rd.get<double>(mat, "/problem/material", "bbar");
                for (const char* name : {"alpha", "k"}) {
                    auto& pieces = std::string(name) == "alpha" ? cfg.material.alpha_pieces : cfg.material.k_pieces;
                    const std::string ptr = std::string("/problem/material/") + name;
                    if (!mat.is_object() || !mat.contains(name)) {
                        rd.issues.push_back(std::string("missing field problem.material.") + name);
                        continue;
                    }
                    json arr = mat.at(name);
                    if (!arr.is_array()) arr = json::array({arr});
                    for (std::size_t j = 0; j < arr.size(); ++j)
                        if (auto e = rd.expression(arr[j], ptr + "/" + std::to_string(j), {"u"}))
                            pieces.emplace_back(*e);
                }
                if (rd.issues.empty()) {
                    try {
                        cfg.material.validate();
                    } catch (const StefanError& e) {
                        rd.issues.push_back(std::string("problem.material: ") + e.what());
                    }
                }
            } else if (needs_problem) {
                rd.issues.push_back("missing field problem.material");
            }

            if (p.contains("f")) {
                if (auto e = rd.expression(p.at("f"), "/problem/f", {"x", "t"})) cfg.data.f = FieldFunction(*e);
            }
            auto scalar_field = [&](const char* key, const char* var, ScalarFunction& out) {
                if (!p.contains(key)) return false;
                if (auto s = rd.scalar(p.at(key), std::string("/problem/") + key, var)) out = *s;
                return true;
            };
            scalar_field("p", "t", cfg.data.p);
            scalar_field("phi", "x", cfg.data.phi);
            scalar_field("g", "t", cfg.control);
            cfg.has_gamma = scalar_field("gamma", "t", cfg.data.gamma);
            if (cfg.mode == RunMode::optimize && !cfg.has_gamma)
                rd.issues.push_back("missing field problem.gamma (the measurement is required in optimize mode)");
        } else if (needs_problem) {
            rd.issues.push_back("missing field 'problem'");
        }

        if (doc.contains("numerics")) {
            const json& nu = doc.at("numerics");
            rd.allow(nu, "/numerics", {"n", "m", "epsilon", "solver", "optimizer", "initial_control"});
            cfg.n = rd.get<int>(nu, "/numerics", "n").value_or(0);
            cfg.m = rd.get<int>(nu, "/numerics", "m").value_or(cfg.n);
            if (needs_problem && cfg.n < 1) rd.issues.push_back("numerics.n must be an integer >= 1");
            if (needs_problem && cfg.m < 1) rd.issues.push_back("numerics.m must be an integer >= 1");
            cfg.epsilon = rd.get<double>(nu, "/numerics", "epsilon").value_or(cfg.n > 0 ? 1.0 / cfg.n : 0.0);
            if (needs_problem && cfg.n >= 1 && !(cfg.epsilon > 0.0)) rd.issues.push_back("numerics.epsilon must be positive");
            if (nu.contains("solver")) {
                const json& s = nu.at("solver");
                rd.allow(s, "/numerics/solver", {"mode", "tol", "max_iter", "scalar_tol"});
                try {
                    if (auto m = rd.get<std::string>(s, "/numerics/solver", "mode"))
                        cfg.solver.mode = detail::parse_solver_mode(*m);
                } catch (const ConfigError& e) {
                    rd.issues.push_back(rd.where("/numerics/solver/mode") + ": " + e.what());
                }
                cfg.solver.tol = rd.get<double>(s, "/numerics/solver", "tol").value_or(cfg.solver.tol);
                cfg.solver.max_iter = rd.get<int>(s, "/numerics/solver", "max_iter").value_or(cfg.solver.max_iter);
                cfg.solver.scalar_tol = rd.get<double>(s, "/numerics/solver", "scalar_tol").value_or(cfg.solver.scalar_tol);
                try {
                    cfg.solver.validate();
                } catch (const StefanError& e) {
                    rd.issues.push_back(std::string("numerics.solver: ") + e.what());
                }
            }
            if (nu.contains("optimizer")) {
                const json& o = nu.at("optimizer");
                const std::string ptr = "/numerics/optimizer";
                rd.allow(o, ptr, {"max_evals", "initial_step", "shrink", "min_step", "restarts", "seed", "pattern_moves"});
                auto& op = cfg.optimizer;
                op.max_evals = rd.get<int>(o, ptr, "max_evals").value_or(op.max_evals);
                op.initial_step = rd.get<double>(o, ptr, "initial_step").value_or(op.initial_step);
                op.shrink = rd.get<double>(o, ptr, "shrink").value_or(op.shrink);
                op.min_step = rd.get<double>(o, ptr, "min_step").value_or(op.min_step);
                op.restarts = rd.get<int>(o, ptr, "restarts").value_or(op.restarts);
                op.seed = rd.get<std::uint64_t>(o, ptr, "seed").value_or(op.seed);
                op.pattern_moves = rd.get<bool>(o, ptr, "pattern_moves").value_or(op.pattern_moves);
                try {
                    op.validate();
                } catch (const StefanError& e) {
                    rd.issues.push_back(std::string("numerics.optimizer: ") + e.what());
                }
            }
            cfg.initial_control = rd.get<std::vector<double>>(nu, "/numerics", "initial_control");
            if (cfg.initial_control && static_cast<int>(cfg.initial_control->size()) != cfg.n + 1)
                rd.issues.push_back("numerics.initial_control must have n + 1 entries");
        } else if (needs_problem) {
            rd.issues.push_back("missing field 'numerics'");
        }

        if (doc.contains("verify")) {
            const json& v = doc.at("verify");
            rd.allow(v, "/verify",
                     {"benchmark", "constants", "t0", "T", "L", "amplitude", "levels", "functional_n", "refinement",
                      "solver_mode"});
            auto& vc = cfg.verify;
            vc.benchmark = rd.get<std::string>(v, "/verify", "benchmark").value_or(vc.benchmark);
            if (vc.benchmark != "neumann" && vc.benchmark != "heat")
                rd.issues.push_back(rd.where("/verify/benchmark") + ": expected 'neumann' or 'heat'");
            vc.t0 = rd.get<double>(v, "/verify", "t0").value_or(vc.t0);
            vc.T = rd.get<double>(v, "/verify", "T").value_or(vc.T);
            vc.L = rd.get<double>(v, "/verify", "L").value_or(vc.L);
            vc.amplitude = rd.get<double>(v, "/verify", "amplitude").value_or(vc.amplitude);
            vc.refinement = rd.get<int>(v, "/verify", "refinement").value_or(vc.refinement);
            vc.functional_ns = rd.get<std::vector<int>>(v, "/verify", "functional_n").value_or(vc.functional_ns);
            if (auto lv = rd.get<std::vector<std::vector<int>>>(v, "/verify", "levels")) {
                vc.levels.clear();
                for (const auto& l : *lv) {
                    if (l.size() != 2 || l[0] < 1 || l[1] < 1) {
                        rd.issues.push_back(rd.where("/verify/levels") + ": each level is [n, m] with n, m >= 1");
                        break;
                    }
                    vc.levels.emplace_back(l[0], l[1]);
                }
            }
            if (vc.levels.size() < 3) rd.issues.push_back("verify.levels needs at least 3 grid levels");
            if (!vc.functional_ns.empty() && vc.functional_ns.size() < 3)
                rd.issues.push_back("verify.functional_n needs at least 3 values");
            if (vc.refinement < 4) rd.issues.push_back("verify.refinement must be >= 4");
            try {
                if (auto m = rd.get<std::string>(v, "/verify", "solver_mode")) cfg.solver.mode = detail::parse_solver_mode(*m);
            } catch (const ConfigError& e) {
                rd.issues.push_back(rd.where("/verify/solver_mode") + ": " + e.what());
            }
            if (v.contains("constants")) {
                const json& c = v.at("constants");
                const std::string ptr = "/verify/constants";
                rd.allow(c, ptr,
                         {"alpha_liquid", "k_liquid", "alpha_solid", "k_solid", "latent_heat", "surface_temp",
                          "initial_temp"});
                auto& k = vc.constants;
                k.alpha_liquid = rd.get<double>(c, ptr, "alpha_liquid").value_or(k.alpha_liquid);
                k.k_liquid = rd.get<double>(c, ptr, "k_liquid").value_or(k.k_liquid);
                k.alpha_solid = rd.get<double>(c, ptr, "alpha_solid").value_or(k.alpha_solid);
                k.k_solid = rd.get<double>(c, ptr, "k_solid").value_or(k.k_solid);
                k.latent_heat = rd.get<double>(c, ptr, "latent_heat").value_or(k.latent_heat);
                k.surface_temp = rd.get<double>(c, ptr, "surface_temp").value_or(k.surface_temp);
                k.initial_temp = rd.get<double>(c, ptr, "initial_temp").value_or(k.initial_temp);
            }
        }

        if (doc.contains("output")) {
            const json& o = doc.at("output");
            rd.allow(o, "/output", {"directory", "formats", "lattice"});
            if (auto d = rd.get<std::string>(o, "/output", "directory")) cfg.output.directory = *d;
            if (auto f = rd.get<std::vector<std::string>>(o, "/output", "formats")) {
                cfg.output.csv = cfg.output.binary = false;
                for (const auto& s : *f) {
                    if (s == "csv") cfg.output.csv = true;
                    else if (s == "binary") cfg.output.binary = true;
                    else rd.issues.push_back(rd.where("/output/formats") + ": unknown format '" + s + "'");
                }
            }
            if (o.is_object() && o.contains("lattice")) {
                const json& l = o.at("lattice");
                rd.allow(l, "/output/lattice", {"nx", "nt", "kind"});
                LatticeConfig lc;
                lc.nx = rd.get<int>(l, "/output/lattice", "nx").value_or(lc.nx);
                lc.nt = rd.get<int>(l, "/output/lattice", "nt").value_or(lc.nt);
                if (lc.nx < 2 || lc.nt < 2) rd.issues.push_back("output.lattice: nx and nt must be >= 2");
                try {
                    if (auto k = rd.get<std::string>(l, "/output/lattice", "kind"))
                        lc.kind = detail::parse_interpolant_kind(*k);
                } catch (const ConfigError& e) {
                    rd.issues.push_back(rd.where("/output/lattice/kind") + ": " + e.what());
                }
                cfg.output.lattice = lc;
            }
        }
        if (cfg.workers < 1) rd.issues.push_back("workers must be >= 1");
    }
done:
    if (!rd.issues.empty()) {
        std::string msg = "invalid configuration";
        if (!source.empty()) msg += " " + source.string();
        msg += ":";
        for (const auto& s : rd.issues) msg += "\n  - " + s;
        throw ConfigError(msg);
    }
    return cfg;
}

inline RunConfig parse_config(const std::filesystem::path& path, std::optional<RunMode> mode_override = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open configuration file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text, path, mode_override);
}

} // namespace stefan
