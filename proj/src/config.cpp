#include "dunkl/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dunkl/errors.hpp"

namespace dunkl {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
    std::ostringstream os;
    os << "invalid configuration (" << problems.size() << " problem" << (problems.size() == 1 ? "" : "s") << ")";
    for (const auto& p : problems) {
        os << "\n  " << p;
    }
    return os.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::simulate:
            return "simulate";
        case ExperimentKind::convergence:
            return "convergence";
        case ExperimentKind::moments:
            return "moments";
        case ExperimentKind::increments:
            return "increments";
        case ExperimentKind::chamber_exit:
            return "chamber-exit";
        case ExperimentKind::cir_check:
            return "cir-check";
        case ExperimentKind::validate:
            return "validate";
    }
    return "unknown";
}

namespace {

using json = nlohmann::json;

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

/// Collects every problem instead of stopping at the first one.
class Reader {
  public:
    std::vector<std::string> problems;

    void fail(const std::string& path, const std::string& msg) { problems.push_back(path + ": " + msg); }

    bool is_object(const json& j, const std::string& path) {
        if (!j.is_object()) {
            fail(path, "expected an object");
            return false;
        }
        return true;
    }

    void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
        for (const auto& [key, _] : obj.items()) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
                fail(child(path, key), "unknown key");
            }
        }
    }

    const json* find(const json& obj, const std::string& path, const char* key, bool required) {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) {
                fail(child(path, key), "missing");
            }
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& j, const std::string& path) {
        if (!j.is_number()) {
            fail(path, "expected a number");
            return std::nullopt;
        }
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            fail(path, "must be finite");
            return std::nullopt;
        }
        return v;
    }

    std::optional<double> number(const json& obj, const std::string& path, const char* key, bool required) {
        const json* j = find(obj, path, key, required);
        return j ? number(*j, child(path, key)) : std::nullopt;
    }

    std::optional<long long> integer(const json& j, const std::string& path) {
        if (!j.is_number_integer()) {
            fail(path, "expected an integer");
            return std::nullopt;
        }
        return j.get<long long>();
    }

    std::optional<int> int_at_least(const json& obj, const std::string& path, const char* key, bool required,
                                    long long lo) {
        const json* j = find(obj, path, key, required);
        if (!j) {
            return std::nullopt;
        }
        const auto v = integer(*j, child(path, key));
        if (!v) {
            return std::nullopt;
        }
        if (*v < lo || *v > 1'000'000'000LL) {
            fail(child(path, key), "must be an integer in [" + std::to_string(lo) + ", 1e9]");
            return std::nullopt;
        }
        return static_cast<int>(*v);
    }

    std::optional<std::string> string(const json& obj, const std::string& path, const char* key, bool required) {
        const json* j = find(obj, path, key, required);
        if (!j) {
            return std::nullopt;
        }
        if (!j->is_string()) {
            fail(child(path, key), "expected a string");
            return std::nullopt;
        }
        return j->get<std::string>();
    }

    std::optional<std::vector<double>> numbers(const json& j, const std::string& path) {
        if (!j.is_array()) {
            fail(path, "expected an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        bool ok = true;
        for (std::size_t i = 0; i < j.size(); ++i) {
            const auto v = number(j[i], index(path, i));
            ok = ok && v.has_value();
            out.push_back(v.value_or(0.0));
        }
        return ok ? std::optional(out) : std::nullopt;
    }

    std::optional<Eigen::VectorXd> vector(const json& j, const std::string& path) {
        const auto v = numbers(j, path);
        if (!v) {
            return std::nullopt;
        }
        return Eigen::Map<const Eigen::VectorXd>(v->data(), static_cast<Eigen::Index>(v->size())).eval();
    }

    std::optional<Eigen::MatrixXd> matrix(const json& j, const std::string& path) {
        if (!j.is_array() || j.empty()) {
            fail(path, "expected a non-empty array of rows");
            return std::nullopt;
        }
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < j.size(); ++i) {
            const auto r = numbers(j[i], index(path, i));
            if (!r) {
                return std::nullopt;
            }
            rows.push_back(*r);
        }
        const std::size_t cols = rows.front().size();
        if (cols == 0 || std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r.size() != cols; })) {
            fail(path, "rows must be non-empty and of equal length");
            return std::nullopt;
        }
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t c = 0; c < cols; ++c) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
            }
        }
        return m;
    }

    /// Runs a library constructor and records its exception as a problem.
    template <typename Fn>
    auto attempt(const std::string& path, Fn&& fn) -> std::optional<decltype(fn())> {
        try {
            return fn();
        } catch (const std::exception& e) {
            fail(path, e.what());
            return std::nullopt;
        }
    }
};

// A time function is a number, {"constant": c}, {"affine_sqrt": [a, b]} or
// {"table": {"t": [...], "v": [...]}}.
std::optional<TimeFn> parse_time_fn(Reader& r, const json& j, const std::string& path) {
    if (j.is_number()) {
        const auto v = r.number(j, path);
        return v ? std::optional(TimeFn::constant(*v)) : std::nullopt;
    }
    if (!j.is_object() || j.size() != 1) {
        r.fail(path, "expected a number or an object with one of constant, affine_sqrt, table");
        return std::nullopt;
    }
    const auto& [form, body] = *j.items().begin();
    const std::string sub = child(path, form);
    if (form == "constant") {
        const auto v = r.number(body, sub);
        return v ? std::optional(TimeFn::constant(*v)) : std::nullopt;
    }
    if (form == "affine_sqrt") {
        const auto v = r.numbers(body, sub);
        if (!v) {
            return std::nullopt;
        }
        if (v->size() != 2) {
            r.fail(sub, "expected [a, b]");
            return std::nullopt;
        }
        return TimeFn::affine_sqrt((*v)[0], (*v)[1]);
    }
    if (form == "table") {
        if (!r.is_object(body, sub)) {
            return std::nullopt;
        }
        r.only_keys(body, sub, {"t", "v"});
        const json* t = r.find(body, sub, "t", true);
        const json* v = r.find(body, sub, "v", true);
        if (!t || !v) {
            return std::nullopt;
        }
        auto tv = r.numbers(*t, child(sub, "t"));
        auto vv = r.numbers(*v, child(sub, "v"));
        if (!tv || !vv) {
            return std::nullopt;
        }
        return r.attempt(sub, [&] { return TimeFn::tabulated(std::move(*tv), std::move(*vv)); });
    }
    r.fail(sub, "unknown time function form");
    return std::nullopt;
}

std::optional<std::vector<TimeFn>> parse_time_fns(Reader& r, const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) {
        r.fail(path, "expected a non-empty array of time functions");
        return std::nullopt;
    }
    std::vector<TimeFn> out;
    bool ok = true;
    for (std::size_t i = 0; i < j.size(); ++i) {
        auto f = parse_time_fn(r, j[i], index(path, i));
        ok = ok && f.has_value();
        out.push_back(f.value_or(TimeFn{}));
    }
    return ok ? std::optional(out) : std::nullopt;
}

std::optional<RootSystem> parse_root_system(Reader& r, const json& j, const std::string& path) {
    if (!r.is_object(j, path)) {
        return std::nullopt;
    }
    const auto type = r.string(j, path, "type", true);
    if (!type) {
        return std::nullopt;
    }
    if (*type == "A" || *type == "B") {
        r.only_keys(j, path, {"type", "d"});
        const auto d = r.int_at_least(j, path, "d", true, 2);
        if (!d) {
            return std::nullopt;
        }
        return *type == "A" ? make_type_A(*d) : make_type_B(*d);
    }
    if (*type == "sum") {
        r.only_keys(j, path, {"type", "parts"});
        const json* parts = r.find(j, path, "parts", true);
        if (!parts) {
            return std::nullopt;
        }
        if (!parts->is_array() || parts->size() < 2) {
            r.fail(child(path, "parts"), "expected at least two root systems");
            return std::nullopt;
        }
        std::optional<RootSystem> acc;
        bool ok = true;
        for (std::size_t i = 0; i < parts->size(); ++i) {
            auto part = parse_root_system(r, (*parts)[i], index(child(path, "parts"), i));
            if (!part) {
                ok = false;
                continue;
            }
            if (ok) {
                acc = acc ? direct_sum(*acc, *part) : std::move(*part);
            }
        }
        return ok ? acc : std::nullopt;
    }
    if (*type == "custom") {
        r.only_keys(j, path, {"type", "roots", "orbits"});
        const json* roots = r.find(j, path, "roots", true);
        const json* orbits = r.find(j, path, "orbits", true);
        if (!roots || !orbits) {
            return std::nullopt;
        }
        // Rows of the config are roots; the library stores them as columns.
        const auto rows = r.matrix(*roots, child(path, "roots"));
        std::vector<int> labels;
        bool ok = rows.has_value();
        if (!orbits->is_array()) {
            r.fail(child(path, "orbits"), "expected an array of integers");
            ok = false;
        } else {
            for (std::size_t i = 0; i < orbits->size(); ++i) {
                const auto v = r.integer((*orbits)[i], index(child(path, "orbits"), i));
                ok = ok && v.has_value();
                labels.push_back(static_cast<int>(v.value_or(0)));
            }
        }
        if (!ok) {
            return std::nullopt;
        }
        auto rs = r.attempt(path, [&] { return RootSystem(rows->transpose(), labels); });
        if (rs) {
            const AxiomReport axioms = validate_axioms(*rs);
            if (!axioms.passed()) {
                r.fail(path, "roots do not form a reduced positive root system");
                return std::nullopt;
            }
        }
        return rs;
    }
    r.fail(child(path, "type"), "expected A, B, sum or custom");
    return std::nullopt;
}

std::optional<Diffusion> parse_sigma(Reader& r, const json& j, const std::string& path, int d) {
    if (!r.is_object(j, path) || j.size() != 1) {
        if (j.is_object()) {
            r.fail(path, "expected exactly one of scalar, diagonal, matrix, time_matrix, linear_clamped");
        }
        return std::nullopt;
    }
    const auto& [form, body] = *j.items().begin();
    const std::string sub = child(path, form);
    if (form == "scalar") {
        auto f = parse_time_fn(r, body, sub);
        return f ? r.attempt(sub, [&] { return Diffusion::scalar(*f, d); }) : std::nullopt;
    }
    if (form == "diagonal") {
        auto fs = parse_time_fns(r, body, sub);
        return fs ? r.attempt(sub, [&] { return Diffusion::diagonal(std::move(*fs)); }) : std::nullopt;
    }
    if (form == "matrix") {
        auto m = r.matrix(body, sub);
        return m ? r.attempt(sub, [&] { return Diffusion::matrix(*m); }) : std::nullopt;
    }
    if (form == "time_matrix") {
        if (!body.is_array() || body.empty() || !body.front().is_array()) {
            r.fail(sub, "expected an array of rows of time functions");
            return std::nullopt;
        }
        std::vector<TimeFn> entries;
        const std::size_t cols = body.front().size();
        bool ok = cols > 0;
        for (std::size_t i = 0; i < body.size(); ++i) {
            auto row = parse_time_fns(r, body[i], index(sub, i));
            if (!row || row->size() != cols) {
                if (row) {
                    r.fail(index(sub, i), "rows must have equal length");
                }
                ok = false;
                continue;
            }
            entries.insert(entries.end(), row->begin(), row->end());
        }
        if (!ok) {
            return std::nullopt;
        }
        return r.attempt(sub, [&] {
            return Diffusion::time_matrix(static_cast<int>(body.size()), static_cast<int>(cols), std::move(entries));
        });
    }
    if (form == "linear_clamped") {
        if (!r.is_object(body, sub)) {
            return std::nullopt;
        }
        r.only_keys(body, sub, {"a", "b", "lo", "hi"});
        const json* a = r.find(body, sub, "a", true);
        const json* b = r.find(body, sub, "b", true);
        const auto lo = r.number(body, sub, "lo", true);
        const auto hi = r.number(body, sub, "hi", true);
        auto av = a ? r.vector(*a, child(sub, "a")) : std::nullopt;
        auto bv = b ? r.vector(*b, child(sub, "b")) : std::nullopt;
        if (!av || !bv || !lo || !hi) {
            return std::nullopt;
        }
        return r.attempt(sub, [&] { return Diffusion::linear_clamped(*av, *bv, *lo, *hi); });
    }
    r.fail(sub, "unknown diffusion form");
    return std::nullopt;
}

std::optional<Drift> parse_drift(Reader& r, const json& j, const std::string& path) {
    if (j.is_string()) {
        if (j.get<std::string>() == "zero") {
            return Drift::zero();
        }
        r.fail(path, "expected \"zero\" or an object");
        return std::nullopt;
    }
    if (!r.is_object(j, path)) {
        return std::nullopt;
    }
    if (j.size() != 1) {
        r.fail(path, "expected exactly one of linear, constant, affine");
        return std::nullopt;
    }
    const auto& [form, body] = *j.items().begin();
    const std::string sub = child(path, form);
    if (form == "linear") {
        auto f = parse_time_fn(r, body, sub);
        return f ? std::optional(Drift::linear(*f)) : std::nullopt;
    }
    if (form == "constant") {
        auto v = r.vector(body, sub);
        return v ? std::optional(Drift::constant(*v)) : std::nullopt;
    }
    if (form == "affine") {
        if (!r.is_object(body, sub)) {
            return std::nullopt;
        }
        r.only_keys(body, sub, {"A", "v"});
        const json* a = r.find(body, sub, "A", true);
        const json* v = r.find(body, sub, "v", true);
        auto am = a ? r.matrix(*a, child(sub, "A")) : std::nullopt;
        auto vv = v ? r.vector(*v, child(sub, "v")) : std::nullopt;
        if (!am || !vv) {
            return std::nullopt;
        }
        return r.attempt(sub, [&] { return Drift::affine(*am, *vv); });
    }
    r.fail(sub, "unknown drift form");
    return std::nullopt;
}

std::optional<ModelSpec> parse_model(Reader& r, const json& j, const std::string& path) {
    if (!r.is_object(j, path)) {
        return std::nullopt;
    }
    r.only_keys(j, path, {"root_system", "T", "xi", "k", "sigma", "drift"});
    const json* rs_j = r.find(j, path, "root_system", true);
    const auto T = r.number(j, path, "T", true);
    const json* xi_j = r.find(j, path, "xi", true);
    const json* k_j = r.find(j, path, "k", true);
    const json* sigma_j = r.find(j, path, "sigma", true);
    const json* drift_j = r.find(j, path, "drift", false);

    auto rs = rs_j ? parse_root_system(r, *rs_j, child(path, "root_system")) : std::nullopt;
    auto xi = xi_j ? r.vector(*xi_j, child(path, "xi")) : std::nullopt;
    auto k = k_j ? parse_time_fns(r, *k_j, child(path, "k")) : std::nullopt;
    std::optional<Diffusion> sigma;
    if (sigma_j && rs) {
        sigma = parse_sigma(r, *sigma_j, child(path, "sigma"), rs->dim());
    }
    std::optional<Drift> drift = drift_j ? parse_drift(r, *drift_j, child(path, "drift")) : std::optional(Drift::zero());
    if (T && !(*T > 0.0)) {
        r.fail(child(path, "T"), "must be positive");
    }
    if (!rs || !T || !xi || !k || !sigma || !drift || !(*T > 0.0)) {
        return std::nullopt;
    }
    return r.attempt(path, [&] { return ModelSpec(std::move(*rs), *T, *xi, std::move(*sigma), std::move(*drift), *k); });
}

void parse_scheme(Reader& r, const json& j, const std::string& path, SchemeConfig& s) {
    if (!r.is_object(j, path)) {
        return;
    }
    r.only_keys(j, path, {"variant", "theta", "c", "tol", "max_iterations"});
    if (const auto v = r.string(j, path, "variant", true)) {
        if (*v == "exact") {
            s.variant = Variant::exact;
        } else if (*v == "truncated") {
            s.variant = Variant::truncated;
        } else {
            r.fail(child(path, "variant"), "expected exact or truncated");
        }
    }
    s.theta = r.number(j, path, "theta", true).value_or(s.theta);
    s.c = r.number(j, path, "c", false).value_or(s.c);
    s.solver.tol = r.number(j, path, "tol", false).value_or(s.solver.tol);
    s.solver.max_iterations = r.int_at_least(j, path, "max_iterations", false, 1).value_or(s.solver.max_iterations);
    if (s.variant == Variant::exact && !(s.theta >= 0.0 && s.theta < 0.5)) {
        r.fail(child(path, "theta"), "exact variant needs theta in [0, 1/2)");
    }
    if (s.variant == Variant::truncated) {
        if (!(s.theta >= 0.0 && s.theta < 1.0)) {
            r.fail(child(path, "theta"), "truncated variant needs theta in [0, 1)");
        }
        if (!(s.c > 1.0)) {
            r.fail(child(path, "c"), "truncation constant must exceed 1");
        }
    }
    if (!(s.solver.tol > 0.0)) {
        r.fail(child(path, "tol"), "must be positive");
    }
}

std::optional<ExperimentKind> kind_from(const std::string& s) {
    static const std::pair<const char*, ExperimentKind> table[] = {
        {"simulate", ExperimentKind::simulate},       {"convergence", ExperimentKind::convergence},
        {"moments", ExperimentKind::moments},         {"increments", ExperimentKind::increments},
        {"chamber-exit", ExperimentKind::chamber_exit}, {"cir-check", ExperimentKind::cir_check},
        {"validate", ExperimentKind::validate},
    };
    for (const auto& [name, kind] : table) {
        if (s == name) {
            return kind;
        }
    }
    return std::nullopt;
}

void parse_experiment(Reader& r, const json& j, const std::string& path, ExperimentConfig& cfg) {
    if (!r.is_object(j, path)) {
        return;
    }
    const auto name = r.string(j, path, "kind", true);
    const auto kind = name ? kind_from(*name) : std::nullopt;
    if (!kind) {
        if (name) {
            r.fail(child(path, "kind"),
                   "expected simulate, convergence, moments, increments, chamber-exit, cir-check or validate");
        }
        return;
    }
    cfg.kind = *kind;
    switch (*kind) {
        case ExperimentKind::simulate:
        case ExperimentKind::convergence:
        case ExperimentKind::chamber_exit:
            r.only_keys(j, path, {"kind"});
            break;
        case ExperimentKind::moments:
            r.only_keys(j, path, {"kind", "p"});
            if (const auto p = r.number(j, path, "p", true)) {
                if (*p < 0.0) {
                    r.fail(child(path, "p"), "must be non-negative");
                }
                cfg.p = *p;
            }
            break;
        case ExperimentKind::increments:
            r.only_keys(j, path, {"kind", "taus"});
            if (const json* t = r.find(j, path, "taus", true)) {
                if (auto taus = r.numbers(*t, child(path, "taus"))) {
                    if (taus->empty()) {
                        r.fail(child(path, "taus"), "must not be empty");
                    }
                    cfg.taus = std::move(*taus);
                }
            }
            break;
        case ExperimentKind::cir_check: {
            r.only_keys(j, path, {"kind", "sigma", "lambda", "k", "xi", "T"});
            cfg.cir.sigma = r.number(j, path, "sigma", true).value_or(cfg.cir.sigma);
            cfg.cir.lambda = r.number(j, path, "lambda", true).value_or(cfg.cir.lambda);
            cfg.cir.k = r.number(j, path, "k", true).value_or(cfg.cir.k);
            cfg.cir.xi = r.number(j, path, "xi", true).value_or(cfg.cir.xi);
            cfg.cir.T = r.number(j, path, "T", true).value_or(cfg.cir.T);
            break;
        }
        case ExperimentKind::validate:
            r.only_keys(j, path, {"kind", "samples", "tol"});
            cfg.samples = r.int_at_least(j, path, "samples", false, 1).value_or(cfg.samples);
            cfg.tol = r.number(j, path, "tol", false).value_or(cfg.tol);
            if (!(cfg.tol > 0.0)) {
                r.fail(child(path, "tol"), "must be positive");
            }
            break;
    }
}

std::vector<int> parse_n_list(Reader& r, const json& j, const std::string& path) {
    std::vector<int> out;
    if (!j.is_array() || j.empty()) {
        r.fail(path, "expected a non-empty array of step counts");
        return out;
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto v = r.integer(j[i], index(path, i));
        if (v && (*v < 1 || *v > 1'000'000'000LL)) {
            r.fail(index(path, i), "step count must be at least 1");
        }
        out.push_back(static_cast<int>(v.value_or(1)));
    }
    return out;
}

void parse_run(Reader& r, const json& j, const std::string& path, ExperimentConfig& cfg) {
    if (!r.is_object(j, path)) {
        return;
    }
    r.only_keys(j, path,
                {"M", "n", "n_list", "n_ref", "seed", "output_dir", "threads", "allow_assumption_violation"});
    const ExperimentKind kind = cfg.kind;
    const bool needs_paths = kind != ExperimentKind::validate;
    const bool needs_n = kind == ExperimentKind::simulate || kind == ExperimentKind::moments ||
                         kind == ExperimentKind::increments || kind == ExperimentKind::cir_check;
    const bool needs_list = kind == ExperimentKind::convergence || kind == ExperimentKind::chamber_exit;

    const long long min_paths = kind == ExperimentKind::convergence ? 100 : 1;
    cfg.paths = r.int_at_least(j, path, "M", needs_paths, min_paths).value_or(0);
    cfg.n = r.int_at_least(j, path, "n", needs_n, 1).value_or(0);
    if (const json* l = r.find(j, path, "n_list", needs_list)) {
        cfg.n_list = parse_n_list(r, *l, child(path, "n_list"));
    }
    cfg.n_ref = r.int_at_least(j, path, "n_ref", kind == ExperimentKind::convergence, 1).value_or(0);

    if (const json* s = r.find(j, path, "seed", true)) {
        if (s->is_number_unsigned()) {
            cfg.seed = s->get<std::uint64_t>();
        } else {
            r.fail(child(path, "seed"), "expected a non-negative 64-bit integer");
        }
    }
    if (const auto out = r.string(j, path, "output_dir", false)) {
        if (out->empty()) {
            r.fail(child(path, "output_dir"), "must not be empty");
        }
        cfg.output_dir = *out;
    }
    cfg.threads = r.int_at_least(j, path, "threads", false, 0).value_or(cfg.threads);
    if (const json* a = r.find(j, path, "allow_assumption_violation", false)) {
        if (a->is_boolean()) {
            cfg.allow_assumption_violation = a->get<bool>();
        } else {
            r.fail(child(path, "allow_assumption_violation"), "expected a boolean");
        }
    }

    if (kind == ExperimentKind::convergence && cfg.n_ref > 0 && !cfg.n_list.empty()) {
        const int largest = *std::max_element(cfg.n_list.begin(), cfg.n_list.end());
        for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
            const int n = cfg.n_list[i];
            const int ratio = n > 0 && cfg.n_ref % n == 0 ? cfg.n_ref / n : 0;
            if (ratio == 0 || (ratio & (ratio - 1)) != 0) {
                r.fail(index(child(path, "n_list"), i), "must divide n_ref by a power of two");
            }
        }
        if (static_cast<long long>(cfg.n_ref) < 16LL * largest) {
            r.fail(child(path, "n_ref"), "must be at least 16 times the largest n");
        }
    }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("malformed JSON: ") + e.what()});
    }
    Reader r;
    ExperimentConfig cfg;
    if (!r.is_object(root, "config")) {
        throw ConfigError(std::move(r.problems));
    }
    cfg.echo = root.dump();
    r.only_keys(root, "", {"model", "scheme", "experiment", "run"});

    if (const json* e = r.find(root, "", "experiment", true)) {
        parse_experiment(r, *e, "experiment", cfg);
    }
    const bool cir = cfg.kind == ExperimentKind::cir_check;
    if (const json* m = r.find(root, "", "model", !cir)) {
        if (cir) {
            r.fail("model", "cir-check builds its own model from the experiment block");
        } else {
            cfg.model = parse_model(r, *m, "model");
        }
    }
    if (cir) {
        const CirParams& c = cfg.cir;
        cfg.model = r.attempt("experiment", [&] {
            return preset_bessel({TimeFn::constant(c.sigma)}, TimeFn::constant(c.lambda), TimeFn::constant(c.k), c.xi,
                                 c.T);
        });
    }
    if (const json* s = r.find(root, "", "scheme", cfg.kind != ExperimentKind::validate)) {
        parse_scheme(r, *s, "scheme", cfg.scheme);
    }
    if (const json* run = r.find(root, "", "run", true)) {
        parse_run(r, *run, "run", cfg);
    }
    cfg.scheme.n = std::max(cfg.n, 1);

    if (cfg.kind == ExperimentKind::moments && cfg.scheme.variant != Variant::exact) {
        r.fail("scheme.variant", "moments need the exact variant");
    }
    if (cfg.kind == ExperimentKind::increments && cfg.n > 0) {
        const double dt = (cfg.model ? cfg.model->horizon() : 1.0) / cfg.n;
        for (std::size_t i = 0; i < cfg.taus.size(); ++i) {
            const double steps = cfg.taus[i] / dt;
            if (cfg.taus[i] < 0.0 || std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps) ||
                std::round(steps) > cfg.n) {
                r.fail(index("experiment.taus", i), "must be a multiple of T/n within [0, T]");
            }
        }
    }
    if (!r.problems.empty()) {
        throw ConfigError(std::move(r.problems));
    }
    return cfg;
}

}  // namespace dunkl
