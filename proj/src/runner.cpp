#include "dunkl/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "dunkl/errors.hpp"
#include "dunkl/mc_lab.hpp"

namespace dunkl {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* version_string() { return "dunkl-lab 0.1.0"; }

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// JSON number, or null where JSON has no representation.
json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class Csv {
  public:
    explicit Csv(std::string name, const std::vector<std::string>& header) : name_(std::move(name)) { row(header); }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            text_ += cells[i];
            text_ += i + 1 < cells.size() ? ',' : '\n';
        }
        ++lines_;
    }

    const std::string& name() const { return name_; }
    const std::string& text() const { return text_; }
    int lines() const { return lines_; }

  private:
    std::string name_;
    std::string text_;
    int lines_ = 0;
};

void write_atomic(const fs::path& target, const std::string& text) {
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        f << text;
        f.flush();
        if (!f) {
            throw IoError("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        throw IoError("cannot move " + tmp.string() + " to " + target.string() + ": " + ec.message());
    }
}

void prepare_output_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string());
    }
    const fs::path probe = dir / ".write_probe";
    {
        std::ofstream f(probe);
        if (!f) {
            throw IoError("output directory " + dir.string() + " is not writable");
        }
    }
    fs::remove(probe, ec);
}

json fit_json(const std::optional<FitResult>& fit) {
    if (!fit) {
        return nullptr;
    }
    return {{"slope", jnum(fit->slope)},
            {"intercept", jnum(fit->intercept)},
            {"half_width_95", jnum(fit->half_width)},
            {"points", fit->points}};
}

json report_json(const AssumptionReport& rep) {
    json conds = json::array();
    static const char* names[] = {"(i) drift Lipschitz", "(ii) diffusion Lipschitz", "(iii) sigma_bar^2 <= 2k",
                                  "(iv) wall condition on drift", "(v) pairing identity"};
    for (std::size_t i = 0; i < rep.conditions.size(); ++i) {
        const auto& c = rep.conditions[i];
        conds.push_back({{"condition", names[i]},
                         {"status", to_string(c.status)},
                         {"worst_violation", jnum(c.worst_violation)},
                         {"samples", c.samples},
                         {"note", c.note}});
    }
    return {{"conditions", conds},
            {"all_passed", rep.all_passed()},
            {"k_bound", jnum(rep.k_bound)},
            {"p_star_conservative", rep.p_star_conservative}};
}

struct Outputs {
    std::vector<Csv> csvs;
    json results = json::object();
    std::vector<std::string> warnings;
    bool validation_failed = false;
};

void run_simulate(const ExperimentConfig& cfg, const RunOptions& run, Outputs& o, std::ostream& out) {
    const ModelSpec& m = *cfg.model;
    const std::vector<PathResult> paths = simulate_paths(m, cfg.scheme, cfg.paths, run);
    std::vector<std::string> header{"path_id", "l", "t"};
    for (int i = 0; i < m.dim(); ++i) {
        header.push_back("x" + std::to_string(i + 1));
    }
    header.push_back("in_chamber");
    Csv csv("paths.csv", header);
    int violating = 0;
    Eigen::MatrixXd finals(m.dim(), cfg.paths);
    for (std::size_t q = 0; q < paths.size(); ++q) {
        const PathResult& p = paths[q];
        violating += p.first_violation ? 1 : 0;
        finals.col(static_cast<Eigen::Index>(q)) = p.state(p.steps());
        for (int l = 0; l <= p.steps(); ++l) {
            std::vector<std::string> row{std::to_string(q), std::to_string(l), num(m.horizon() * l / cfg.n)};
            for (int i = 0; i < m.dim(); ++i) {
                row.push_back(num(p.states(i, l)));
            }
            row.push_back(p.in_chamber[static_cast<std::size_t>(l)] ? "1" : "0");
            csv.row(row);
        }
    }
    o.csvs.push_back(std::move(csv));
    std::vector<double> mean(static_cast<std::size_t>(m.dim()));
    for (int i = 0; i < m.dim(); ++i) {
        std::vector<double> xs(finals.row(i).begin(), finals.row(i).end());
        mean[static_cast<std::size_t>(i)] = estimate_mean(xs).mean;
    }
    o.results = {{"paths", cfg.paths}, {"n", cfg.n}, {"paths_leaving_chamber", violating}, {"mean_final_state", mean}};
    out << "simulated " << cfg.paths << " paths with n = " << cfg.n << "; " << violating
        << " left the chamber\n";
}

void run_convergence(const ExperimentConfig& cfg, const RunOptions& run, Outputs& o, std::ostream& out) {
    const ErrorCurve curve = strong_error(*cfg.model, cfg.scheme, cfg.n_list, cfg.n_ref, cfg.paths, run);
    Csv csv("convergence.csv", {"n", "rms_sup_error", "std_error", "M", "n_ref"});
    for (std::size_t j = 0; j < curve.n.size(); ++j) {
        csv.row({std::to_string(curve.n[j]), num(curve.rms_sup_error[j]), num(curve.std_error[j]),
                 std::to_string(curve.paths), std::to_string(curve.n_ref)});
    }
    o.csvs.push_back(std::move(csv));
    std::optional<FitResult> fit;
    try {
        fit = fit_order(curve);
    } catch (const FitError& e) {
        o.warnings.push_back(std::string("no order fit: ") + e.what());
    }
    o.warnings.insert(o.warnings.end(), curve.warnings.begin(), curve.warnings.end());
    o.results = {{"order_fit", fit_json(fit)}, {"variant", to_string(curve.variant)}, {"theta", curve.theta}};
    out << "strong error over " << curve.n.size() << " resolutions";
    if (fit) {
        out << ", fitted slope " << fit->slope << " +/- " << fit->half_width;
    }
    out << "\n";
}

void run_moments(const ExperimentConfig& cfg, const RunOptions& run, Outputs& o, std::ostream& out) {
    const MomentReport rep = negative_moments(*cfg.model, cfg.p, cfg.scheme, cfg.paths, run);
    Csv csv("moments.csv", {"root_index", "t", "p", "estimate", "std_error"});
    for (Eigen::Index a = 0; a < rep.estimates.rows(); ++a) {
        for (Eigen::Index l = 0; l < rep.estimates.cols(); ++l) {
            csv.row({std::to_string(a), num(rep.times[static_cast<std::size_t>(l)]), num(rep.p),
                     num(rep.estimates(a, l)), num(rep.std_errors(a, l))});
        }
    }
    o.csvs.push_back(std::move(csv));
    o.warnings.insert(o.warnings.end(), rep.warnings.begin(), rep.warnings.end());
    o.results = {{"max_estimate", jnum(rep.max_estimate)},
                 {"max_root", rep.max_root},
                 {"max_time", rep.times[static_cast<std::size_t>(rep.max_time_index)]},
                 {"pathwise_sup_mean", jnum(rep.pathwise_sup.mean)},
                 {"pathwise_sup_std_error", jnum(rep.pathwise_sup.std_error)}};
    out << "max E<a,X>^-" << rep.p << " = " << rep.max_estimate << " (root " << rep.max_root << ")\n";
}

void run_increments(const ExperimentConfig& cfg, const RunOptions& run, Outputs& o, std::ostream& out) {
    const IncrementReport rep = increment_scaling(*cfg.model, cfg.scheme, cfg.paths, cfg.taus, run);
    Csv csv("increments.csv", {"tau", "lag_steps", "mean_sq_increment", "std_error"});
    for (std::size_t j = 0; j < rep.tau.size(); ++j) {
        csv.row({num(rep.tau[j]), std::to_string(rep.lag_steps[j]), num(rep.mean_sq[j]), num(rep.std_error[j])});
    }
    o.csvs.push_back(std::move(csv));
    o.results = {{"scaling_fit", fit_json(rep.fit)}};
    out << "increment scaling";
    if (rep.fit) {
        out << ": fitted slope " << rep.fit->slope;
    }
    out << "\n";
}

void run_exit(const ExperimentConfig& cfg, const RunOptions& run, Outputs& o, std::ostream& out) {
    const ExitReport rep = chamber_exit(*cfg.model, cfg.scheme, cfg.n_list, cfg.paths, run);
    Csv csv("exit.csv", {"n", "exit_fraction", "ci_low", "ci_high"});
    for (std::size_t j = 0; j < rep.n.size(); ++j) {
        csv.row({std::to_string(rep.n[j]), num(rep.fraction[j]), num(rep.ci_low[j]), num(rep.ci_high[j])});
    }
    o.csvs.push_back(std::move(csv));
    o.warnings.insert(o.warnings.end(), rep.warnings.begin(), rep.warnings.end());
    o.results = {{"exits", rep.exits}, {"decay_fit", fit_json(rep.fit)}};
    out << "chamber exit fractions over " << rep.n.size() << " resolutions\n";
}

void run_cir(const ExperimentConfig& cfg, const RunOptions& run, Outputs& o, std::ostream& out) {
    const CirParams& c = cfg.cir;
    const CirCheck chk = cir_mean_check(c.sigma, c.lambda, c.k, c.xi, c.T, cfg.scheme, cfg.paths, run);
    Csv csv("cir_check.csv", {"mean_y", "std_error", "exact_mean", "z_score", "bias_allowance", "passed"});
    csv.row({num(chk.mean_y), num(chk.std_error), num(chk.exact_mean), num(chk.z_score), num(chk.bias_allowance),
             chk.passed ? "1" : "0"});
    o.csvs.push_back(std::move(csv));
    o.results = {{"mean_y", jnum(chk.mean_y)},   {"std_error", jnum(chk.std_error)},
                 {"exact_mean", jnum(chk.exact_mean)}, {"z_score", jnum(chk.z_score)},
                 {"passed", chk.passed}};
    out << "mean X(T)^2 = " << chk.mean_y << " vs " << chk.exact_mean << (chk.passed ? " (pass)" : " (FAIL)")
        << "\n";
}

void run_validate(const ExperimentConfig& cfg, Outputs& o, std::ostream& out) {
    const ModelSpec& m = *cfg.model;
    const AssumptionReport rep = validate_assumptions(m, cfg.samples, cfg.tol, cfg.seed);
    const json rj = report_json(rep);
    Csv csv("validate.csv", {"condition", "status", "worst_violation", "samples"});
    for (std::size_t i = 0; i < rep.conditions.size(); ++i) {
        const auto& c = rep.conditions[i];
        csv.row({std::to_string(i + 1), to_string(c.status), num(c.worst_violation), std::to_string(c.samples)});
    }
    o.csvs.push_back(std::move(csv));
    o.results = rj;
    o.results["L_k"] = jnum(L_k(m));
    o.results["p_star"] = jnum(p_star(m));
    for (const auto& c : rj["conditions"]) {
        out << c["condition"].get<std::string>() << ": " << c["status"].get<std::string>() << "\n";
    }
    out << (rep.all_passed() ? "all conditions pass\n" : "some conditions FAIL\n");
    o.validation_failed = !rep.all_passed();
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    const std::string started = utc_now();
    const fs::path dir(cfg.output_dir);
    try {
        prepare_output_dir(dir);
        if (!cfg.model) {
            throw ParameterError("no model");
        }
        const RunOptions run{cfg.seed, cfg.threads};
        Outputs o;
        if (cfg.kind != ExperimentKind::validate) {
            const AssumptionReport rep = validate_assumptions(*cfg.model, 256, 1e-9, cfg.seed);
            if (!rep.all_passed()) {
                if (!cfg.allow_assumption_violation) {
                    err << "error: the model fails its standing conditions; run `validate` for details or set "
                           "run.allow_assumption_violation\n";
                    return kExitInvalid;
                }
                o.warnings.push_back("model conditions fail; continuing because allow_assumption_violation is set");
            }
        }
        switch (cfg.kind) {
            case ExperimentKind::simulate:
                run_simulate(cfg, run, o, out);
                break;
            case ExperimentKind::convergence:
                run_convergence(cfg, run, o, out);
                break;
            case ExperimentKind::moments:
                run_moments(cfg, run, o, out);
                break;
            case ExperimentKind::increments:
                run_increments(cfg, run, o, out);
                break;
            case ExperimentKind::chamber_exit:
                run_exit(cfg, run, o, out);
                break;
            case ExperimentKind::cir_check:
                run_cir(cfg, run, o, out);
                break;
            case ExperimentKind::validate:
                run_validate(cfg, o, out);
                break;
        }
        for (const auto& w : o.warnings) {
            err << "warning: " << w << "\n";
        }

        json files = json::array();
        for (const Csv& c : o.csvs) {
            write_atomic(dir / c.name(), c.text());
            files.push_back({{"name", c.name()}, {"lines", c.lines()}, {"rows", c.lines() - 1}});
        }
        const json echo = json::parse(cfg.echo);
        const json summary = {{"version", version_string()},
                              {"experiment", to_string(cfg.kind)},
                              {"seed", cfg.seed},
                              {"config", echo},
                              {"results", o.results},
                              {"warnings", o.warnings}};
        const std::string summary_text = summary.dump(2) + "\n";
        write_atomic(dir / "summary.json", summary_text);
        const auto summary_lines = std::count(summary_text.begin(), summary_text.end(), '\n');
        files.push_back({{"name", "summary.json"}, {"lines", summary_lines}, {"rows", nullptr}});

        const json manifest = {{"version", version_string()},
                               {"started", started},
                               {"finished", utc_now()},
                               {"config", echo},
                               {"files", files}};
        write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
        out << "wrote " << o.csvs.size() + 2 << " files to " << dir.string() << "\n";
        return o.validation_failed ? kExitInvalid : kExitOk;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const PathError& e) {
        err << "solver failure: path_id=" << e.path_id() << " step=" << e.step() << ": " << e.what() << "\n";
        return kExitSolver;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
}

void describe(const ExperimentConfig& cfg, std::ostream& out) {
    const ModelSpec& m = *cfg.model;
    out << "experiment: " << to_string(cfg.kind) << "\n";
    out << "model: d = " << m.dim() << ", positive roots = " << m.roots().size()
        << ", orbits = " << m.roots().orbit_count() << ", noise dimension = " << m.brownian_dim()
        << ", T = " << m.horizon() << "\n";
    const double lk = L_k(m);
    const double ps = p_star(m);
    out << "L_k = " << lk << "\n";
    out << "p* = " << ps << "\n";
    if (cfg.kind != ExperimentKind::validate) {
        out << "scheme: " << to_string(cfg.scheme.variant) << ", theta = " << cfg.scheme.theta;
        if (cfg.scheme.variant == Variant::truncated) {
            out << ", c = " << cfg.scheme.c;
        }
        out << "\n";
        std::vector<int> ns = cfg.n_list;
        if (cfg.n > 0) {
            ns.push_back(cfg.n);
        }
        if (cfg.n_ref > 0) {
            ns.push_back(cfg.n_ref);
        }
        for (int n : ns) {
            out << "n = " << n << ": dt = " << m.horizon() / n;
            if (cfg.scheme.variant == Variant::truncated) {
                out << ", eps_n = " << truncation_level(m, n, cfg.scheme.c);
            }
            out << (n == cfg.n_ref && cfg.kind == ExperimentKind::convergence ? " (reference)" : "") << "\n";
        }
        out << "paths: " << cfg.paths << ", seed: " << cfg.seed << ", threads: " << cfg.threads << "\n";
    }
    if (!(ps > p_star_threshold(Variant::exact))) {
        out << "warning: the exact-scheme strong-rate regime requires p* > 6\n";
    }
    if (!(ps > p_star_threshold(Variant::truncated))) {
        out << "warning: the truncated-scheme strong-rate regime requires p* > 8\n";
    }
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot read " + path);
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// Shared prologue: read and parse, mapping failures to exit codes.
std::optional<ExperimentConfig> load(const std::string& path, std::ostream& err, int& code) {
    try {
        return parse_config(read_file(path));
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        code = kExitIo;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        code = kExitInvalid;
    }
    return std::nullopt;
}

}  // namespace

int command_run(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err) {
    int code = kExitOk;
    auto cfg = load(config_path, err, code);
    if (!cfg) {
        return code;
    }
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
        cfg->output_dir = env;
    }
    if (o.output_dir) {
        cfg->output_dir = *o.output_dir;
    }
    if (o.threads) {
        cfg->threads = *o.threads;
    }
    return run_experiment(*cfg, out, err);
}

int command_describe(const std::string& config_path, std::ostream& out, std::ostream& err) {
    int code = kExitOk;
    auto cfg = load(config_path, err, code);
    if (!cfg) {
        return code;
    }
    describe(*cfg, out);
    return kExitOk;
}

int command_validate(const std::string& config_path, std::ostream& out, std::ostream& err) {
    int code = kExitOk;
    auto cfg = load(config_path, err, code);
    if (!cfg) {
        return code;
    }
    out << "configuration is valid\n";
    const AssumptionReport rep = validate_assumptions(*cfg->model, cfg->samples, cfg->tol, cfg->seed);
    const json rj = report_json(rep);
    for (const auto& c : rj["conditions"]) {
        out << c["condition"].get<std::string>() << ": " << c["status"].get<std::string>();
        if (!c["note"].get<std::string>().empty()) {
            out << " (" << c["note"].get<std::string>() << ")";
        }
        out << "\n";
    }
    out << (rep.all_passed() ? "all conditions pass\n" : "some conditions FAIL\n");
    return rep.all_passed() ? kExitOk : kExitInvalid;
}

}  // namespace dunkl
