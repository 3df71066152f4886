// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run everything
//   acceptance 3 7        run only the listed criteria

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "dunkl/config.hpp"
#include "dunkl/errors.hpp"
#include "dunkl/implicit_step.hpp"
#include "dunkl/mc_lab.hpp"
#include "dunkl/model.hpp"
#include "dunkl/root_system.hpp"
#include "dunkl/runner.hpp"
#include "dunkl/scheme.hpp"

using namespace dunkl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

constexpr int kThreadsMax = 0;

SchemeConfig exact(double theta, int n) {
    SchemeConfig c;
    c.theta = theta;
    c.n = n;
    return c;
}

SchemeConfig truncated(double theta, int n, double c) {
    SchemeConfig s;
    s.variant = Variant::truncated;
    s.theta = theta;
    s.n = n;
    s.c = c;
    return s;
}

ModelSpec dyson(int d, double k, Eigen::VectorXd xi) {
    return preset_dyson_A(d, TimeFn::constant(k), Diffusion::scalar(TimeFn::constant(1.0), d), Drift::zero(),
                          std::move(xi), 1.0);
}

std::string curve_text(const ErrorCurve& c) {
    std::string s;
    for (std::size_t i = 0; i < c.n.size(); ++i) {
        s += fmt("%s%d:%.4g", i ? " " : "", c.n[i], c.rms_sup_error[i]);
    }
    return s;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) {
            return false;
        }
    }
    return true;
}

Outcome pairing_identity() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> uk(0.1, 10.0);
    double worst = 0.0;
    int cases = 0;
    auto run = [&](const RootSystem& rs, int seed) {
        const auto pts = sample_chamber_points(rs, 100, static_cast<std::uint64_t>(seed));
        for (const auto& x : pts) {
            Eigen::VectorXd k(rs.orbit_count());
            for (Eigen::Index o = 0; o < k.size(); ++o) {
                k[o] = uk(rng);
            }
            worst = std::max(worst, pairing_identity_residual(rs, k, x));
            ++cases;
        }
    };
    for (int d = 2; d <= 6; ++d) {
        run(make_type_A(d), d);
    }
    for (int d = 2; d <= 5; ++d) {
        run(make_type_B(d), 100 + d);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {worst <= 1e-10 && secs < 1.0,
            fmt("%d points, worst residual %.3g (tol 1e-10), %.3f s (limit 1 s)", cases, worst, secs)};
}

Outcome solver_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> ux(-5.0, 5.0), uh(1e-4, 1.0), uk(0.1, 10.0);
    RootSystem line(Eigen::MatrixXd::Ones(1, 1), {0});
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double xhat = ux(rng), h = uh(rng), k = uk(rng);
        const SolveReport r = solve_exact_step(line, Eigen::VectorXd::Constant(1, k), Eigen::VectorXd::Constant(1, xhat), h);
        worst = std::max(worst, std::abs(r.y[0] - closed_form_1d(xhat, h, k)));
    }
    // xhat = 0, h = k = 1 in A(2): y = (1, -1)/sqrt(2).
    const SolveReport s = solve_exact_step(make_type_A(2), Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(2), 1.0);
    const double sym = (s.y - Eigen::Vector2d(1.0, -1.0) / std::sqrt(2.0)).cwiseAbs().maxCoeff();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {worst <= 1e-10 && sym <= 1e-10 && secs < 5.0,
            fmt("1-D worst |diff| %.3g, A(2) symmetric |diff| %.3g (tol 1e-10), %.3f s (limit 5 s)", worst, sym, secs)};
}

Outcome chamber_preservation() {
    const ModelSpec m = dyson(3, 4.0, Eigen::Vector3d(1.0, 0.0, -1.0));
    const int n = 256;
    long bad_states = 0;
    double worst_residual = 0.0;
    double closest = INFINITY;
    for (double theta : {0.0, 0.25, 0.49}) {
        const SchemeConfig cfg = exact(theta, n);
        PathSimulator sim(m, cfg);
        PathResult p;
        for (std::uint64_t id = 0; id < 1000; ++id) {
            const BrownianDriver drv = make_brownian(3, n, 1.0, 303, id);
            sim.run(drv, p);
            for (int l = 0; l <= n; ++l) {
                const double mp = min_pairing(m.roots(), p.state(l));
                closest = std::min(closest, mp);
                bad_states += mp <= 0.0;
            }
            worst_residual = std::max(worst_residual, max_step_residual(m, cfg, drv, p));
        }
    }
    return {bad_states == 0 && worst_residual <= 1e-9,
            fmt("3000 paths, states with min pairing <= 0: %ld, smallest pairing %.3g, worst step residual %.3g "
                "(tol 1e-9)",
                bad_states, closest, worst_residual)};
}

Outcome fixed_point_certificate() {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    int violations = 0, total = 0;
    double worst_ratio = 0.0;
    for (double rho : {0.1, 0.5, 0.9}) {
        for (int i = 0; i < 100; ++i) {
            const RootSystem rs = i % 2 ? make_type_A(2 + i % 4) : make_type_B(2 + i % 3);
            Eigen::VectorXd k(rs.orbit_count());
            for (Eigen::Index o = 0; o < k.size(); ++o) {
                k[o] = 0.1 + 9.9 * u(rng);
            }
            const Eigen::VectorXd kr = rs.per_root(k);
            const double L = kr.dot(rs.norms_squared());
            const double A = kr.dot(rs.norms_squared().cwiseSqrt());
            const double eps = 0.01 + u(rng);
            const double h = rho * eps * eps / L;
            Eigen::VectorXd xhat(rs.dim());
            for (Eigen::Index j = 0; j < xhat.size(); ++j) {
                xhat[j] = eps * g(rng);
            }
            const double tol = 1e-8 * eps;
            const SolveReport rep = solve_truncated_step(rs, k, xhat, h, eps, tol);
            const int N = rep.iterations;
            Eigen::VectorXd y = xhat, next(xhat.size());
            for (int it = 0; it < 10 * std::max(N, 1); ++it) {
                next = xhat;
                add_truncated_drift(rs, (h * kr).eval(), y, eps, next);
                y = next;
            }
            const double err = (rep.y - y).norm();
            const double bound = fixed_point_error_bound(A, L, eps, rho, N);
            worst_ratio = std::max(worst_ratio, err / bound);
            violations += err > bound;
            ++total;
        }
    }
    return {violations == 0, fmt("%d steps, %d above the geometric bound, worst error/bound %.3g", total, violations,
                                 worst_ratio)};
}

const std::vector<int> kStrongNs{16, 32, 64, 128, 256, 512};
constexpr int kStrongRef = 8192;
constexpr int kStrongPaths = 10000;

Outcome strong_order_exact() {
    const ModelSpec m = dyson(2, 4.0, Eigen::Vector2d(0.5, -0.5));
    bool ok = true;
    std::string detail;
    for (double theta : {0.0, 0.25}) {
        const ErrorCurve c = strong_error(m, exact(theta, 1), kStrongNs, kStrongRef, kStrongPaths, {505, kThreadsMax});
        const FitResult f = fit_order(c);
        const bool dec = strictly_decreasing(c.rms_sup_error);
        ok = ok && f.slope <= -0.40 && dec;
        detail += fmt("%stheta=%.2f slope %.3f +- %.3f, %s [%s]", detail.empty() ? "" : "; ", theta, f.slope,
                      f.half_width, dec ? "strictly decreasing" : "NOT decreasing", curve_text(c).c_str());
    }
    return {ok, detail + " (need slope <= -0.40)"};
}

Outcome strong_order_truncated() {
    const ModelSpec m = dyson(2, 5.0, Eigen::Vector2d(0.5, -0.5));
    const RunOptions run{606, kThreadsMax};
    const ErrorCurve t = strong_error(m, truncated(0.0, 1, 1.1), kStrongNs, kStrongRef, kStrongPaths, run);
    const FitResult f = fit_order(t);
    const ErrorCurve e16 = strong_error(m, exact(0.0, 1), {16}, kStrongRef, kStrongPaths, run);
    const Estimate gap = coupled_rms_gap(m, exact(0.0, 512), truncated(0.0, 512, 1.1), 512, 512, kStrongPaths, run);
    const bool ok = f.slope <= -0.40 && gap.mean < e16.rms_sup_error[0];
    return {ok, fmt("p*=%.3g, truncated slope %.3f +- %.3f [%s]; exact-vs-truncated gap at n=512 %.4g vs exact "
                    "error at n=16 %.4g",
                    p_star(m), f.slope, f.half_width, curve_text(t).c_str(), gap.mean, e16.rms_sup_error[0])};
}

Outcome negative_moment_finiteness() {
    const ModelSpec m = dyson(2, 4.0, Eigen::Vector2d(0.5, -0.5));
    const MomentReport a = negative_moments(m, 2.0, exact(0.0, 1024), 10000, {707, kThreadsMax});
    const MomentReport b = negative_moments(m, 2.0, exact(0.0, 2048), 10000, {707, kThreadsMax});
    const double ratio = std::max(a.max_estimate / b.max_estimate, b.max_estimate / a.max_estimate);
    // The running max sits at t = 0 here; the pathwise sup is the sharper probe.
    const double sup_ratio = std::max(a.pathwise_sup.mean / b.pathwise_sup.mean, b.pathwise_sup.mean / a.pathwise_sup.mean);
    const bool finite = std::isfinite(a.max_estimate) && std::isfinite(b.max_estimate) && a.std_errors.allFinite() &&
                        b.std_errors.allFinite() && std::isfinite(a.pathwise_sup.mean) &&
                        std::isfinite(b.pathwise_sup.mean);

    // Deterministic d = 1 case: X(t) = sqrt(1 + 2t).
    const int n = 1 << 20;
    const ModelSpec ode =
        preset_bessel({TimeFn::constant(0.0)}, TimeFn::constant(0.0), TimeFn::constant(1.0), 1.0, 1.0);
    double worst = 0.0;
    for (double p : {1.0, 2.0, 4.0}) {
        const MomentReport r = negative_moments(ode, p, exact(0.0, n), 1, {707, 1});
        for (int l = 0; l <= n; ++l) {
            const double t = r.times[static_cast<std::size_t>(l)];
            worst = std::max(worst, std::abs(r.estimates(0, l) - std::pow(1.0 + 2.0 * t, -p / 2.0)));
        }
    }
    return {finite && ratio <= 2.0 && sup_ratio <= 2.0 && worst <= 1e-6,
            fmt("max E<a,X>^-2: %.4g (n=1024) vs %.4g (n=2048), ratio %.3f; E sup <a,X>^-2: %.4g vs %.4g, ratio "
                "%.3f (limit 2); d=1 worst |diff| %.3g at n=2^20 (tol 1e-6)",
                a.max_estimate, b.max_estimate, ratio, a.pathwise_sup.mean, b.pathwise_sup.mean, sup_ratio, worst)};
}

Outcome increment_exponent() {
    const ModelSpec m =
        preset_bessel({TimeFn::constant(1.0)}, TimeFn::constant(0.0), TimeFn::constant(1.0), 1.0, 1.0);
    std::vector<double> taus;
    for (int e = 10; e >= 4; --e) {
        taus.push_back(std::ldexp(1.0, -e));
    }
    const IncrementReport r = increment_scaling(m, exact(0.0, 1024), 10000, taus, {808, kThreadsMax});
    const double s = r.fit ? r.fit->slope : NAN;
    return {r.fit && s >= 0.8 && s <= 1.2, fmt("slope %.4f +- %.4f over %zu lags (band [0.8, 1.2])", s,
                                               r.fit ? r.fit->half_width : NAN, taus.size())};
}

Outcome chamber_retention() {
    const ModelSpec m = preset_type_B(2, TimeFn::constant(5.0), TimeFn::constant(5.0), TimeFn::constant(1.0),
                                      TimeFn::constant(0.0), Eigen::Vector2d(0.6, 0.3), 1.0);
    const ExitReport r = chamber_exit(m, truncated(0.0, 1, 1.1), {32, 64, 128, 256, 512}, 20000, {909, kThreadsMax});
    bool monotone = true;
    std::string s;
    for (std::size_t i = 0; i < r.n.size(); ++i) {
        if (i > 0 && r.fraction[i] > r.fraction[i - 1] && r.ci_low[i] > r.ci_high[i - 1]) {
            monotone = false;
        }
        s += fmt("%s%d:%.5f[%.5f,%.5f]", i ? " " : "", r.n[i], r.fraction[i], r.ci_low[i], r.ci_high[i]);
    }
    const bool small = r.fraction.back() <= 0.05;
    std::string fit = r.fit ? fmt(", decay slope %.3f", r.fit->slope) : std::string(", no decay fit");
    return {monotone && small, s + fit + " (non-increasing within CI; <= 0.05 at n=512)"};
}

Outcome cir_link() {
    const CirCheck c = cir_mean_check(1.0, 0.5, 1.0, 1.0, 1.0, exact(0.0, 1024), 100000, {1010, kThreadsMax});
    const double gap = std::abs(c.mean_y - c.exact_mean);
    return {c.passed && gap <= 3.0 * c.std_error + 0.01 * c.exact_mean,
            fmt("mean X(T)^2 %.5f, m(T) = 4e-3 = %.5f, gap %.4g, allowance 3 SE + 1%% = %.4g (SE %.3g)", c.mean_y,
                c.exact_mean, gap, 3.0 * c.std_error + 0.01 * c.exact_mean, c.std_error)};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Outcome thread_determinism() {
    const std::string dyson2 = R"("model": {"root_system": {"type": "A", "d": 2}, "T": 1.0, "xi": [0.5, -0.5],
        "k": [4.0], "sigma": {"scalar": 1.0}})";
    const std::string typeb = R"("model": {"root_system": {"type": "B", "d": 2}, "T": 1.0, "xi": [0.6, 0.3],
        "k": [5.0, 5.0], "sigma": {"scalar": 1.0}})";
    const std::vector<std::pair<std::string, std::string>> configs{
        {"simulate", "{" + dyson2 + R"(, "scheme": {"variant": "exact", "theta": 0.25},
            "experiment": {"kind": "simulate"}, "run": {"M": 37, "n": 64, "seed": 11}})"},
        {"convergence", "{" + dyson2 + R"(, "scheme": {"variant": "truncated", "theta": 0.0, "c": 1.1},
            "experiment": {"kind": "convergence"},
            "run": {"M": 333, "n_list": [16, 32, 64], "n_ref": 1024, "seed": 12}})"},
        {"moments", "{" + dyson2 + R"(, "scheme": {"variant": "exact", "theta": 0.0},
            "experiment": {"kind": "moments", "p": 2}, "run": {"M": 333, "n": 128, "seed": 13}})"},
        {"increments", "{" + dyson2 + R"(, "scheme": {"variant": "exact", "theta": 0.0},
            "experiment": {"kind": "increments", "taus": [0.0078125, 0.03125, 0.125]},
            "run": {"M": 333, "n": 128, "seed": 14}})"},
        {"chamber-exit", "{" + typeb + R"(, "scheme": {"variant": "truncated", "theta": 0.0, "c": 1.1},
            "experiment": {"kind": "chamber-exit"}, "run": {"M": 999, "n_list": [32, 64, 128], "seed": 15}})"},
        {"cir-check", R"({"scheme": {"variant": "exact", "theta": 0.0},
            "experiment": {"kind": "cir-check", "sigma": 1, "lambda": 0.5, "k": 1, "xi": 1, "T": 1},
            "run": {"M": 999, "n": 64, "seed": 16}})"},
    };
    const fs::path root = fs::temp_directory_path() / ("dunkl_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    int compared = 0, mismatched = 0, failed_runs = 0;
    for (const auto& [name, text] : configs) {
        std::vector<std::vector<std::pair<std::string, std::string>>> runs;
        for (int threads : {1, 4, kThreadsMax}) {
            ExperimentConfig cfg = parse_config(text);
            cfg.threads = threads;
            cfg.output_dir = (root / name / std::to_string(threads)).string();
            std::ostringstream out, err;
            if (run_experiment(cfg, out, err) != kExitOk) {
                ++failed_runs;
                continue;
            }
            std::vector<std::pair<std::string, std::string>> csvs;
            for (const auto& e : fs::directory_iterator(cfg.output_dir)) {
                if (e.path().extension() == ".csv") {
                    csvs.emplace_back(e.path().filename().string(), slurp(e.path()));
                }
            }
            std::sort(csvs.begin(), csvs.end());
            runs.push_back(std::move(csvs));
        }
        for (std::size_t i = 1; i < runs.size(); ++i) {
            ++compared;
            mismatched += runs[i] != runs[0] || runs[0].empty();
        }
    }
    fs::remove_all(root);
    return {failed_runs == 0 && mismatched == 0 && compared == 12,
            fmt("%zu experiments x threads {1, 4, max}: %d comparisons, %d mismatched, %d failed runs",
                configs.size(), compared, mismatched, failed_runs)};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "pairing identity", pairing_identity},
        {2, "exact step oracle", solver_oracle},
        {3, "chamber preservation", chamber_preservation},
        {4, "fixed-point certificate", fixed_point_certificate},
        {5, "strong order, exact scheme", strong_order_exact},
        {6, "strong order, truncated scheme", strong_order_truncated},
        {7, "negative moments", negative_moment_finiteness},
        {8, "increment scaling", increment_exponent},
        {9, "chamber retention", chamber_retention},
        {10, "squared Bessel mean", cir_link},
        {11, "thread determinism", thread_determinism},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        only.insert(std::atoi(argv[i]));
    }
    int failures = 0;
    for (const Criterion& c : all) {
        if (!only.empty() && !only.count(c.id)) {
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
