#include "dunkl/mc_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "dunkl/errors.hpp"
#include "dunkl/parallel.hpp"

namespace dunkl {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

std::string p_star_warning(const ModelSpec& m, Variant v) {
    const double ps = p_star(m);
    const double need = p_star_threshold(v);
    if (ps > need) {
        return {};
    }
    std::ostringstream os;
    os << to_string(v) << " scheme: p* = " << ps << " is not above " << need
       << "; the order-1/2 strong rate is not guaranteed in this regime";
    return os.str();
}

SchemeConfig at_resolution(const SchemeConfig& base, int n) {
    SchemeConfig cfg = base;
    cfg.n = n;
    return cfg;
}

double sup_sq_distance(const PathResult& fine, int stride, const PathResult& coarse) {
    double worst = 0.0;
    for (int l = 1; l <= coarse.steps(); ++l) {
        worst = std::max(worst, (fine.state(l * stride) - coarse.state(l)).squaredNorm());
    }
    return worst;
}

/// RMS from per-path squared values, with a delta-method standard error.
Estimate root_mean(std::span<const double> squares) {
    const Estimate e = estimate_mean(squares);
    Estimate out;
    out.mean = std::sqrt(e.mean);
    out.std_error = out.mean > 0.0 ? e.std_error / (2.0 * out.mean) : 0.0;
    return out;
}

}  // namespace

double p_star_threshold(Variant v) { return v == Variant::exact ? 6.0 : 8.0; }

Estimate estimate_mean(std::span<const double> values) {
    Estimate e;
    if (values.empty()) {
        return e;
    }
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
        e.mean = values.front();
        return e;
    }
    const double count = static_cast<double>(values.size());
    e.mean = pairwise_sum(values) / count;
    if (values.size() > 1) {
        std::vector<double> dev(values.size());
        std::transform(values.begin(), values.end(), dev.begin(), [&](double v) { return (v - e.mean) * (v - e.mean); });
        const double var = pairwise_sum(dev) / (count - 1.0);
        e.std_error = std::sqrt(var / count);
    }
    return e;
}

ErrorCurve strong_error(const ModelSpec& m, const SchemeConfig& scheme, const std::vector<int>& n_list, int n_ref,
                        int paths, const RunOptions& run) {
    if (paths < 100) {
        throw ParameterError("strong_error: at least 100 paths are required");
    }
    if (n_list.empty()) {
        throw ParameterError("strong_error: n_list is empty");
    }
    for (int n : n_list) {
        if (n < 1 || n_ref % n != 0 || !is_power_of_two(n_ref / n)) {
            throw GridError("strong_error: every n must divide n_ref by a power of two");
        }
    }
    const SchemeConfig ref_cfg = at_resolution(scheme, n_ref);
    ref_cfg.validate();

    ErrorCurve curve;
    curve.n = n_list;
    curve.paths = paths;
    curve.n_ref = n_ref;
    curve.variant = scheme.variant;
    curve.theta = scheme.theta;
    if (auto w = p_star_warning(m, scheme.variant); !w.empty()) {
        curve.warnings.push_back(w);
    }

    const std::size_t J = n_list.size();
    const auto M = static_cast<std::size_t>(paths);
    std::vector<double> sq(J * M, 0.0);
    const int r = m.brownian_dim();
    const double T = m.horizon();

    for_each_chunk(M, kPathChunk, run.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        PathSimulator ref_sim(m, ref_cfg);
        std::vector<PathSimulator> sims;
        sims.reserve(J);
        for (int n : n_list) {
            sims.emplace_back(m, at_resolution(scheme, n));
        }
        PathResult ref_path, path;
        for (std::size_t p = begin; p < end; ++p) {
            const BrownianDriver driver = make_brownian(r, n_ref, T, run.seed, p);
            ref_sim.run(driver, ref_path);
            for (std::size_t j = 0; j < J; ++j) {
                const int n = n_list[j];
                if (n == n_ref) {
                    continue;
                }
                sims[j].run(coarsen(driver, n_ref / n), path);
                sq[j * M + p] = sup_sq_distance(ref_path, n_ref / n, path);
            }
        }
    });

    for (std::size_t j = 0; j < J; ++j) {
        const Estimate e = root_mean(std::span<const double>(sq).subspan(j * M, M));
        curve.rms_sup_error.push_back(e.mean);
        curve.std_error.push_back(e.std_error);
    }
    return curve;
}

Estimate coupled_rms_gap(const ModelSpec& m, const SchemeConfig& a, const SchemeConfig& b, int n, int n_driver,
                         int paths, const RunOptions& run) {
    if (paths < 1) {
        throw ParameterError("coupled_rms_gap: need at least one path");
    }
    if (n < 1 || n_driver % n != 0) {
        throw GridError("coupled_rms_gap: n must divide n_driver");
    }
    const SchemeConfig ca = at_resolution(a, n);
    const SchemeConfig cb = at_resolution(b, n);
    const auto M = static_cast<std::size_t>(paths);
    std::vector<double> sq(M, 0.0);
    for_each_chunk(M, kPathChunk, run.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        PathSimulator sa(m, ca);
        PathSimulator sb(m, cb);
        PathResult pa, pb;
        for (std::size_t p = begin; p < end; ++p) {
            const BrownianDriver driver = coarsen(make_brownian(m.brownian_dim(), n_driver, m.horizon(), run.seed, p),
                                                  n_driver / n);
            sa.run(driver, pa);
            sb.run(driver, pb);
            sq[p] = sup_sq_distance(pa, 1, pb);
        }
    });
    return root_mean(sq);
}

FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y, int min_points) {
    if (x.size() != y.size()) {
        throw DimensionError("fit_loglog: x and y differ in length");
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
            lx.push_back(std::log2(x[i]));
            ly.push_back(std::log2(y[i]));
        }
    }
    const int k = static_cast<int>(lx.size());
    if (k < std::max(2, min_points)) {
        throw FitError("fit_loglog: not enough positive points to fit");
    }
    const Eigen::Map<const Eigen::ArrayXd> X(lx.data(), k), Y(ly.data(), k);
    const double mx = X.mean(), my = Y.mean();
    const double sxx = (X - mx).square().sum();
    if (!(sxx > 0.0)) {
        throw FitError("fit_loglog: abscissae are all equal");
    }
    FitResult fit;
    fit.points = k;
    fit.slope = ((X - mx) * (Y - my)).sum() / sxx;
    fit.intercept = my - fit.slope * mx;
    if (k > 2) {
        const double sse = (Y - fit.intercept - fit.slope * X).square().sum();
        const double se = std::sqrt(sse / (k - 2) / sxx);
        const boost::math::students_t dist(k - 2);
        fit.half_width = boost::math::quantile(dist, 0.975) * se;
    }
    return fit;
}

FitResult fit_order(const ErrorCurve& curve) {
    std::vector<double> n(curve.n.begin(), curve.n.end());
    return fit_loglog(n, curve.rms_sup_error, 3);
}

MomentReport negative_moments(const ModelSpec& m, double p, const SchemeConfig& scheme, int paths,
                              const RunOptions& run) {
    if (scheme.variant != Variant::exact) {
        throw ParameterError("negative_moments: only the chamber-preserving exact variant is supported");
    }
    if (!(p >= 0.0)) {
        throw ParameterError("negative_moments: p must be non-negative");
    }
    if (paths < 1) {
        throw ParameterError("negative_moments: need at least one path");
    }
    scheme.validate();
    const RootSystem& rs = m.roots();
    const int n = scheme.n;
    const int R = rs.size();
    const auto M = static_cast<std::size_t>(paths);
    const std::size_t chunks = (M + kPathChunk - 1) / kPathChunk;

    MomentReport report;
    report.p = p;
    report.n = n;
    report.paths = paths;
    const double ps = p_star(m);
    if (p >= ps) {
        std::ostringstream os;
        os << "p = " << p << " is not below p* = " << ps << "; the moment need not be finite";
        report.warnings.push_back(os.str());
    }
    for (int l = 0; l <= n; ++l) {
        report.times.push_back(m.horizon() * l / n);
    }

    struct Acc {
        Eigen::MatrixXd sum, sumsq;
    };
    const Acc zero{Eigen::MatrixXd::Zero(R, n + 1), Eigen::MatrixXd::Zero(R, n + 1)};
    std::vector<Acc> partial(chunks, zero);
    std::vector<double> sup_values(M * static_cast<std::size_t>(R), 0.0);

    for_each_chunk(M, kPathChunk, run.threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        PathSimulator sim(m, scheme);
        PathResult path;
        Acc& acc = partial[c];
        for (std::size_t q = begin; q < end; ++q) {
            sim.run(make_brownian(m.brownian_dim(), n, m.horizon(), run.seed, q), path);
            const Eigen::MatrixXd values = (rs.roots().transpose() * path.states).array().pow(-p).matrix();
            acc.sum += values;
            acc.sumsq += values.cwiseAbs2();
            for (int a = 0; a < R; ++a) {
                sup_values[static_cast<std::size_t>(a) * M + q] = values.row(a).maxCoeff();
            }
        }
    });

    const Acc total = pairwise_reduce<Acc>(partial, zero, [](const Acc& x, const Acc& y) {
        return Acc{x.sum + y.sum, x.sumsq + y.sumsq};
    });
    const double count = static_cast<double>(M);
    report.estimates = total.sum / count;
    if (M > 1) {
        const Eigen::ArrayXXd var =
            ((total.sumsq.array() - count * report.estimates.array().square()) / (count - 1.0)).max(0.0);
        report.std_errors = (var / count).sqrt().matrix();
    } else {
        report.std_errors = Eigen::MatrixXd::Zero(R, n + 1);
    }
    Eigen::Index ri = 0, ti = 0;
    report.max_estimate = report.estimates.maxCoeff(&ri, &ti);
    report.max_root = static_cast<int>(ri);
    report.max_time_index = static_cast<int>(ti);
    for (int a = 0; a < R; ++a) {
        const Estimate e = estimate_mean(std::span<const double>(sup_values).subspan(static_cast<std::size_t>(a) * M, M));
        if (a == 0 || e.mean > report.pathwise_sup.mean) {
            report.pathwise_sup = e;
        }
    }
    return report;
}

IncrementReport increment_scaling(const ModelSpec& m, const SchemeConfig& scheme, int paths,
                                  const std::vector<double>& taus, const RunOptions& run) {
    scheme.validate();
    if (paths < 1) {
        throw ParameterError("increment_scaling: need at least one path");
    }
    const int n = scheme.n;
    const double dt = m.horizon() / n;
    IncrementReport report;
    report.tau = taus;
    for (double tau : taus) {
        const double steps = tau / dt;
        const long j = std::lround(steps);
        if (!(tau >= 0.0) || std::abs(steps - static_cast<double>(j)) > 1e-9 * std::max(1.0, steps) || j > n) {
            throw GridError("increment_scaling: lag is not a grid multiple within [0, T]");
        }
        report.lag_steps.push_back(static_cast<int>(j));
    }
    const std::size_t J = taus.size();
    const auto M = static_cast<std::size_t>(paths);
    std::vector<double> per_path(J * M, 0.0);
    for_each_chunk(M, kPathChunk, run.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        PathSimulator sim(m, scheme);
        PathResult path;
        for (std::size_t q = begin; q < end; ++q) {
            sim.run(make_brownian(m.brownian_dim(), n, m.horizon(), run.seed, q), path);
            for (std::size_t j = 0; j < J; ++j) {
                const int lag = report.lag_steps[j];
                if (lag == 0) {
                    continue;
                }
                const int count = n - lag + 1;
                const double total =
                    (path.states.rightCols(count) - path.states.leftCols(count)).colwise().squaredNorm().sum();
                per_path[j * M + q] = total / count;
            }
        }
    });
    std::vector<double> positive_tau, positive_mean;
    for (std::size_t j = 0; j < J; ++j) {
        const Estimate e = estimate_mean(std::span<const double>(per_path).subspan(j * M, M));
        report.mean_sq.push_back(e.mean);
        report.std_error.push_back(e.std_error);
        if (taus[j] > 0.0) {
            positive_tau.push_back(taus[j]);
            positive_mean.push_back(e.mean);
        }
    }
    if (positive_tau.size() >= 2) {
        try {
            report.fit = fit_loglog(positive_tau, positive_mean, 2);
        } catch (const FitError&) {
            report.fit.reset();
        }
    }
    return report;
}

std::pair<double, double> wilson_interval(int successes, int trials, double z) {
    if (trials < 1) {
        return {0.0, 1.0};
    }
    const double nt = trials;
    const double ph = successes / nt;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nt;
    const double center = (ph + z2 / (2.0 * nt)) / denom;
    const double half = z * std::sqrt(ph * (1.0 - ph) / nt + z2 / (4.0 * nt * nt)) / denom;
    const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
    const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

ExitReport chamber_exit(const ModelSpec& m, const SchemeConfig& scheme, const std::vector<int>& n_list, int paths,
                        const RunOptions& run) {
    if (paths < 1) {
        throw ParameterError("chamber_exit: need at least one path");
    }
    if (n_list.empty()) {
        throw ParameterError("chamber_exit: n_list is empty");
    }
    ExitReport report;
    report.n = n_list;
    report.paths = paths;
    const std::size_t J = n_list.size();
    const auto M = static_cast<std::size_t>(paths);
    std::vector<int> exits(J, 0);

    if (scheme.variant == Variant::truncated) {
        if (auto w = p_star_warning(m, scheme.variant); !w.empty()) {
            report.warnings.push_back(w);
        }
        const int n_max = *std::max_element(n_list.begin(), n_list.end());
        const bool nested = std::all_of(n_list.begin(), n_list.end(), [&](int n) { return n >= 1 && n_max % n == 0; });
        std::vector<std::uint8_t> flags(J * M, 0);
        for_each_chunk(M, kPathChunk, run.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
            std::vector<PathSimulator> sims;
            for (int n : n_list) {
                sims.emplace_back(m, at_resolution(scheme, n));
            }
            PathResult path;
            for (std::size_t q = begin; q < end; ++q) {
                BrownianDriver fine;
                if (nested) {
                    fine = make_brownian(m.brownian_dim(), n_max, m.horizon(), run.seed, q);
                }
                for (std::size_t j = 0; j < J; ++j) {
                    const int n = n_list[j];
                    if (nested) {
                        sims[j].run(fine, path);
                    } else {
                        sims[j].run(make_brownian(m.brownian_dim(), n, m.horizon(), run.seed, q), path);
                    }
                    flags[j * M + q] = path.first_violation.has_value() ? 1 : 0;
                }
            }
        });
        for (std::size_t j = 0; j < J; ++j) {
            for (std::size_t q = 0; q < M; ++q) {
                exits[j] += flags[j * M + q];
            }
        }
    }

    std::vector<double> fit_n, fit_frac;
    for (std::size_t j = 0; j < J; ++j) {
        report.exits.push_back(exits[j]);
        report.fraction.push_back(static_cast<double>(exits[j]) / static_cast<double>(M));
        const auto [lo, hi] = wilson_interval(exits[j], paths);
        report.ci_low.push_back(lo);
        report.ci_high.push_back(hi);
        if (exits[j] >= kMinExitsForFit) {
            fit_n.push_back(n_list[j]);
            fit_frac.push_back(report.fraction.back());
        }
    }
    if (fit_n.size() >= 3) {
        report.fit = fit_loglog(fit_n, fit_frac, 3);
    }
    return report;
}

double squared_bessel_mean(double sigma0, double lambda0, double k0, double xi, double T) {
    const double a = 2.0 * k0 + sigma0 * sigma0;
    if (lambda0 == 0.0) {
        return xi * xi + a * T;
    }
    return xi * xi * std::exp(2.0 * lambda0 * T) + a * std::expm1(2.0 * lambda0 * T) / (2.0 * lambda0);
}

CirCheck cir_mean_check(double sigma0, double lambda0, double k0, double xi, double T, const SchemeConfig& scheme,
                        int paths, const RunOptions& run) {
    const ModelSpec m = preset_bessel({TimeFn::constant(sigma0)}, TimeFn::constant(lambda0), TimeFn::constant(k0),
                                      xi, T);
    const std::vector<PathResult> results = simulate_paths(m, scheme, paths, run);
    std::vector<double> y(results.size());
    std::transform(results.begin(), results.end(), y.begin(), [](const PathResult& r) {
        const double x = r.states(0, r.steps());
        return x * x;
    });
    const Estimate e = estimate_mean(y);
    CirCheck check;
    check.mean_y = e.mean;
    check.std_error = e.std_error;
    check.exact_mean = squared_bessel_mean(sigma0, lambda0, k0, xi, T);
    const double gap = e.mean - check.exact_mean;
    if (e.std_error > 0.0) {
        check.z_score = gap / e.std_error;
    } else {
        check.z_score = gap == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), gap);
    }
    check.bias_allowance = 0.01 * std::abs(check.exact_mean);
    check.passed = std::abs(gap) <= 3.0 * e.std_error + check.bias_allowance;
    return check;
}

std::vector<PathResult> simulate_paths(const ModelSpec& m, const SchemeConfig& scheme, int paths,
                                       const RunOptions& run) {
    if (paths < 1) {
        throw ParameterError("simulate_paths: need at least one path");
    }
    scheme.validate();
    std::vector<PathResult> out(static_cast<std::size_t>(paths));
    for_each_chunk(out.size(), kPathChunk, run.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        PathSimulator sim(m, scheme);
        for (std::size_t q = begin; q < end; ++q) {
            sim.run(make_brownian(m.brownian_dim(), scheme.n, m.horizon(), run.seed, q), out[q]);
        }
    });
    return out;
}

}  // namespace dunkl
