#include "dunkl/scheme.hpp"

#include <cmath>
#include <string>

#include "dunkl/errors.hpp"

namespace dunkl {

const char* to_string(Variant v) { return v == Variant::exact ? "exact" : "truncated"; }

void SchemeConfig::validate() const {
    if (n < 1) {
        throw ParameterError("scheme: n must be at least 1");
    }
    if (variant == Variant::exact) {
        if (!(theta >= 0.0 && theta < 0.5)) {
            throw ParameterError("scheme: exact variant needs theta in [0, 1/2)");
        }
    } else {
        if (!(theta >= 0.0 && theta < 1.0)) {
            throw ParameterError("scheme: truncated variant needs theta in [0, 1)");
        }
        if (!(c > 1.0) || !std::isfinite(c)) {
            throw ParameterError("scheme: truncation constant c must exceed 1");
        }
    }
    if (!(solver.tol > 0.0) || solver.max_iterations < 1) {
        throw ParameterError("scheme: invalid solver options");
    }
}

double truncation_level(const ModelSpec& m, int n, double c) {
    if (n < 1) {
        throw ParameterError("truncation_level: n must be at least 1");
    }
    return c * std::sqrt(L_k(m) * m.horizon() / n);
}

namespace {

double grid_time(double T, int l, int n) { return T * static_cast<double>(l) / static_cast<double>(n); }

}  // namespace

PathSimulator::PathSimulator(const ModelSpec& m, const SchemeConfig& cfg)
    : m_(&m), cfg_(cfg), exact_(m.roots(), cfg.solver), truncated_(m.roots()) {
    cfg_.validate();
    if (cfg_.variant == Variant::truncated) {
        eps_ = truncation_level(m, cfg_.n, cfg_.c);
        lipschitz_ = L_k(m);
    }
    const int d = m.dim();
    x_.resize(d);
    xhat_.resize(d);
    y_.resize(d);
    noise_.resize(d);
}

PathResult PathSimulator::run(const BrownianDriver& driver) {
    PathResult out;
    run(driver, out);
    return out;
}

void PathSimulator::run(const BrownianDriver& driver, PathResult& out) {
    const ModelSpec& m = *m_;
    const int n = cfg_.n;
    if (driver.r != m.brownian_dim()) {
        throw DimensionError("scheme: driver dimension does not match the diffusion coefficient");
    }
    if (std::abs(driver.T - m.horizon()) > 1e-12 * m.horizon()) {
        throw GridError("scheme: driver horizon does not match the model");
    }
    BrownianDriver coarse;
    const BrownianDriver* drv = &driver;
    if (driver.steps != n) {
        if (driver.steps % n != 0) {
            throw GridError("scheme: driver grid is not a refinement of the scheme grid");
        }
        coarse = coarsen(driver, driver.steps / n);
        drv = &coarse;
    }
    driver_ = drv;
    out_ = &out;

    out.states.resize(m.dim(), n + 1);
    out.in_chamber.assign(static_cast<std::size_t>(n) + 1, 1);
    out.iterations.assign(static_cast<std::size_t>(n), 0);
    out.first_violation.reset();
    out.eps = eps_;
    out.states.col(0) = m.xi();

    const double T = m.horizon();
    const double dt = T / n;
    x_ = m.xi();
    m.root_k(0.0, k_now_);
    for (int l = 0; l < n; ++l) {
        const double t = grid_time(T, l, n);
        if (cfg_.variant == Variant::exact) {
            advance_exact(l, t, dt);
        } else {
            advance_truncated(l, t, dt);
        }
        out.states.col(l + 1) = x_;
        k_now_.swap(k_next_);
    }
    out_ = nullptr;
    driver_ = nullptr;
}

void PathSimulator::advance_exact(int l, double t, double dt) {
    const ModelSpec& m = *m_;
    const double theta = cfg_.theta;
    m.sigma().apply(t, x_, driver_->increment(l), noise_);
    xhat_ = x_ + noise_;
    m.drift().accumulate(t, x_, dt, xhat_);
    if (theta > 0.0) {
        weights_ = (theta * dt) * k_now_;
        add_singular_drift(m.roots(), weights_, x_, xhat_);
    }
    m.root_k(grid_time(m.horizon(), l + 1, cfg_.n), k_next_);
    weights_ = ((1.0 - theta) * dt) * k_next_;
    try {
        out_->iterations[static_cast<std::size_t>(l)] = exact_.solve(weights_, xhat_, y_);
    } catch (const SolverError& e) {
        throw PathError(std::string("exact scheme: ") + e.what() + " at step " + std::to_string(l) + " of path " +
                            std::to_string(driver_->path_id),
                        driver_->path_id, l);
    }
    x_.swap(y_);
}

void PathSimulator::advance_truncated(int l, double t, double dt) {
    const ModelSpec& m = *m_;
    const double theta = cfg_.theta;
    m.sigma().apply(t, x_, driver_->increment(l), noise_);
    xhat_ = x_ + noise_;
    m.drift().accumulate(t, x_, dt, xhat_);
    if (theta > 0.0) {
        weights_ = (theta * dt) * k_now_;
        add_truncated_drift(m.roots(), weights_, x_, eps_, xhat_);
    }
    m.root_k(grid_time(m.horizon(), l + 1, cfg_.n), k_next_);
    out_->iterations[static_cast<std::size_t>(l)] =
        truncated_.solve(k_next_, xhat_, (1.0 - theta) * dt, eps_, cfg_.solver.tol, lipschitz_, y_);
    x_.swap(y_);
    if (!(min_pairing(m.roots(), x_) > 0.0)) {
        out_->in_chamber[static_cast<std::size_t>(l) + 1] = 0;
        if (!out_->first_violation) {
            out_->first_violation = l + 1;
        }
    }
}

PathResult theta_em_path(const ModelSpec& m, const SchemeConfig& cfg, const BrownianDriver& driver) {
    if (cfg.variant != Variant::exact) {
        throw ParameterError("theta_em_path: configuration is not the exact variant");
    }
    PathSimulator sim(m, cfg);
    return sim.run(driver);
}

PathResult truncated_theta_em_path(const ModelSpec& m, const SchemeConfig& cfg, const BrownianDriver& driver) {
    if (cfg.variant != Variant::truncated) {
        throw ParameterError("truncated_theta_em_path: configuration is not the truncated variant");
    }
    PathSimulator sim(m, cfg);
    return sim.run(driver);
}

PathResult simulate_path(const ModelSpec& m, const SchemeConfig& cfg, const BrownianDriver& driver) {
    PathSimulator sim(m, cfg);
    return sim.run(driver);
}

double max_step_residual(const ModelSpec& m, const SchemeConfig& cfg, const BrownianDriver& driver,
                         const PathResult& path) {
    cfg.validate();
    const int n = cfg.n;
    if (path.steps() != n) {
        throw GridError("max_step_residual: path length does not match configuration");
    }
    const BrownianDriver drv = driver.steps == n ? driver : coarsen(driver, driver.steps / n);
    const double T = m.horizon();
    const double dt = T / n;
    const std::optional<double> eps =
        cfg.variant == Variant::truncated ? std::optional<double>(truncation_level(m, n, cfg.c)) : std::nullopt;
    const RootSystem& rs = m.roots();
    Eigen::VectorXd noise;
    double worst = 0.0;
    for (int l = 0; l < n; ++l) {
        const double t = grid_time(T, l, n);
        const Eigen::VectorXd x = path.state(l);
        m.sigma().apply(t, x, drv.increment(l), noise);
        Eigen::VectorXd xhat = x + noise;
        m.drift().accumulate(t, x, dt, xhat);
        if (cfg.theta > 0.0) {
            const Eigen::VectorXd w = (cfg.theta * dt) * rs.per_root(m.orbit_k(t));
            if (eps) {
                add_truncated_drift(rs, w, x, *eps, xhat);
            } else {
                add_singular_drift(rs, w, x, xhat);
            }
        }
        const Eigen::VectorXd kn = m.orbit_k(grid_time(T, l + 1, n));
        worst = std::max(worst, step_residual(rs, kn, xhat, (1.0 - cfg.theta) * dt, eps, path.state(l + 1)));
    }
    return worst;
}

}  // namespace dunkl
