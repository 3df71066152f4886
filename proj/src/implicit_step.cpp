#include "dunkl/implicit_step.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dunkl/errors.hpp"
#include "dunkl/model.hpp"

namespace dunkl {

double closed_form_1d(double xhat, double h, double kval) {
    if (!(kval > 0.0)) {
        throw ParameterError("closed_form_1d: multiplicity must be positive");
    }
    if (!(h >= 0.0)) {
        throw ParameterError("closed_form_1d: step must be non-negative");
    }
    const double root = std::sqrt(xhat * xhat + 4.0 * h * kval);
    if (xhat >= 0.0) {
        return 0.5 * (xhat + root);
    }
    // Avoids cancellation for negative xhat.
    return 2.0 * h * kval / (root - xhat);
}

namespace {

void check_step_inputs(const RootSystem& rs, const Eigen::VectorXd& orbit_k, const Eigen::VectorXd& xhat,
                       double h) {
    if (xhat.size() != rs.dim()) {
        throw DimensionError("implicit step: xhat has wrong dimension");
    }
    if (orbit_k.size() != rs.orbit_count()) {
        throw DimensionError("implicit step: need one multiplicity per orbit");
    }
    if (!(orbit_k.minCoeff() > 0.0)) {
        throw ParameterError("implicit step: multiplicities must be positive");
    }
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw ParameterError("implicit step: h must be positive");
    }
}

}  // namespace

ExactStepSolver::ExactStepSolver(const RootSystem& rs, SolverOptions options)
    : rs_(&rs), options_(options), interior_(interior_direction(rs)), llt_(rs.dim()) {
    const int d = rs.dim();
    grad_.resize(d);
    trial_grad_.resize(d);
    dir_.resize(d);
    trial_.resize(d);
    pair_.resize(rs.size());
    hess_.resize(d, d);
    if (!(options_.tol > 0.0) || options_.max_iterations < 1) {
        throw ParameterError("implicit step: invalid solver options");
    }
}

double ExactStepSolver::residual(const Eigen::VectorXd& w, const Eigen::VectorXd& xhat, const Eigen::VectorXd& y,
                                 Eigen::VectorXd& grad) const {
    grad = y - xhat;
    const Eigen::MatrixXd& R = rs_->roots();
    for (Eigen::Index a = 0; a < R.cols(); ++a) {
        grad -= (w[a] / R.col(a).dot(y)) * R.col(a);
    }
    return grad.norm();
}

double ExactStepSolver::objective(const Eigen::VectorXd& w, const Eigen::VectorXd& xhat,
                                  const Eigen::VectorXd& y) const {
    double value = 0.5 * (y - xhat).squaredNorm();
    const Eigen::MatrixXd& R = rs_->roots();
    for (Eigen::Index a = 0; a < R.cols(); ++a) {
        value -= w[a] * std::log(R.col(a).dot(y));
    }
    return value;
}

int ExactStepSolver::solve(const Eigen::VectorXd& w, const Eigen::VectorXd& xhat, Eigen::VectorXd& y) {
    const RootSystem& rs = *rs_;
    const Eigen::MatrixXd& R = rs.roots();
    const Eigen::Index m = R.cols();

    // Start at wall distance >= sqrt(h L)/2, moving along the interior direction.
    const double target = 0.5 * std::sqrt(w.dot(rs.norms_squared()));
    y = xhat;
    double shift = 0.0;
    for (Eigen::Index a = 0; a < m; ++a) {
        const double p = R.col(a).dot(xhat);
        if (p < target) {
            const double slope = R.col(a).dot(interior_);
            if (!(slope > 0.0)) {
                throw SolverError("implicit step: no interior direction for this root system", xhat, 0,
                                  std::numeric_limits<double>::infinity());
            }
            shift = std::max(shift, (target - p) / slope);
        }
    }
    if (shift > 0.0) {
        y += shift * interior_;
    }
    return newton(w, xhat, y);
}

int ExactStepSolver::solve_from(const Eigen::VectorXd& w, const Eigen::VectorXd& xhat, const Eigen::VectorXd& start,
                                Eigen::VectorXd& y) {
    if (!(min_pairing(*rs_, start) > 0.0)) {
        throw DomainError("implicit step: starting point is not inside the chamber");
    }
    y = start;
    return newton(w, xhat, y);
}

int ExactStepSolver::newton(const Eigen::VectorXd& w, const Eigen::VectorXd& xhat, Eigen::VectorXd& y) {
    const Eigen::MatrixXd& R = rs_->roots();
    const Eigen::Index m = R.cols();
    double res = residual(w, xhat, y, grad_);
    for (int it = 0; it < options_.max_iterations; ++it) {
        if (res <= options_.tol) {
            residual_ = res;
            return it;
        }
        pair_.noalias() = R.transpose() * y;
        hess_.setIdentity();
        for (Eigen::Index a = 0; a < m; ++a) {
            hess_.selfadjointView<Eigen::Lower>().rankUpdate(R.col(a), w[a] / (pair_[a] * pair_[a]));
        }
        llt_.compute(hess_);
        dir_ = llt_.solve(grad_);
        dir_ = -dir_;

        double step = 1.0;
        for (Eigen::Index a = 0; a < m; ++a) {
            const double rate = R.col(a).dot(dir_);
            if (rate < 0.0) {
                step = std::min(step, 0.95 * pair_[a] / -rate);
            }
        }
        const double slope = grad_.dot(dir_);
        const double phi = objective(w, xhat, y);
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
            trial_ = y + step * dir_;
            if (!((R.transpose() * trial_).minCoeff() > 0.0)) {
                continue;
            }
            const double trial_res = residual(w, xhat, trial_, trial_grad_);
            // The residual test covers the end game, where phi changes below rounding.
            if (objective(w, xhat, trial_) <= phi + 1e-4 * step * slope || trial_res < res) {
                y = trial_;
                grad_ = trial_grad_;
                res = trial_res;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            residual_ = res;
            throw SolverError("implicit step: line search failed", y, it, res);
        }
    }
    residual_ = res;
    if (res <= options_.tol) {
        return options_.max_iterations;
    }
    throw SolverError("implicit step: Newton did not converge", y, options_.max_iterations, res);
}

SolveReport solve_exact_step(const RootSystem& rs, const Eigen::VectorXd& orbit_k, const Eigen::VectorXd& xhat,
                             double h, const SolverOptions& options) {
    check_step_inputs(rs, orbit_k, xhat, h);
    ExactStepSolver solver(rs, options);
    const Eigen::VectorXd w = h * rs.per_root(orbit_k);
    SolveReport report;
    report.iterations = solver.solve(w, xhat, report.y);
    report.residual = solver.last_residual();
    report.wall_distance = min_pairing(rs, report.y);
    return report;
}

double fixed_point_error_bound(double drift_scale, double lipschitz, double eps, double rho, int n) {
    return drift_scale * eps * std::pow(rho, n) / (lipschitz * (1.0 - rho));
}

int fixed_point_iterations(double drift_scale, double lipschitz, double eps, double rho, double tol) {
    if (drift_scale == 0.0) {
        return 0;
    }
    if (fixed_point_error_bound(drift_scale, lipschitz, eps, rho, 0) <= tol) {
        return 0;
    }
    if (rho == 0.0) {
        return 1;
    }
    const double ratio = tol * lipschitz * (1.0 - rho) / (drift_scale * eps);
    int n = std::max(0, static_cast<int>(std::ceil(std::log(ratio) / std::log(rho))));
    while (fixed_point_error_bound(drift_scale, lipschitz, eps, rho, n) > tol) {
        ++n;
    }
    while (n > 0 && fixed_point_error_bound(drift_scale, lipschitz, eps, rho, n - 1) <= tol) {
        --n;
    }
    return n;
}

TruncatedStepSolver::TruncatedStepSolver(const RootSystem& rs)
    : rs_(&rs), norms_(rs.norms_squared().cwiseSqrt()) {
    weights_.resize(rs.size());
    next_.resize(rs.dim());
}

int TruncatedStepSolver::solve(const Eigen::VectorXd& k_per_root, const Eigen::VectorXd& xhat, double h,
                               double eps, double tol, double lipschitz, Eigen::VectorXd& y) {
    const double rho = lipschitz * h / (eps * eps);
    if (!(rho < 1.0)) {
        throw ContractionError("truncated step: h must be below eps^2 / L_k");
    }
    const double scale = k_per_root.dot(norms_);
    const int certified = fixed_point_iterations(scale, lipschitz, eps, rho, tol);
    weights_ = h * k_per_root;
    y = xhat;
    int done = 0;
    for (; done < certified; ++done) {
        next_ = xhat;
        add_truncated_drift(*rs_, weights_, y, eps, next_);
        if (next_ == y) {
            break;  // exact fixed point in floating point
        }
        y.swap(next_);
    }
    next_ = xhat - y;
    add_truncated_drift(*rs_, weights_, y, eps, next_);
    residual_ = next_.norm();
    return done;
}

SolveReport solve_truncated_step(const RootSystem& rs, const Eigen::VectorXd& orbit_k,
                                 const Eigen::VectorXd& xhat, double h, double eps, double tol,
                                 std::optional<double> lipschitz) {
    check_step_inputs(rs, orbit_k, xhat, h);
    if (!(eps > 0.0)) {
        throw ParameterError("truncated step: eps must be positive");
    }
    if (!(tol > 0.0)) {
        throw ParameterError("truncated step: tolerance must be positive");
    }
    const Eigen::VectorXd k = rs.per_root(orbit_k);
    const double local = k.dot(rs.norms_squared());
    const double L = lipschitz.value_or(local);
    if (L < local * (1.0 - 1e-12)) {
        throw ParameterError("truncated step: Lipschitz scale below sum k |a|^2");
    }
    TruncatedStepSolver solver(rs);
    SolveReport report;
    report.iterations = solver.solve(k, xhat, h, eps, tol, L, report.y);
    report.residual = solver.last_residual();
    report.wall_distance = min_pairing(rs, report.y);
    return report;
}

double step_residual(const RootSystem& rs, const Eigen::VectorXd& orbit_k, const Eigen::VectorXd& xhat,
                     double h, std::optional<double> eps, const Eigen::VectorXd& y) {
    if (y.size() != rs.dim() || xhat.size() != rs.dim()) {
        throw DimensionError("step_residual: dimension mismatch");
    }
    const Eigen::VectorXd w = h * rs.per_root(orbit_k);
    Eigen::VectorXd r = xhat - y;
    if (eps) {
        if (!(*eps > 0.0)) {
            throw ParameterError("step_residual: eps must be positive");
        }
        add_truncated_drift(rs, w, y, *eps, r);
    } else {
        if (!(min_pairing(rs, y) > 0.0)) {
            throw DomainError("step_residual: y is not inside the chamber");
        }
        add_singular_drift(rs, w, y, r);
    }
    return r.norm();
}

}  // namespace dunkl
