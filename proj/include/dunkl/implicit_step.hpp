#pragma once

#include <optional>

#include <Eigen/Dense>

#include "dunkl/root_system.hpp"

namespace dunkl {

struct SolverOptions {
    /// Absolute tolerance on |y - xhat - h f(y)|.
    double tol = 1e-10;
    int max_iterations = 200;
};

struct SolveReport {
    Eigen::VectorXd y;
    int iterations = 0;
    double residual = 0.0;
    double wall_distance = 0.0;
};

/// Positive root of y^2 - xhat y - h k = 0, i.e. the d = 1 implicit step.
double closed_form_1d(double xhat, double h, double kval);

/// Solves y = xhat + h sum_a k_a / <a, y> a for y in the chamber.
///
/// y is the unique minimizer of the strictly convex barrier functional
///   phi(y) = |y - xhat|^2 / 2 - h sum_a k_a log <a, y>,
/// found by damped Newton.  Iterates never leave the chamber: each step is
/// capped at 0.95 of the distance to the nearest wall along the direction.
/// `orbit_k` holds one multiplicity per orbit class.  Throws SolverError
/// (with the best iterate) if the tolerance is not reached.
SolveReport solve_exact_step(const RootSystem& rs, const Eigen::VectorXd& orbit_k, const Eigen::VectorXd& xhat,
                             double h, const SolverOptions& options = {});

/// Solves y = xhat + h f_{k,eps}(y) on R^d by fixed-point iteration from y0 = xhat.
///
/// The iteration count is fixed in advance by the geometric certificate
///   |y - y_n| <= A eps rho^n / (L (1 - rho)),  rho = L h / eps^2,
/// with A = sum_a k_a |a| and L a Lipschitz scale (default sum_a k_a |a|^2).
/// Throws ContractionError unless rho < 1.
SolveReport solve_truncated_step(const RootSystem& rs, const Eigen::VectorXd& orbit_k,
                                 const Eigen::VectorXd& xhat, double h, double eps, double tol,
                                 std::optional<double> lipschitz = std::nullopt);

/// Right-hand side of the certificate above for n iterations.
double fixed_point_error_bound(double drift_scale, double lipschitz, double eps, double rho, int n);

/// Smallest n whose certificate is <= tol.
int fixed_point_iterations(double drift_scale, double lipschitz, double eps, double rho, double tol);

/// |y - xhat - h f(y)| with f = f_k (eps empty) or f_{k,eps}.  Throws
/// DomainError in exact mode when y is not in the chamber.
double step_residual(const RootSystem& rs, const Eigen::VectorXd& orbit_k, const Eigen::VectorXd& xhat,
                     double h, std::optional<double> eps, const Eigen::VectorXd& y);

/// Reusable Newton solver with preallocated workspace, for per-path loops.
/// Weights are per root and already include the step size (w_a = h k_a).
class ExactStepSolver {
  public:
    explicit ExactStepSolver(const RootSystem& rs, SolverOptions options = {});

    /// Writes the solution into y and returns the iteration count.
    /// Throws SolverError on failure.
    int solve(const Eigen::VectorXd& weights, const Eigen::VectorXd& xhat, Eigen::VectorXd& y);

    /// Same, but Newton starts at `start`, which must lie inside the chamber.
    int solve_from(const Eigen::VectorXd& weights, const Eigen::VectorXd& xhat, const Eigen::VectorXd& start,
                   Eigen::VectorXd& y);

    double last_residual() const { return residual_; }

  private:
    int newton(const Eigen::VectorXd& weights, const Eigen::VectorXd& xhat, Eigen::VectorXd& y);
    double residual(const Eigen::VectorXd& weights, const Eigen::VectorXd& xhat, const Eigen::VectorXd& y,
                    Eigen::VectorXd& grad) const;
    double objective(const Eigen::VectorXd& weights, const Eigen::VectorXd& xhat, const Eigen::VectorXd& y) const;

    const RootSystem* rs_;
    SolverOptions options_;
    Eigen::VectorXd interior_;
    Eigen::VectorXd grad_, trial_grad_, dir_, trial_, pair_;
    Eigen::MatrixXd hess_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double residual_ = 0.0;
};

/// Reusable fixed-point solver.  Weights are per root *without* the step size.
class TruncatedStepSolver {
  public:
    explicit TruncatedStepSolver(const RootSystem& rs);

    /// Runs the certified number of iterations; returns it.
    int solve(const Eigen::VectorXd& k_per_root, const Eigen::VectorXd& xhat, double h, double eps, double tol,
              double lipschitz, Eigen::VectorXd& y);

    double last_residual() const { return residual_; }

  private:
    const RootSystem* rs_;
    Eigen::VectorXd weights_, next_;
    Eigen::VectorXd norms_;
    double residual_ = 0.0;
};

}  // namespace dunkl
