#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dunkl/brownian.hpp"
#include "dunkl/implicit_step.hpp"
#include "dunkl/model.hpp"

namespace dunkl {

enum class Variant {
    /// Chamber-valued theta scheme; every step solves the singular implicit equation.
    exact,
    /// R^d-valued theta scheme on the truncated drift with eps_n = c sqrt(L_k dt).
    truncated,
};

const char* to_string(Variant v);

struct SchemeConfig {
    Variant variant = Variant::exact;
    /// Weight of the explicit singular-drift evaluation.
    double theta = 0.0;
    int n = 1;
    /// Truncation constant (truncated variant only), must exceed 1.
    double c = 1.1;
    SolverOptions solver;

    /// Throws ParameterError: exact needs theta in [0, 1/2), truncated
    /// theta in [0, 1) and c > 1; n >= 1.
    void validate() const;
};

/// eps_n = c sqrt(L_k T / n).
double truncation_level(const ModelSpec& m, int n, double c);

struct PathResult {
    /// Column l is X(t_l); d x (n+1).
    Eigen::MatrixXd states;
    /// Per time index: state strictly inside the chamber.
    std::vector<std::uint8_t> in_chamber;
    std::optional<int> first_violation;
    /// Solver iterations per step.
    std::vector<int> iterations;
    /// Truncation level used (0 for the exact variant).
    double eps = 0.0;

    int steps() const { return static_cast<int>(states.cols()) - 1; }
    auto state(int l) const { return states.col(l); }
};

/// Advances paths of one model under one scheme configuration.  Holds solver
/// workspaces, so use one instance per thread.
class PathSimulator {
  public:
    PathSimulator(const ModelSpec& m, const SchemeConfig& cfg);

    /// `driver` may be finer than cfg.n by an integer factor; it is coarsened.
    /// Exact variant: throws PathError (path id, step) if a step fails.
    void run(const BrownianDriver& driver, PathResult& out);
    PathResult run(const BrownianDriver& driver);

    const SchemeConfig& config() const { return cfg_; }
    double eps() const { return eps_; }

  private:
    void advance_exact(int step, double t, double dt);
    void advance_truncated(int step, double t, double dt);

    const ModelSpec* m_;
    SchemeConfig cfg_;
    double eps_ = 0.0;
    double lipschitz_ = 0.0;
    ExactStepSolver exact_;
    TruncatedStepSolver truncated_;
    Eigen::VectorXd x_, xhat_, y_, noise_, k_now_, k_next_, weights_;
    PathResult* out_ = nullptr;
    const BrownianDriver* driver_ = nullptr;
};

/// Exact chamber-preserving theta scheme.  Requires cfg.variant == exact.
PathResult theta_em_path(const ModelSpec& m, const SchemeConfig& cfg, const BrownianDriver& driver);

/// Truncated theta scheme.  Requires cfg.variant == truncated.
PathResult truncated_theta_em_path(const ModelSpec& m, const SchemeConfig& cfg, const BrownianDriver& driver);

PathResult simulate_path(const ModelSpec& m, const SchemeConfig& cfg, const BrownianDriver& driver);

/// Recomputes every step equation of a stored path and returns the largest
/// residual |X_{l+1} - xhat_l - h f(t_{l+1}, X_{l+1})|.
double max_step_residual(const ModelSpec& m, const SchemeConfig& cfg, const BrownianDriver& driver,
                         const PathResult& path);

}  // namespace dunkl
