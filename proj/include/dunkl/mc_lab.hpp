#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dunkl/model.hpp"
#include "dunkl/scheme.hpp"

namespace dunkl {

/// Seed and thread budget for a Monte Carlo run.  Results never depend on
/// `threads`.
struct RunOptions {
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Mean and standard error of i.i.d. per-path values, summed pairwise in path order.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
};

Estimate estimate_mean(std::span<const double> values);

struct ErrorCurve {
    std::vector<int> n;
    /// (E[sup_l |X_ref(t_l) - X_n(t_l)|^2])^{1/2}
    std::vector<double> rms_sup_error;
    std::vector<double> std_error;
    int paths = 0;
    int n_ref = 0;
    Variant variant = Variant::exact;
    double theta = 0.0;
    std::vector<std::string> warnings;
};

/// Strong error against the same scheme at n_ref driven by the same Brownian
/// path.  Every n must divide n_ref by a power of two (GridError otherwise)
/// and paths >= 100.  Warns (and still runs) when p* is below the variant's
/// convergence threshold (6 exact, 8 truncated).
ErrorCurve strong_error(const ModelSpec& m, const SchemeConfig& scheme, const std::vector<int>& n_list, int n_ref,
                        int paths, const RunOptions& run);

/// RMS of sup_l |X_a(t_l) - X_b(t_l)| for two configurations at the same n on
/// the same drivers (generated at n_driver steps and coarsened).
Estimate coupled_rms_gap(const ModelSpec& m, const SchemeConfig& a, const SchemeConfig& b, int n, int n_driver,
                         int paths, const RunOptions& run);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    /// 95% confidence half-width of the slope (Student t); 0 with two points.
    double half_width = 0.0;
    int points = 0;
};

/// Least squares of log2(y) on log2(x), skipping non-positive entries.
/// Throws FitError with fewer than `min_points` usable points.
FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y, int min_points = 3);

/// Fit of log2(error) on log2(n); the slope is about -0.5 for order 1/2.
FitResult fit_order(const ErrorCurve& curve);

struct MomentReport {
    double p = 0.0;
    int n = 0;
    int paths = 0;
    std::vector<double> times;
    /// Root x time estimates of E[<a, X(t_l)>^{-p}].
    Eigen::MatrixXd estimates;
    Eigen::MatrixXd std_errors;
    double max_estimate = 0.0;
    int max_root = 0;
    int max_time_index = 0;
    /// Mean and error of sup_l <a, X(t_l)>^{-p}, maximized over roots per path.
    Estimate pathwise_sup;
    std::vector<std::string> warnings;
};

/// Negative moments of the wall distances under the exact scheme.
MomentReport negative_moments(const ModelSpec& m, double p, const SchemeConfig& scheme, int paths,
                              const RunOptions& run);

struct IncrementReport {
    std::vector<double> tau;
    std::vector<int> lag_steps;
    /// E|X(t + tau) - X(t)|^2 averaged over grid times and paths.
    std::vector<double> mean_sq;
    std::vector<double> std_error;
    std::optional<FitResult> fit;
};

/// Lags must be non-negative multiples of dt = T / n (GridError otherwise).
IncrementReport increment_scaling(const ModelSpec& m, const SchemeConfig& scheme, int paths,
                                  const std::vector<double>& taus, const RunOptions& run);

struct ExitReport {
    std::vector<int> n;
    std::vector<int> exits;
    std::vector<double> fraction;
    std::vector<double> ci_low;
    std::vector<double> ci_high;
    int paths = 0;
    /// Decay fit over entries with at least kMinExitsForFit exits.
    std::optional<FitResult> fit;
    std::vector<std::string> warnings;
};

inline constexpr int kMinExitsForFit = 5;

/// Wilson score interval at 95%.
std::pair<double, double> wilson_interval(int successes, int trials, double z = 1.959963984540054);

/// Fraction of truncated-scheme paths with any state outside the chamber.
/// The exact variant is chamber-preserving and reports zeros.
ExitReport chamber_exit(const ModelSpec& m, const SchemeConfig& scheme, const std::vector<int>& n_list, int paths,
                        const RunOptions& run);

struct CirCheck {
    double mean_y = 0.0;
    double std_error = 0.0;
    double exact_mean = 0.0;
    double z_score = 0.0;
    double bias_allowance = 0.0;
    bool passed = false;
};

/// Mean of Y(T) = X(T)^2 at time T of m'(t) = 2k + sigma^2 + 2 lambda m, m(0) = xi^2.
double squared_bessel_mean(double sigma0, double lambda0, double k0, double xi, double T);

/// Compares the simulated mean of X(T)^2 under a constant-coefficient Bessel
/// model with squared_bessel_mean; passes if the gap is at most
/// 3 SE + 1% of the exact mean.
CirCheck cir_mean_check(double sigma0, double lambda0, double k0, double xi, double T, const SchemeConfig& scheme,
                        int paths, const RunOptions& run);

/// Simulates `paths` independent paths (driver ids 0..paths-1) at scheme.n.
std::vector<PathResult> simulate_paths(const ModelSpec& m, const SchemeConfig& scheme, int paths,
                                       const RunOptions& run);

/// Threshold on p* for the strong-rate guarantee of each variant.
double p_star_threshold(Variant v);

}  // namespace dunkl
