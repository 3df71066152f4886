#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dunkl/coefficients.hpp"
#include "dunkl/root_system.hpp"
#include "dunkl/time_fn.hpp"

namespace dunkl {

/// One SDE instance
///   dX = sigma(t,X) dB + b(t,X) dt + sum_a k(t,a) / <a,X> a dt,   X(0) = xi,
/// on [0, T] with k constant on each orbit class of the root system.
class ModelSpec {
  public:
    /// Throws DomainError if xi is not strictly inside the chamber and
    /// ParameterError/DimensionError for inconsistent coefficients.
    ModelSpec(RootSystem rs, double T, Eigen::VectorXd xi, Diffusion sigma, Drift drift,
              std::vector<TimeFn> k);

    const RootSystem& roots() const { return rs_; }
    double horizon() const { return T_; }
    const Eigen::VectorXd& xi() const { return xi_; }
    const Diffusion& sigma() const { return sigma_; }
    const Drift& drift() const { return drift_; }
    const std::vector<TimeFn>& k() const { return k_; }

    int dim() const { return rs_.dim(); }
    int brownian_dim() const { return sigma_.cols(); }

    /// k(t, .) per orbit class.
    Eigen::VectorXd orbit_k(double t) const;
    /// k(t, .) per root, written into `out` (resized as needed).
    void root_k(double t, Eigen::VectorXd& out) const;
    /// ||k(., orbit)||_inf on [0, T].
    double k_sup(int orbit) const;

    /// Every time function the model depends on (for lattice construction).
    std::vector<const TimeFn*> time_functions() const;

  private:
    RootSystem rs_;
    double T_;
    Eigen::VectorXd xi_;
    Diffusion sigma_;
    Drift drift_;
    std::vector<TimeFn> k_;
};

/// 1 / max(eps, s).
double g_eps(double eps, double s);

/// out += sum_a w_a / <a, x> * a.  Caller guarantees x is in the chamber.
template <typename DerivedX, typename DerivedOut>
inline void add_singular_drift(const RootSystem& rs, const Eigen::VectorXd& weights,
                               const Eigen::MatrixBase<DerivedX>& x,
                               const Eigen::MatrixBase<DerivedOut>& out_) {
    auto& out = const_cast<Eigen::MatrixBase<DerivedOut>&>(out_);
    const Eigen::MatrixXd& R = rs.roots();
    for (Eigen::Index a = 0; a < R.cols(); ++a) {
        const double p = R.col(a).dot(x);
        out += (weights[a] / p) * R.col(a);
    }
}

/// out += sum_a w_a g_eps(<a, x>) * a.
template <typename DerivedX, typename DerivedOut>
inline void add_truncated_drift(const RootSystem& rs, const Eigen::VectorXd& weights,
                                const Eigen::MatrixBase<DerivedX>& x, double eps,
                                const Eigen::MatrixBase<DerivedOut>& out_) {
    auto& out = const_cast<Eigen::MatrixBase<DerivedOut>&>(out_);
    const Eigen::MatrixXd& R = rs.roots();
    for (Eigen::Index a = 0; a < R.cols(); ++a) {
        const double p = R.col(a).dot(x);
        out += (weights[a] / (p > eps ? p : eps)) * R.col(a);
    }
}

/// Singular drift f_k(t, x).  Throws DomainError unless x is in the chamber.
Eigen::VectorXd f_k(const ModelSpec& m, double t, const Eigen::VectorXd& x);

/// Truncated drift f_{k,eps}(t, x); defined on all of R^d.
Eigen::VectorXd f_k_eps(const ModelSpec& m, double t, const Eigen::VectorXd& x, double eps);

/// L_k = sum_a ||k(., a)||_inf |a|^2.
double L_k(const ModelSpec& m);

/// sigma_bar(t, x): max |sigma_ii| for square diagonal sigma, Frobenius norm otherwise.
double sigma_bar(const ModelSpec& m, double t, const Eigen::VectorXd& x);

/// p* = inf_{t, a} 2 k(t, a) / ||sigma_bar(t, .)||_inf^2 - 1, with the infimum
/// over t taken on a 1024-point lattice plus coefficient breakpoints.
/// Returns +infinity when sigma vanishes identically.
double p_star(const ModelSpec& m);

/// Number of uniform lattice points used for sup/inf over time.
inline constexpr int kTimeLatticePoints = 1024;

enum class CheckStatus { pass, fail, sampled_pass };

const char* to_string(CheckStatus s);

struct ConditionCheck {
    CheckStatus status = CheckStatus::pass;
    double worst_violation = 0.0;
    int samples = 0;
    std::string note;
};

/// Outcome of checking the five standing conditions on (sigma, b, k):
/// (i) b Lipschitz, (ii) sigma Lipschitz, (iii) sigma_bar^2 <= 2k,
/// (iv) the wall condition on b, (v) the pairing identity.
struct AssumptionReport {
    std::array<ConditionCheck, 5> conditions;
    /// sup_t K(t) for condition (iv), exact or sampled.
    double k_bound = 0.0;
    /// p* rests on a user-declared sup bound and may be conservative.
    bool p_star_conservative = false;

    bool all_passed() const;
};

AssumptionReport validate_assumptions(const ModelSpec& m, int sample_count, double tol,
                                      std::uint64_t seed);

/// Random chamber points with log-uniform minimum wall distance in [1e-3, 1e1].
/// Gaussian draws are folded into the chamber by reflections, then rescaled.
std::vector<Eigen::VectorXd> sample_chamber_points(const RootSystem& rs, int count, std::uint64_t seed);

/// d = 1, R+ = {1}: dX = sigma(t) dB + lambda(t) X dt + k(t)/X dt.
ModelSpec preset_bessel(std::vector<TimeFn> sigma_row, const TimeFn& lambda, const TimeFn& k, double xi,
                        double T);

/// Type A non-colliding particles with one multiplicity function.
ModelSpec preset_dyson_A(int d, const TimeFn& k, Diffusion sigma, Drift b, Eigen::VectorXd xi, double T);

/// Type B system: sigma(t) I, b = lambda(t) x, multiplicities k1 (long) and k2 (short).
ModelSpec preset_type_B(int d, const TimeFn& k1, const TimeFn& k2, const TimeFn& sigma, const TimeFn& lambda,
                        Eigen::VectorXd xi, double T);

}  // namespace dunkl
