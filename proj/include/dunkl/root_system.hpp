#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dunkl/errors.hpp"

namespace dunkl {

/// A positive root system R+ in R^d together with a partition of its roots
/// into orbit classes.  Each orbit class carries one multiplicity value.
///
/// Roots are stored as the columns of a d x m matrix, so the vector of all
/// pairings <alpha, x> is simply `roots().transpose() * x`.  The fundamental
/// chamber W = {x : <alpha, x> > 0 for all alpha in R+} is never materialized;
/// membership is decided through min_pairing().
///
/// Values are immutable after construction.
class RootSystem {
  public:
    /// `roots` holds one root per column; `orbit_of_root[i]` is the orbit class
    /// of column i.  Labels must cover 0..K-1 with every class non-empty.
    RootSystem(Eigen::MatrixXd roots, std::vector<int> orbit_of_root);

    int dim() const { return static_cast<int>(roots_.rows()); }
    int size() const { return static_cast<int>(roots_.cols()); }
    int orbit_count() const { return orbit_count_; }

    const Eigen::MatrixXd& roots() const { return roots_; }
    auto root(int i) const { return roots_.col(i); }
    int orbit(int i) const { return orbit_of_root_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& orbit_labels() const { return orbit_of_root_; }

    /// |alpha|^2 per root.
    const Eigen::VectorXd& norms_squared() const { return norms_sq_; }

    /// Root indices grouped by orbit class.
    std::vector<std::vector<int>> orbit_classes() const;

    /// Expand per-orbit values into per-root values.
    Eigen::VectorXd per_root(const Eigen::VectorXd& orbit_values) const;

  private:
    Eigen::MatrixXd roots_;
    std::vector<int> orbit_of_root_;
    Eigen::VectorXd norms_sq_;
    int orbit_count_ = 0;
};

/// A_{d-1}: e_i - e_j for i < j, one orbit.  Chamber x_1 > ... > x_d.
RootSystem make_type_A(int d);

/// B_d: orbit 0 = {e_i - e_j, e_i + e_j : i < j}, orbit 1 = {e_i}.
/// Chamber x_1 > ... > x_d > 0.
RootSystem make_type_B(int d);

/// Orthogonal sum: roots of `a` in the first block, roots of `b` in the second.
/// Orbit labels of `b` are shifted past those of `a`.
RootSystem direct_sum(const RootSystem& a, const RootSystem& b);

struct AxiomReport {
    bool nonzero = true;
    /// (R1): no positive root is a multiple of another one.
    bool r1 = true;
    /// (R2): R = R+ u -R+ is closed under its own reflections.
    bool r2 = true;
    /// Largest distance from a reflected root to the nearest root.
    double worst_r2_residual = 0.0;
    /// Largest relative deviation | |s_a(b)| - |b| | / |b| over all pairs.
    double worst_norm_defect = 0.0;

    bool passed() const { return nonzero && r1 && r2; }
};

AxiomReport validate_axioms(const RootSystem& rs, double tol = 1e-9);

/// Reflection of `beta` through the hyperplane orthogonal to `alpha`.
template <typename DerivedA, typename DerivedB>
Eigen::VectorXd reflect(const Eigen::MatrixBase<DerivedA>& alpha,
                        const Eigen::MatrixBase<DerivedB>& beta) {
    return beta - (2.0 * alpha.dot(beta) / alpha.squaredNorm()) * alpha;
}

/// <alpha, x> for every positive root.
template <typename Derived>
Eigen::VectorXd pairings(const RootSystem& rs, const Eigen::MatrixBase<Derived>& x) {
    if (x.size() != rs.dim()) {
        throw DimensionError("pairings: point dimension does not match root system");
    }
    return rs.roots().transpose() * x;
}

/// Minimum pairing over R+; positive exactly when x lies in the open chamber.
template <typename Derived>
double min_pairing(const RootSystem& rs, const Eigen::MatrixBase<Derived>& x) {
    return pairings(rs, x).minCoeff();
}

/// Relative residual |LHS - RHS| / max(1, |LHS|) of
///   sum_a k_a |a|^2 / <a,x>^2  =  sum_{a,b} k_b <a,b> / (<a,x><b,x>)
/// with k constant on each orbit.  Throws DomainError outside the chamber.
double pairing_identity_residual(const RootSystem& rs, const Eigen::VectorXd& orbit_k,
                                 const Eigen::VectorXd& x);

/// sum_a a / |a|; lies in the chamber for the shipped families.
Eigen::VectorXd interior_direction(const RootSystem& rs);

/// Reflect `x` through walls it violates until it lands in the closed chamber.
/// Returns false if that does not happen within `max_reflections`.
bool fold_into_chamber(const RootSystem& rs, Eigen::VectorXd& x, int max_reflections = 10000);

}  // namespace dunkl
