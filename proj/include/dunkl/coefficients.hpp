#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dunkl/root_system.hpp"
#include "dunkl/time_fn.hpp"

namespace dunkl {

/// Diffusion coefficient sigma(t, x), a d x r matrix.
///
/// Every form carries a sup-over-x bound of sigma_bar(t, .), exact for the
/// time-only and clamped forms and user-declared for custom callables.
class Diffusion {
  public:
    /// Entries depend on time only, stored row-major.
    struct TimeMatrix {
        int rows;
        int cols;
        std::vector<TimeFn> entries;
        bool diagonal;  // square with identically-zero off-diagonal entries
    };
    /// diag(a_i + b_i * clamp(x_i, lo, hi)); Lipschitz constant max |b_i|.
    struct LinearClamped {
        Eigen::VectorXd a;
        Eigen::VectorXd b;
        double lo;
        double hi;
    };
    struct Custom {
        std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> fn;
        int rows;
        int cols;
        double lipschitz;
        double sup_bound;  // declared sup_x sigma_bar(t, x), uniform in t
        bool diagonal;
    };

    /// s(t) * I_d.
    static Diffusion scalar(const TimeFn& s, int d);
    static Diffusion diagonal(std::vector<TimeFn> entries);
    static Diffusion matrix(const Eigen::MatrixXd& m);
    static Diffusion time_matrix(int rows, int cols, std::vector<TimeFn> entries);
    /// 1 x r row of time functions (Bessel-type noise).
    static Diffusion row(std::vector<TimeFn> entries);
    static Diffusion linear_clamped(Eigen::VectorXd a, Eigen::VectorXd b, double lo, double hi);
    static Diffusion custom(Custom form);

    int rows() const;
    int cols() const;

    void evaluate(double t, const Eigen::VectorXd& x, Eigen::MatrixXd& out) const;
    Eigen::MatrixXd operator()(double t, const Eigen::VectorXd& x) const;

    /// out = sigma(t, x) * dB without forming the matrix when it is diagonal.
    void apply(double t, const Eigen::VectorXd& x, const Eigen::Ref<const Eigen::VectorXd>& dB,
               Eigen::VectorXd& out) const;

    /// max_i |sigma_ii| for square diagonal sigma, Frobenius norm otherwise.
    double sigma_bar(double t, const Eigen::VectorXd& x) const;
    /// sup over x of sigma_bar(t, x).
    double sigma_bar_sup(double t) const;
    /// False when the sup bound is declared rather than computed.
    bool sup_bound_exact() const;

    double lipschitz() const;
    bool is_zero() const;
    std::vector<const TimeFn*> time_functions() const;

    const std::variant<TimeMatrix, LinearClamped, Custom>& form() const { return form_; }

  private:
    explicit Diffusion(std::variant<TimeMatrix, LinearClamped, Custom> form) : form_(std::move(form)) {}

    std::variant<TimeMatrix, LinearClamped, Custom> form_;
};

/// Regular drift b(t, x).
class Drift {
  public:
    struct Zero {};
    /// lambda(t) * x
    struct Linear {
        TimeFn lambda;
    };
    /// Constant vector; satisfies the wall condition with K = 0 when
    /// <alpha, v> >= 0 for every positive root (ordered for type A).
    struct Constant {
        Eigen::VectorXd v;
    };
    /// A x + v with constant A.
    struct Affine {
        Eigen::MatrixXd A;
        Eigen::VectorXd v;
    };
    struct Custom {
        std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> fn;
        double lipschitz;
    };

    Drift() : form_(Zero{}) {}

    static Drift zero() { return Drift(Zero{}); }
    static Drift linear(const TimeFn& lambda) { return Drift(Linear{lambda}); }
    static Drift constant(Eigen::VectorXd v) { return Drift(Constant{std::move(v)}); }
    static Drift affine(Eigen::MatrixXd A, Eigen::VectorXd v);
    static Drift custom(Custom form);

    /// Adds b(t, x) * scale to out.
    void accumulate(double t, const Eigen::VectorXd& x, double scale, Eigen::VectorXd& out) const;
    Eigen::VectorXd operator()(double t, const Eigen::VectorXd& x) const;

    double lipschitz(double T) const;
    bool is_zero() const { return std::holds_alternative<Zero>(form_); }

    /// Exact K(t) in sup_{alpha, x in W} <alpha, -b(t,x)> / <alpha, x> <= K(t),
    /// or nullopt when the form can only be checked by sampling.  +inf means
    /// the supremum is unbounded.
    std::optional<double> wall_condition_bound(const RootSystem& rs, double t) const;

    /// Dimension check against d (nullopt when not determinable).
    std::optional<int> dim() const;
    std::vector<const TimeFn*> time_functions() const;

    const std::variant<Zero, Linear, Constant, Affine, Custom>& form() const { return form_; }

  private:
    explicit Drift(std::variant<Zero, Linear, Constant, Affine, Custom> form) : form_(std::move(form)) {}

    std::variant<Zero, Linear, Constant, Affine, Custom> form_;
};

}  // namespace dunkl
