#pragma once

#include <variant>
#include <vector>

namespace dunkl {

/// Scalar coefficient depending on time only.  Three forms:
///   constant        v(t) = c
///   affine-sqrt     v(t) = a + b sqrt(t)       (1/2-Hoelder in t)
///   tabulated       piecewise-linear through (t_i, v_i), clamped at the ends
class TimeFn {
  public:
    struct Constant {
        double value;
    };
    struct AffineSqrt {
        double a;
        double b;
    };
    struct Table {
        std::vector<double> t;
        std::vector<double> v;
    };

    TimeFn() : form_(Constant{0.0}) {}

    static TimeFn constant(double c);
    static TimeFn affine_sqrt(double a, double b);
    /// Grid must be strictly increasing with at least two nodes.
    static TimeFn tabulated(std::vector<double> t, std::vector<double> v);

    double operator()(double t) const;

    /// Extremes of v on [0, T].  Exact for every form: affine-sqrt is monotone
    /// and a piecewise-linear table attains its extremes at nodes or ends.
    double sup(double T) const;
    double inf(double T) const;
    double sup_abs(double T) const;

    /// Table nodes (empty for closed forms).
    std::vector<double> breakpoints() const;

    /// True if the table covers [0, T] (always true for closed forms).
    bool covers(double T) const;

    bool is_constant() const { return std::holds_alternative<Constant>(form_); }
    bool is_zero() const;

    const std::variant<Constant, AffineSqrt, Table>& form() const { return form_; }

  private:
    explicit TimeFn(std::variant<Constant, AffineSqrt, Table> form) : form_(std::move(form)) {}

    std::variant<Constant, AffineSqrt, Table> form_;
};

/// Uniform lattice of `points` values on [0, T] merged with the breakpoints of
/// every function in `fns` that fall inside [0, T].  Sorted, duplicates removed.
std::vector<double> time_lattice(double T, int points, const std::vector<const TimeFn*>& fns);

}  // namespace dunkl
