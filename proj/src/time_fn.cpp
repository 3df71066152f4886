#include "dunkl/time_fn.hpp"

#include <algorithm>
#include <cmath>

#include "dunkl/errors.hpp"

namespace dunkl {

TimeFn TimeFn::constant(double c) {
    if (!std::isfinite(c)) {
        throw ParameterError("TimeFn: constant must be finite");
    }
    return TimeFn(Constant{c});
}

TimeFn TimeFn::affine_sqrt(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw ParameterError("TimeFn: affine-sqrt parameters must be finite");
    }
    return TimeFn(AffineSqrt{a, b});
}

TimeFn TimeFn::tabulated(std::vector<double> t, std::vector<double> v) {
    if (t.size() != v.size()) {
        throw DimensionError("TimeFn: table needs one value per node");
    }
    if (t.size() < 2) {
        throw ParameterError("TimeFn: table needs at least two nodes");
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(v[i])) {
            throw ParameterError("TimeFn: table entries must be finite");
        }
        if (i > 0 && !(t[i] > t[i - 1])) {
            throw ParameterError("TimeFn: table nodes must be strictly increasing");
        }
    }
    return TimeFn(Table{std::move(t), std::move(v)});
}

double TimeFn::operator()(double t) const {
    if (const auto* c = std::get_if<Constant>(&form_)) {
        return c->value;
    }
    if (const auto* f = std::get_if<AffineSqrt>(&form_)) {
        return f->a + f->b * std::sqrt(std::max(t, 0.0));
    }
    const auto& tab = std::get<Table>(form_);
    if (t <= tab.t.front()) {
        return tab.v.front();
    }
    if (t >= tab.t.back()) {
        return tab.v.back();
    }
    const auto hi = std::upper_bound(tab.t.begin(), tab.t.end(), t);
    const auto i = static_cast<std::size_t>(hi - tab.t.begin());
    const double w = (t - tab.t[i - 1]) / (tab.t[i] - tab.t[i - 1]);
    return (1.0 - w) * tab.v[i - 1] + w * tab.v[i];
}

namespace {

template <typename Pick>
double extreme(const TimeFn& fn, double T, Pick pick) {
    double best = pick(fn(0.0), fn(T));
    for (double b : fn.breakpoints()) {
        if (b > 0.0 && b < T) {
            best = pick(best, fn(b));
        }
    }
    return best;
}

}  // namespace

double TimeFn::sup(double T) const {
    return extreme(*this, T, [](double a, double b) { return std::max(a, b); });
}

double TimeFn::inf(double T) const {
    return extreme(*this, T, [](double a, double b) { return std::min(a, b); });
}

double TimeFn::sup_abs(double T) const { return std::max(std::abs(sup(T)), std::abs(inf(T))); }

std::vector<double> TimeFn::breakpoints() const {
    if (const auto* tab = std::get_if<Table>(&form_)) {
        return tab->t;
    }
    return {};
}

bool TimeFn::covers(double T) const {
    if (const auto* tab = std::get_if<Table>(&form_)) {
        return tab->t.front() <= 0.0 && tab->t.back() >= T;
    }
    return true;
}

bool TimeFn::is_zero() const {
    if (const auto* c = std::get_if<Constant>(&form_)) {
        return c->value == 0.0;
    }
    if (const auto* f = std::get_if<AffineSqrt>(&form_)) {
        return f->a == 0.0 && f->b == 0.0;
    }
    const auto& tab = std::get<Table>(form_);
    return std::all_of(tab.v.begin(), tab.v.end(), [](double v) { return v == 0.0; });
}

std::vector<double> time_lattice(double T, int points, const std::vector<const TimeFn*>& fns) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(points) + 8);
    for (int i = 0; i < points; ++i) {
        out.push_back(points == 1 ? 0.0 : T * static_cast<double>(i) / (points - 1));
    }
    for (const TimeFn* fn : fns) {
        for (double b : fn->breakpoints()) {
            if (b >= 0.0 && b <= T) {
                out.push_back(b);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace dunkl
