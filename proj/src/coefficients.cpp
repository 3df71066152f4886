#include "dunkl/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dunkl/errors.hpp"

namespace dunkl {

namespace {

Diffusion::TimeMatrix make_time_matrix(int rows, int cols, std::vector<TimeFn> entries) {
    if (rows < 1 || cols < 1) {
        throw DimensionError("diffusion: matrix must have positive size");
    }
    if (static_cast<int>(entries.size()) != rows * cols) {
        throw DimensionError("diffusion: expected rows*cols entries");
    }
    bool diagonal = rows == cols;
    for (int i = 0; i < rows && diagonal; ++i) {
        for (int j = 0; j < cols; ++j) {
            if (i != j && !entries[static_cast<std::size_t>(i * cols + j)].is_zero()) {
                diagonal = false;
                break;
            }
        }
    }
    return {rows, cols, std::move(entries), diagonal};
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Diffusion Diffusion::scalar(const TimeFn& s, int d) {
    std::vector<TimeFn> entries(static_cast<std::size_t>(d * d), TimeFn::constant(0.0));
    for (int i = 0; i < d; ++i) {
        entries[static_cast<std::size_t>(i * d + i)] = s;
    }
    return Diffusion(make_time_matrix(d, d, std::move(entries)));
}

Diffusion Diffusion::diagonal(std::vector<TimeFn> diag) {
    const int d = static_cast<int>(diag.size());
    std::vector<TimeFn> entries(static_cast<std::size_t>(d * d), TimeFn::constant(0.0));
    for (int i = 0; i < d; ++i) {
        entries[static_cast<std::size_t>(i * d + i)] = diag[static_cast<std::size_t>(i)];
    }
    return Diffusion(make_time_matrix(d, d, std::move(entries)));
}

Diffusion Diffusion::matrix(const Eigen::MatrixXd& m) {
    std::vector<TimeFn> entries;
    entries.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            entries.push_back(TimeFn::constant(m(i, j)));
        }
    }
    return Diffusion(make_time_matrix(static_cast<int>(m.rows()), static_cast<int>(m.cols()),
                                      std::move(entries)));
}

Diffusion Diffusion::time_matrix(int rows, int cols, std::vector<TimeFn> entries) {
    return Diffusion(make_time_matrix(rows, cols, std::move(entries)));
}

Diffusion Diffusion::row(std::vector<TimeFn> entries) {
    const int r = static_cast<int>(entries.size());
    return Diffusion(make_time_matrix(1, r, std::move(entries)));
}

Diffusion Diffusion::linear_clamped(Eigen::VectorXd a, Eigen::VectorXd b, double lo, double hi) {
    if (a.size() != b.size() || a.size() < 1) {
        throw DimensionError("diffusion: linear-clamped form needs equal-length a and b");
    }
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw ParameterError("diffusion: linear-clamped form needs finite lo <= hi");
    }
    return Diffusion(LinearClamped{std::move(a), std::move(b), lo, hi});
}

Diffusion Diffusion::custom(Custom form) {
    if (!form.fn) {
        throw ParameterError("diffusion: custom form needs a callable");
    }
    if (!std::isfinite(form.lipschitz) || !std::isfinite(form.sup_bound) || form.sup_bound < 0.0) {
        throw ParameterError("diffusion: custom form needs finite Lipschitz and sup bounds");
    }
    return Diffusion(std::move(form));
}

int Diffusion::rows() const {
    return std::visit(overloaded{[](const TimeMatrix& m) { return m.rows; },
                                 [](const LinearClamped& m) { return static_cast<int>(m.a.size()); },
                                 [](const Custom& m) { return m.rows; }},
                      form_);
}

int Diffusion::cols() const {
    return std::visit(overloaded{[](const TimeMatrix& m) { return m.cols; },
                                 [](const LinearClamped& m) { return static_cast<int>(m.a.size()); },
                                 [](const Custom& m) { return m.cols; }},
                      form_);
}

void Diffusion::evaluate(double t, const Eigen::VectorXd& x, Eigen::MatrixXd& out) const {
    out.resize(rows(), cols());
    std::visit(overloaded{[&](const TimeMatrix& m) {
                              for (int i = 0; i < m.rows; ++i) {
                                  for (int j = 0; j < m.cols; ++j) {
                                      out(i, j) = m.entries[static_cast<std::size_t>(i * m.cols + j)](t);
                                  }
                              }
                          },
                          [&](const LinearClamped& m) {
                              out.setZero();
                              for (Eigen::Index i = 0; i < m.a.size(); ++i) {
                                  out(i, i) = m.a[i] + m.b[i] * std::clamp(x[i], m.lo, m.hi);
                              }
                          },
                          [&](const Custom& m) {
                              out = m.fn(t, x);
                              if (out.rows() != m.rows || out.cols() != m.cols) {
                                  throw DimensionError("diffusion: custom callable returned wrong shape");
                              }
                          }},
               form_);
}

Eigen::MatrixXd Diffusion::operator()(double t, const Eigen::VectorXd& x) const {
    Eigen::MatrixXd out;
    evaluate(t, x, out);
    return out;
}

void Diffusion::apply(double t, const Eigen::VectorXd& x, const Eigen::Ref<const Eigen::VectorXd>& dB,
                      Eigen::VectorXd& out) const {
    out.resize(rows());
    if (const auto* m = std::get_if<TimeMatrix>(&form_)) {
        if (m->diagonal) {
            for (int i = 0; i < m->rows; ++i) {
                out[i] = m->entries[static_cast<std::size_t>(i * m->cols + i)](t) * dB[i];
            }
            return;
        }
        for (int i = 0; i < m->rows; ++i) {
            double acc = 0.0;
            for (int j = 0; j < m->cols; ++j) {
                acc += m->entries[static_cast<std::size_t>(i * m->cols + j)](t) * dB[j];
            }
            out[i] = acc;
        }
        return;
    }
    if (const auto* m = std::get_if<LinearClamped>(&form_)) {
        for (Eigen::Index i = 0; i < m->a.size(); ++i) {
            out[i] = (m->a[i] + m->b[i] * std::clamp(x[i], m->lo, m->hi)) * dB[i];
        }
        return;
    }
    Eigen::MatrixXd s;
    evaluate(t, x, s);
    out.noalias() = s * dB;
}

double Diffusion::sigma_bar(double t, const Eigen::VectorXd& x) const {
    const Eigen::MatrixXd s = (*this)(t, x);
    bool diag = s.rows() == s.cols();
    if (const auto* m = std::get_if<TimeMatrix>(&form_)) {
        diag = m->diagonal;
    } else if (std::holds_alternative<LinearClamped>(form_)) {
        diag = true;
    } else if (const auto* c = std::get_if<Custom>(&form_)) {
        diag = c->diagonal;
    }
    if (diag) {
        return s.diagonal().cwiseAbs().maxCoeff();
    }
    return s.norm();
}

double Diffusion::sigma_bar_sup(double t) const {
    return std::visit(
        overloaded{[&](const TimeMatrix& m) {
                       const Eigen::VectorXd origin = Eigen::VectorXd::Zero(m.rows);
                       return sigma_bar(t, origin);
                   },
                   [](const LinearClamped& m) {
                       const Eigen::ArrayXd low = (m.a.array() + m.b.array() * m.lo).abs();
                       const Eigen::ArrayXd high = (m.a.array() + m.b.array() * m.hi).abs();
                       return low.max(high).maxCoeff();
                   },
                   [](const Custom& m) { return m.sup_bound; }},
        form_);
}

bool Diffusion::sup_bound_exact() const { return !std::holds_alternative<Custom>(form_); }

double Diffusion::lipschitz() const {
    return std::visit(overloaded{[](const TimeMatrix&) { return 0.0; },
                                 [](const LinearClamped& m) { return m.b.cwiseAbs().maxCoeff(); },
                                 [](const Custom& m) { return m.lipschitz; }},
                      form_);
}

bool Diffusion::is_zero() const {
    if (const auto* m = std::get_if<TimeMatrix>(&form_)) {
        return std::all_of(m->entries.begin(), m->entries.end(), [](const TimeFn& f) { return f.is_zero(); });
    }
    if (const auto* m = std::get_if<LinearClamped>(&form_)) {
        return m->a.isZero(0.0) && m->b.isZero(0.0);
    }
    return false;
}

std::vector<const TimeFn*> Diffusion::time_functions() const {
    std::vector<const TimeFn*> out;
    if (const auto* m = std::get_if<TimeMatrix>(&form_)) {
        for (const TimeFn& f : m->entries) {
            out.push_back(&f);
        }
    }
    return out;
}

Drift Drift::affine(Eigen::MatrixXd A, Eigen::VectorXd v) {
    if (A.rows() != A.cols() || A.rows() != v.size()) {
        throw DimensionError("drift: affine form needs square A matching v");
    }
    return Drift(Affine{std::move(A), std::move(v)});
}

Drift Drift::custom(Custom form) {
    if (!form.fn) {
        throw ParameterError("drift: custom form needs a callable");
    }
    if (!std::isfinite(form.lipschitz) || form.lipschitz < 0.0) {
        throw ParameterError("drift: custom form needs a finite Lipschitz constant");
    }
    return Drift(std::move(form));
}

void Drift::accumulate(double t, const Eigen::VectorXd& x, double scale, Eigen::VectorXd& out) const {
    std::visit(overloaded{[](const Zero&) {},
                          [&](const Linear& f) { out += (scale * f.lambda(t)) * x; },
                          [&](const Constant& f) { out += scale * f.v; },
                          [&](const Affine& f) {
                              out.noalias() += scale * (f.A * x);
                              out += scale * f.v;
                          },
                          [&](const Custom& f) { out += scale * f.fn(t, x); }},
               form_);
}

Eigen::VectorXd Drift::operator()(double t, const Eigen::VectorXd& x) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
    accumulate(t, x, 1.0, out);
    return out;
}

double Drift::lipschitz(double T) const {
    return std::visit(overloaded{[](const Zero&) { return 0.0; },
                                 [&](const Linear& f) { return f.lambda.sup_abs(T); },
                                 [](const Constant&) { return 0.0; },
                                 [](const Affine& f) {
                                     Eigen::JacobiSVD<Eigen::MatrixXd> svd(f.A);
                                     return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
                                 },
                                 [](const Custom& f) { return f.lipschitz; }},
                      form_);
}

std::optional<double> Drift::wall_condition_bound(const RootSystem& rs, double t) const {
    return std::visit(
        overloaded{[](const Zero&) -> std::optional<double> { return 0.0; },
                   // <a, -l x> / <a, x> = -l
                   [&](const Linear& f) -> std::optional<double> { return std::max(-f.lambda(t), 0.0); },
                   [&](const Constant& f) -> std::optional<double> {
                       const double worst = (rs.roots().transpose() * f.v).minCoeff();
                       if (worst >= 0.0) {
                           return 0.0;
                       }
                       return std::numeric_limits<double>::infinity();
                   },
                   [](const Affine&) -> std::optional<double> { return std::nullopt; },
                   [](const Custom&) -> std::optional<double> { return std::nullopt; }},
        form_);
}

std::optional<int> Drift::dim() const {
    if (const auto* f = std::get_if<Constant>(&form_)) {
        return static_cast<int>(f->v.size());
    }
    if (const auto* f = std::get_if<Affine>(&form_)) {
        return static_cast<int>(f->v.size());
    }
    return std::nullopt;
}

std::vector<const TimeFn*> Drift::time_functions() const {
    if (const auto* f = std::get_if<Linear>(&form_)) {
        return {&f->lambda};
    }
    return {};
}

}  // namespace dunkl
