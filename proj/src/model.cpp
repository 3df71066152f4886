#include "dunkl/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dunkl/errors.hpp"

namespace dunkl {

ModelSpec::ModelSpec(RootSystem rs, double T, Eigen::VectorXd xi, Diffusion sigma, Drift drift,
                     std::vector<TimeFn> k)
    : rs_(std::move(rs)),
      T_(T),
      xi_(std::move(xi)),
      sigma_(std::move(sigma)),
      drift_(std::move(drift)),
      k_(std::move(k)) {
    if (!(T_ > 0.0) || !std::isfinite(T_)) {
        throw ParameterError("model: horizon T must be positive and finite");
    }
    if (xi_.size() != rs_.dim()) {
        throw DimensionError("model: initial point has wrong dimension");
    }
    if (!(min_pairing(rs_, xi_) > 0.0)) {
        throw DomainError("model: initial point is not strictly inside the Weyl chamber");
    }
    if (sigma_.rows() != rs_.dim()) {
        throw DimensionError("model: diffusion coefficient must have d rows");
    }
    if (auto bd = drift_.dim(); bd && *bd != rs_.dim()) {
        throw DimensionError("model: drift coefficient has wrong dimension");
    }
    if (static_cast<int>(k_.size()) != rs_.orbit_count()) {
        throw DimensionError("model: need one multiplicity function per orbit class");
    }
    for (std::size_t o = 0; o < k_.size(); ++o) {
        if (!k_[o].covers(T_)) {
            throw ParameterError("model: tabulated multiplicity does not cover [0, T]");
        }
        if (!(k_[o].inf(T_) > 0.0)) {
            throw ParameterError("model: multiplicity of orbit " + std::to_string(o) +
                                 " must be strictly positive on [0, T]");
        }
    }
    for (const TimeFn* f : sigma_.time_functions()) {
        if (!f->covers(T_)) {
            throw ParameterError("model: tabulated diffusion entry does not cover [0, T]");
        }
    }
    for (const TimeFn* f : drift_.time_functions()) {
        if (!f->covers(T_)) {
            throw ParameterError("model: tabulated drift coefficient does not cover [0, T]");
        }
    }
    if (!std::isfinite(sigma_.lipschitz()) || !std::isfinite(drift_.lipschitz(T_))) {
        throw ParameterError("model: Lipschitz constants must be finite");
    }
}

Eigen::VectorXd ModelSpec::orbit_k(double t) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(k_.size()));
    for (std::size_t o = 0; o < k_.size(); ++o) {
        out[static_cast<Eigen::Index>(o)] = k_[o](t);
    }
    return out;
}

void ModelSpec::root_k(double t, Eigen::VectorXd& out) const {
    out.resize(rs_.size());
    if (k_.size() == 1) {
        out.setConstant(k_[0](t));
        return;
    }
    double values[16];
    const bool small = k_.size() <= 16;
    std::vector<double> big;
    if (!small) {
        big.resize(k_.size());
    }
    double* v = small ? values : big.data();
    for (std::size_t o = 0; o < k_.size(); ++o) {
        v[o] = k_[o](t);
    }
    for (int i = 0; i < rs_.size(); ++i) {
        out[i] = v[rs_.orbit(i)];
    }
}

double ModelSpec::k_sup(int orbit) const { return k_.at(static_cast<std::size_t>(orbit)).sup_abs(T_); }

std::vector<const TimeFn*> ModelSpec::time_functions() const {
    std::vector<const TimeFn*> out = sigma_.time_functions();
    for (const TimeFn* f : drift_.time_functions()) {
        out.push_back(f);
    }
    for (const TimeFn& f : k_) {
        out.push_back(&f);
    }
    return out;
}

double g_eps(double eps, double s) {
    if (!(eps > 0.0)) {
        throw ParameterError("g_eps: eps must be positive");
    }
    return 1.0 / std::max(eps, s);
}

Eigen::VectorXd f_k(const ModelSpec& m, double t, const Eigen::VectorXd& x) {
    if (!(min_pairing(m.roots(), x) > 0.0)) {
        throw DomainError("f_k: point is not strictly inside the Weyl chamber");
    }
    Eigen::VectorXd w;
    m.root_k(t, w);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m.dim());
    add_singular_drift(m.roots(), w, x, out);
    return out;
}

Eigen::VectorXd f_k_eps(const ModelSpec& m, double t, const Eigen::VectorXd& x, double eps) {
    if (!(eps > 0.0)) {
        throw ParameterError("f_k_eps: eps must be positive");
    }
    if (x.size() != m.dim()) {
        throw DimensionError("f_k_eps: point dimension does not match model");
    }
    Eigen::VectorXd w;
    m.root_k(t, w);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m.dim());
    add_truncated_drift(m.roots(), w, x, eps, out);
    return out;
}

double L_k(const ModelSpec& m) {
    const RootSystem& rs = m.roots();
    double total = 0.0;
    for (int i = 0; i < rs.size(); ++i) {
        total += m.k_sup(rs.orbit(i)) * rs.norms_squared()[i];
    }
    return total;
}

double sigma_bar(const ModelSpec& m, double t, const Eigen::VectorXd& x) { return m.sigma().sigma_bar(t, x); }

double p_star(const ModelSpec& m) {
    const std::vector<double> lattice = time_lattice(m.horizon(), kTimeLatticePoints, m.time_functions());
    double best = std::numeric_limits<double>::infinity();
    for (double t : lattice) {
        const double s = m.sigma().sigma_bar_sup(t);
        if (s == 0.0) {
            continue;
        }
        const double kmin = m.orbit_k(t).minCoeff();
        best = std::min(best, 2.0 * kmin / (s * s) - 1.0);
    }
    return best;
}

const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass:
            return "pass";
        case CheckStatus::fail:
            return "fail";
        case CheckStatus::sampled_pass:
            return "sampled-pass";
    }
    return "unknown";
}

bool AssumptionReport::all_passed() const {
    return std::none_of(conditions.begin(), conditions.end(),
                        [](const ConditionCheck& c) { return c.status == CheckStatus::fail; });
}

std::vector<Eigen::VectorXd> sample_chamber_points(const RootSystem& rs, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> log_dist(std::log(1e-3), std::log(1e1));
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(count));
    int attempts = 0;
    while (static_cast<int>(out.size()) < count) {
        if (++attempts > 100 * count + 1000) {
            throw DomainError("sample_chamber_points: could not generate interior points");
        }
        Eigen::VectorXd x(rs.dim());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            x[i] = normal(rng);
        }
        if (!fold_into_chamber(rs, x)) {
            continue;
        }
        const double wall = min_pairing(rs, x);
        if (!(wall > 1e-12)) {
            continue;
        }
        x *= std::exp(log_dist(rng)) / wall;
        if (min_pairing(rs, x) > 0.0) {
            out.push_back(std::move(x));
        }
    }
    return out;
}

AssumptionReport validate_assumptions(const ModelSpec& m, int sample_count, double tol, std::uint64_t seed) {
    if (sample_count < 1) {
        throw ParameterError("validate_assumptions: sample_count must be at least 1");
    }
    if (!(tol > 0.0)) {
        throw ParameterError("validate_assumptions: tolerance must be positive");
    }
    AssumptionReport report;
    const RootSystem& rs = m.roots();
    const double T = m.horizon();
    const std::vector<double> lattice = time_lattice(T, kTimeLatticePoints, m.time_functions());

    // (i) b Lipschitz with bounded b(., 0)
    {
        ConditionCheck& c = report.conditions[0];
        const double lip = m.drift().lipschitz(T);
        double at_zero = 0.0;
        const Eigen::VectorXd origin = Eigen::VectorXd::Zero(m.dim());
        for (double t : lattice) {
            at_zero = std::max(at_zero, m.drift()(t, origin).norm());
        }
        c.status = std::isfinite(lip) && std::isfinite(at_zero) ? CheckStatus::pass : CheckStatus::fail;
        c.note = "Lipschitz constant " + std::to_string(lip);
    }
    // (ii) sigma Lipschitz
    {
        ConditionCheck& c = report.conditions[1];
        const double lip = m.sigma().lipschitz();
        c.status = std::isfinite(lip) ? CheckStatus::pass : CheckStatus::fail;
        c.note = "Lipschitz constant " + std::to_string(lip);
    }
    // (iii) ||sigma_bar(t, .)||^2 <= 2 k(t, a)
    {
        ConditionCheck& c = report.conditions[2];
        double worst = -std::numeric_limits<double>::infinity();
        for (double t : lattice) {
            const double s = m.sigma().sigma_bar_sup(t);
            worst = std::max(worst, s * s - 2.0 * m.orbit_k(t).minCoeff());
        }
        c.samples = static_cast<int>(lattice.size());
        c.worst_violation = std::max(worst, 0.0);
        c.status = worst <= tol ? CheckStatus::pass : CheckStatus::fail;
        report.p_star_conservative = !m.sigma().sup_bound_exact();
        if (report.p_star_conservative) {
            c.note = "uses declared sup bound";
        }
    }
    const std::vector<Eigen::VectorXd> points = [&] {
        std::vector<Eigen::VectorXd> pts = sample_chamber_points(rs, sample_count, seed);
        pts.front() = m.xi();
        return pts;
    }();
    std::mt19937_64 time_rng(seed ^ 0x5bd1e995u);
    std::uniform_int_distribution<std::size_t> pick_time(0, lattice.size() - 1);
    // (iv) sup <a, -b(t,x)> / <a,x> <= K(t)
    {
        ConditionCheck& c = report.conditions[3];
        bool exact = true;
        double kmax = 0.0;
        for (double t : lattice) {
            auto bound = m.drift().wall_condition_bound(rs, t);
            if (!bound) {
                exact = false;
                break;
            }
            kmax = std::max(kmax, *bound);
        }
        if (exact) {
            c.samples = static_cast<int>(lattice.size());
            c.status = std::isfinite(kmax) ? CheckStatus::pass : CheckStatus::fail;
            c.worst_violation = std::isfinite(kmax) ? 0.0 : kmax;
        } else {
            kmax = 0.0;
            for (const Eigen::VectorXd& x : points) {
                const double t = lattice[pick_time(time_rng)];
                const Eigen::VectorXd b = m.drift()(t, x);
                const Eigen::VectorXd num = -(rs.roots().transpose() * b);
                const Eigen::VectorXd den = rs.roots().transpose() * x;
                kmax = std::max(kmax, (num.array() / den.array()).maxCoeff());
            }
            c.samples = static_cast<int>(points.size());
            c.status = std::isfinite(kmax) ? CheckStatus::sampled_pass : CheckStatus::fail;
            c.note = "sampled maximum ratio";
        }
        report.k_bound = kmax;
    }
    // (v) pairing identity with the orbit values of k
    {
        ConditionCheck& c = report.conditions[4];
        double worst = 0.0;
        for (const Eigen::VectorXd& x : points) {
            const double t = lattice[pick_time(time_rng)];
            worst = std::max(worst, pairing_identity_residual(rs, m.orbit_k(t), x));
        }
        c.samples = static_cast<int>(points.size());
        c.worst_violation = worst;
        c.status = worst <= tol ? CheckStatus::sampled_pass : CheckStatus::fail;
    }
    return report;
}

ModelSpec preset_bessel(std::vector<TimeFn> sigma_row, const TimeFn& lambda, const TimeFn& k, double xi,
                        double T) {
    if (!(xi > 0.0)) {
        throw DomainError("bessel preset: initial point must be positive");
    }
    RootSystem rs(Eigen::MatrixXd::Ones(1, 1), {0});
    Eigen::VectorXd x0(1);
    x0[0] = xi;
    return ModelSpec(std::move(rs), T, std::move(x0), Diffusion::row(std::move(sigma_row)), Drift::linear(lambda),
                     {k});
}

ModelSpec preset_dyson_A(int d, const TimeFn& k, Diffusion sigma, Drift b, Eigen::VectorXd xi, double T) {
    return ModelSpec(make_type_A(d), T, std::move(xi), std::move(sigma), std::move(b), {k});
}

ModelSpec preset_type_B(int d, const TimeFn& k1, const TimeFn& k2, const TimeFn& sigma, const TimeFn& lambda,
                        Eigen::VectorXd xi, double T) {
    return ModelSpec(make_type_B(d), T, std::move(xi), Diffusion::scalar(sigma, d), Drift::linear(lambda),
                     {k1, k2});
}

}  // namespace dunkl
