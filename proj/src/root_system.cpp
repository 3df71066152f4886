#include "dunkl/root_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dunkl {

RootSystem::RootSystem(Eigen::MatrixXd roots, std::vector<int> orbit_of_root)
    : roots_(std::move(roots)), orbit_of_root_(std::move(orbit_of_root)) {
    if (roots_.rows() < 1) {
        throw DimensionError("root system: ambient dimension must be positive");
    }
    if (roots_.cols() < 1) {
        throw ParameterError("root system: at least one positive root is required");
    }
    if (static_cast<Eigen::Index>(orbit_of_root_.size()) != roots_.cols()) {
        throw DimensionError("root system: one orbit label per root is required");
    }
    norms_sq_ = roots_.colwise().squaredNorm().transpose();
    for (Eigen::Index i = 0; i < norms_sq_.size(); ++i) {
        if (!(norms_sq_[i] > 0.0) || !std::isfinite(norms_sq_[i])) {
            throw ParameterError("root system: root " + std::to_string(i) + " is zero or not finite");
        }
    }
    const int max_label = *std::max_element(orbit_of_root_.begin(), orbit_of_root_.end());
    if (*std::min_element(orbit_of_root_.begin(), orbit_of_root_.end()) < 0) {
        throw ParameterError("root system: orbit labels must be non-negative");
    }
    std::vector<int> counts(static_cast<std::size_t>(max_label) + 1, 0);
    for (int label : orbit_of_root_) {
        ++counts[static_cast<std::size_t>(label)];
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) {
            throw ParameterError("root system: orbit class " + std::to_string(c) + " is empty");
        }
    }
    orbit_count_ = max_label + 1;
}

std::vector<std::vector<int>> RootSystem::orbit_classes() const {
    std::vector<std::vector<int>> classes(static_cast<std::size_t>(orbit_count_));
    for (int i = 0; i < size(); ++i) {
        classes[static_cast<std::size_t>(orbit(i))].push_back(i);
    }
    return classes;
}

Eigen::VectorXd RootSystem::per_root(const Eigen::VectorXd& orbit_values) const {
    if (orbit_values.size() != orbit_count_) {
        throw DimensionError("root system: expected one value per orbit class");
    }
    Eigen::VectorXd out(size());
    for (int i = 0; i < size(); ++i) {
        out[i] = orbit_values[orbit(i)];
    }
    return out;
}

RootSystem make_type_A(int d) {
    if (d < 2) {
        throw DimensionError("type A root system needs d >= 2");
    }
    const int m = d * (d - 1) / 2;
    Eigen::MatrixXd roots = Eigen::MatrixXd::Zero(d, m);
    int col = 0;
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            roots(i, col) = 1.0;
            roots(j, col) = -1.0;
            ++col;
        }
    }
    return RootSystem(std::move(roots), std::vector<int>(static_cast<std::size_t>(m), 0));
}

RootSystem make_type_B(int d) {
    if (d < 2) {
        throw DimensionError("type B root system needs d >= 2");
    }
    const int long_roots = d * (d - 1);
    Eigen::MatrixXd roots = Eigen::MatrixXd::Zero(d, long_roots + d);
    std::vector<int> orbits;
    orbits.reserve(static_cast<std::size_t>(long_roots + d));
    int col = 0;
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            roots(i, col) = 1.0;
            roots(j, col) = -1.0;
            orbits.push_back(0);
            ++col;
            roots(i, col) = 1.0;
            roots(j, col) = 1.0;
            orbits.push_back(0);
            ++col;
        }
    }
    for (int i = 0; i < d; ++i) {
        roots(i, col++) = 1.0;
        orbits.push_back(1);
    }
    return RootSystem(std::move(roots), std::move(orbits));
}

RootSystem direct_sum(const RootSystem& a, const RootSystem& b) {
    const int d = a.dim() + b.dim();
    Eigen::MatrixXd roots = Eigen::MatrixXd::Zero(d, a.size() + b.size());
    roots.topLeftCorner(a.dim(), a.size()) = a.roots();
    roots.bottomRightCorner(b.dim(), b.size()) = b.roots();
    std::vector<int> orbits = a.orbit_labels();
    for (int label : b.orbit_labels()) {
        orbits.push_back(label + a.orbit_count());
    }
    return RootSystem(std::move(roots), std::move(orbits));
}

AxiomReport validate_axioms(const RootSystem& rs, double tol) {
    if (!(tol > 0.0)) {
        throw ParameterError("validate_axioms: tolerance must be positive");
    }
    AxiomReport report;
    const Eigen::MatrixXd& R = rs.roots();
    const Eigen::VectorXd& nsq = rs.norms_squared();
    const int m = rs.size();

    for (int i = 0; i < m; ++i) {
        if (!(nsq[i] > 0.0)) {
            report.nonzero = false;
        }
    }

    // Collinear iff Cauchy-Schwarz is an equality.
    const Eigen::MatrixXd gram = R.transpose() * R;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            const double lhs = gram(i, j) * gram(i, j);
            const double rhs = nsq[i] * nsq[j];
            if (lhs >= rhs * (1.0 - 1e-14)) {
                report.r1 = false;
            }
        }
    }

    // s_{-a} = s_a and s_a(-b) = -s_a(b), so positive pairs suffice once the
    // image is matched against R+ u -R+.
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const Eigen::VectorXd image = reflect(R.col(i), R.col(j));
            double nearest = std::numeric_limits<double>::infinity();
            for (int k = 0; k < m; ++k) {
                nearest = std::min(nearest, (image - R.col(k)).norm());
                nearest = std::min(nearest, (image + R.col(k)).norm());
            }
            report.worst_r2_residual = std::max(report.worst_r2_residual, nearest);
            const double defect = std::abs(image.norm() - std::sqrt(nsq[j])) / std::sqrt(nsq[j]);
            report.worst_norm_defect = std::max(report.worst_norm_defect, defect);
        }
    }
    report.r2 = report.worst_r2_residual <= tol;
    return report;
}

double pairing_identity_residual(const RootSystem& rs, const Eigen::VectorXd& orbit_k,
                                 const Eigen::VectorXd& x) {
    const Eigen::VectorXd p = pairings(rs, x);
    if (!(p.minCoeff() > 0.0)) {
        throw DomainError("pairing_identity_residual: point is not inside the chamber");
    }
    const Eigen::VectorXd k = rs.per_root(orbit_k);
    const Eigen::ArrayXd inv = p.array().inverse();
    const double lhs = (k.array() * rs.norms_squared().array() * inv.square()).sum();
    // sum_{a,b} k_b <a,b> / (<a,x><b,x>) = u^T G v with u = 1/p, v = k/p.
    const Eigen::MatrixXd gram = rs.roots().transpose() * rs.roots();
    const Eigen::VectorXd u = inv.matrix();
    const Eigen::VectorXd v = (k.array() * inv).matrix();
    const double rhs = u.dot(gram * v);
    return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

Eigen::VectorXd interior_direction(const RootSystem& rs) {
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(rs.dim());
    for (int i = 0; i < rs.size(); ++i) {
        dir += rs.root(i) / std::sqrt(rs.norms_squared()[i]);
    }
    return dir;
}

bool fold_into_chamber(const RootSystem& rs, Eigen::VectorXd& x, int max_reflections) {
    if (x.size() != rs.dim()) {
        throw DimensionError("fold_into_chamber: point dimension does not match root system");
    }
    for (int step = 0; step < max_reflections; ++step) {
        const Eigen::VectorXd p = pairings(rs, x);
        Eigen::Index worst = 0;
        if (p.minCoeff(&worst) >= 0.0) {
            return true;
        }
        x = reflect(rs.root(static_cast<int>(worst)), x);
    }
    return false;
}

}  // namespace dunkl
