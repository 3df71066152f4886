#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "dunkl/errors.hpp"
#include "dunkl/model.hpp"

using namespace dunkl;

namespace {

ModelSpec dyson(int d, double k, double sigma, Eigen::VectorXd xi) {
    return preset_dyson_A(d, TimeFn::constant(k), Diffusion::scalar(TimeFn::constant(sigma), d), Drift::zero(),
                          std::move(xi), 1.0);
}

ModelSpec bessel(double k, double xi = 1.0, double sigma = 1.0) {
    return preset_bessel({TimeFn::constant(sigma)}, TimeFn::constant(0.0), TimeFn::constant(k), xi, 1.0);
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double e : v) {
        x[i++] = e;
    }
    return x;
}

}  // namespace

TEST(GEps, Branches) {
    EXPECT_DOUBLE_EQ(g_eps(0.5, 0.2), 2.0);
    EXPECT_DOUBLE_EQ(g_eps(0.5, 4.0), 0.25);
    EXPECT_DOUBLE_EQ(g_eps(0.5, -3.0), 2.0);
    EXPECT_THROW(g_eps(0.0, 1.0), ParameterError);
    EXPECT_THROW(g_eps(-1.0, 1.0), ParameterError);
}

TEST(GEps, LipschitzWithInverseSquare) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 10000; ++i) {
        const double x = u(rng), y = u(rng);
        EXPECT_LE(std::abs(g_eps(0.5, x) - g_eps(0.5, y)), 4.0 * std::abs(x - y) * (1.0 + 1e-12));
    }
}

TEST(SingularDrift, RankOneValue) {
    const ModelSpec m = bessel(1.0);
    EXPECT_DOUBLE_EQ(f_k(m, 0.0, vec({2.0}))[0], 0.5);
}

TEST(SingularDrift, TypeA2Value) {
    const ModelSpec m = dyson(2, 1.0, 1.0, vec({0.5, -0.5}));
    const Eigen::VectorXd f = f_k(m, 0.0, vec({1.0, -1.0}));
    EXPECT_DOUBLE_EQ(f[0], 0.5);
    EXPECT_DOUBLE_EQ(f[1], -0.5);
}

TEST(SingularDrift, TypeA3MatchesTermByTermLoop) {
    const ModelSpec m = dyson(3, 1.0, 1.0, vec({1.0, 0.0, -1.0}));
    const Eigen::VectorXd x = vec({3.0, 2.0, 0.0});
    Eigen::VectorXd brute = Eigen::VectorXd::Zero(3);
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            const double p = x[i] - x[j];
            brute[i] += 1.0 / p;
            brute[j] -= 1.0 / p;
        }
    }
    EXPECT_TRUE(f_k(m, 0.0, x).isApprox(brute, 1e-15));
}

TEST(SingularDrift, OutsideChamberThrows) {
    const ModelSpec m = dyson(2, 1.0, 1.0, vec({0.5, -0.5}));
    EXPECT_THROW(f_k(m, 0.0, vec({1.0, 1.0})), DomainError);
    EXPECT_THROW(f_k(m, 0.0, vec({-1.0, 1.0})), DomainError);
}

TEST(TruncatedDrift, AgreesAwayFromWalls) {
    const ModelSpec m = preset_type_B(3, TimeFn::constant(2.0), TimeFn::constant(0.5), TimeFn::constant(1.0),
                                      TimeFn::constant(0.0), vec({3.0, 2.0, 1.0}), 1.0);
    const Eigen::VectorXd x = vec({3.0, 2.0, 1.0});
    EXPECT_TRUE(f_k_eps(m, 0.0, x, 0.5).isApprox(f_k(m, 0.0, x), 1e-15));
}

TEST(TruncatedDrift, ClampedBranch) {
    const ModelSpec m = bessel(1.0);
    EXPECT_DOUBLE_EQ(f_k_eps(m, 0.0, vec({-3.0}), 0.5)[0], 2.0);
}

namespace {

/// Chamber points of B(3) with wall distances spread over several decades.
std::vector<Eigen::VectorXd> chamber_samples(const RootSystem& rs, int count) {
    return sample_chamber_points(rs, count, 99);
}

}  // namespace

TEST(TruncatedDrift, TruncationErrorBound) {
    const ModelSpec m = preset_type_B(3, TimeFn::constant(2.0), TimeFn::constant(0.5), TimeFn::constant(1.0),
                                      TimeFn::constant(0.0), vec({3.0, 2.0, 1.0}), 1.0);
    const RootSystem& rs = m.roots();
    const Eigen::VectorXd kr = rs.per_root(m.orbit_k(0.0));
    for (double eps : {1e-3, 1e-2, 0.3}) {
        for (const auto& x : chamber_samples(rs, 300)) {
            const Eigen::VectorXd p = rs.roots().transpose() * x;
            double bound = 0.0;
            for (int a = 0; a < rs.size(); ++a) {
                bound += kr[a] * rs.root(a).norm() / (p[a] * p[a]);
            }
            bound *= eps;
            const double err = (f_k(m, 0.0, x) - f_k_eps(m, 0.0, x, eps)).norm();
            EXPECT_LE(err, bound * (1.0 + 1e-12) + 1e-300);
        }
    }
}

TEST(TruncatedDrift, GlobalLipschitzAndMonotone) {
    const ModelSpec m = preset_type_B(3, TimeFn::constant(2.0), TimeFn::constant(0.5), TimeFn::constant(1.0),
                                      TimeFn::constant(0.0), vec({3.0, 2.0, 1.0}), 1.0);
    const double lk = L_k(m);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    for (double eps : {0.05, 0.5}) {
        for (int i = 0; i < 2000; ++i) {
            Eigen::VectorXd x(3), y(3);
            for (int j = 0; j < 3; ++j) {
                x[j] = g(rng);
                y[j] = x[j] + 0.1 * g(rng);
            }
            const Eigen::VectorXd fx = f_k_eps(m, 0.0, x, eps);
            const Eigen::VectorXd fy = f_k_eps(m, 0.0, y, eps);
            const double dist = (x - y).norm();
            EXPECT_LE((fx - fy).norm(), lk / (eps * eps) * dist * (1.0 + 1e-12));
            EXPECT_LE((x - y).dot(fx - fy), 1e-12 * (fx - fy).norm() * dist);
            EXPECT_LE(x.dot(fx), 2.0 * 2 * 3 + 0.5 * 3 + 1e-12);
        }
    }
}

TEST(SingularDrift, MonotoneOnChamberPairs) {
    const ModelSpec m = dyson(4, 1.5, 1.0, vec({3.0, 2.0, 1.0, 0.0}));
    const auto pts = chamber_samples(m.roots(), 200);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Eigen::VectorXd& x = pts[i];
        const Eigen::VectorXd& y = pts[i + 1];
        const Eigen::VectorXd df = f_k(m, 0.0, x) - f_k(m, 0.0, y);
        EXPECT_LE((x - y).dot(df), 1e-10 * df.norm() * (x - y).norm());
    }
}

TEST(Constants, LkExamples) {
    EXPECT_DOUBLE_EQ(L_k(dyson(3, 1.0, 1.0, vec({1.0, 0.0, -1.0}))), 6.0);
    const ModelSpec b = preset_type_B(2, TimeFn::constant(1.0), TimeFn::constant(2.0), TimeFn::constant(1.0),
                                      TimeFn::constant(0.0), vec({2.0, 1.0}), 1.0);
    EXPECT_DOUBLE_EQ(L_k(b), 8.0);
    EXPECT_DOUBLE_EQ(L_k(dyson(3, 2.0, 1.0, vec({1.0, 0.0, -1.0}))), 12.0);
}

TEST(Constants, LkUsesSupOfTimeDependentK) {
    const ModelSpec m = preset_dyson_A(2, TimeFn::affine_sqrt(1.0, 2.0), Diffusion::scalar(TimeFn::constant(1.0), 2),
                                       Drift::zero(), vec({0.5, -0.5}), 4.0);
    EXPECT_DOUBLE_EQ(L_k(m), 2.0 * 5.0);
}

TEST(Constants, SigmaBarExamples) {
    const ModelSpec id = dyson(2, 4.0, 1.0, vec({0.5, -0.5}));
    EXPECT_DOUBLE_EQ(sigma_bar(id, 0.0, vec({0.5, -0.5})), 1.0);
    const ModelSpec full = preset_dyson_A(2, TimeFn::constant(4.0), Diffusion::matrix(Eigen::MatrixXd::Ones(2, 2)),
                                          Drift::zero(), vec({0.5, -0.5}), 1.0);
    EXPECT_DOUBLE_EQ(sigma_bar(full, 0.0, vec({0.5, -0.5})), 2.0);
    const ModelSpec diag = preset_dyson_A(2, TimeFn::constant(4.0),
                                          Diffusion::diagonal({TimeFn::constant(1.0), TimeFn::constant(3.0)}),
                                          Drift::zero(), vec({0.5, -0.5}), 1.0);
    EXPECT_DOUBLE_EQ(sigma_bar(diag, 0.0, vec({0.5, -0.5})), 3.0);
}

TEST(Constants, PStarExamples) {
    EXPECT_DOUBLE_EQ(p_star(dyson(2, 4.0, 1.0, vec({0.5, -0.5}))), 7.0);
    EXPECT_DOUBLE_EQ(p_star(dyson(2, 1.0, 1.0, vec({0.5, -0.5}))), 1.0);
    EXPECT_TRUE(std::isinf(p_star(dyson(2, 1.0, 0.0, vec({0.5, -0.5})))));
    const ModelSpec b = preset_type_B(2, TimeFn::constant(5.0), TimeFn::constant(5.0), TimeFn::constant(1.0),
                                      TimeFn::constant(0.0), vec({0.6, 0.3}), 1.0);
    EXPECT_DOUBLE_EQ(p_star(b), 9.0);
}

TEST(Constants, PStarTakesInfimumOverTime) {
    const ModelSpec m = preset_dyson_A(2, TimeFn::tabulated({0.0, 0.4, 1.0}, {4.0, 2.0, 4.0}),
                                       Diffusion::scalar(TimeFn::constant(1.0), 2), Drift::zero(), vec({0.5, -0.5}),
                                       1.0);
    EXPECT_DOUBLE_EQ(p_star(m), 3.0);
}

TEST(Constants, PStarScaleInvariance) {
    for (double c : {0.25, 2.0, 9.0}) {
        const ModelSpec base = dyson(3, 3.0, 0.7, vec({1.0, 0.0, -1.0}));
        const ModelSpec scaled = dyson(3, 3.0 * c, 0.7 * std::sqrt(c), vec({1.0, 0.0, -1.0}));
        EXPECT_NEAR(p_star(scaled), p_star(base), 1e-12);
    }
}

TEST(ModelSpec, RejectsInvalidInput) {
    EXPECT_THROW(dyson(2, 1.0, 1.0, vec({-0.5, 0.5})), DomainError);
    EXPECT_THROW(dyson(2, 1.0, 1.0, vec({0.5, 0.5})), DomainError);
    EXPECT_THROW(bessel(1.0, -1.0), DomainError);
    EXPECT_THROW(bessel(0.0), ParameterError);
    EXPECT_THROW(dyson(3, 1.0, 1.0, vec({1.0, 0.0})), DimensionError);
    EXPECT_THROW(preset_dyson_A(2, TimeFn::constant(1.0), Diffusion::scalar(TimeFn::constant(1.0), 2), Drift::zero(),
                                vec({0.5, -0.5}), 0.0),
                 ParameterError);
    EXPECT_THROW(preset_dyson_A(2, TimeFn::tabulated({0.0, 0.5}, {1.0, 1.0}),
                                Diffusion::scalar(TimeFn::constant(1.0), 2), Drift::zero(), vec({0.5, -0.5}), 1.0),
                 ParameterError);
    EXPECT_THROW(preset_type_B(2, TimeFn::constant(1.0), TimeFn::constant(1.0), TimeFn::constant(1.0),
                               TimeFn::constant(0.0), vec({0.3, 0.6}), 1.0),
                 DomainError);
    EXPECT_NO_THROW(bessel(1.0, 1.0));
}

TEST(Assumptions, DysonPresetPassesWithZeroK) {
    const AssumptionReport rep = validate_assumptions(dyson(3, 4.0, 1.0, vec({1.0, 0.0, -1.0})), 128, 1e-10, 1);
    EXPECT_TRUE(rep.all_passed());
    EXPECT_EQ(rep.k_bound, 0.0);
    const ConditionCheck& v = rep.conditions[4];
    EXPECT_EQ(v.status, CheckStatus::sampled_pass);
    EXPECT_GT(v.samples, 0);
}

TEST(Assumptions, BesselPassesWhenNoiseIsSmall) {
    EXPECT_TRUE(validate_assumptions(bessel(1.0, 1.0, 1.0), 32, 1e-10, 1).all_passed());
    EXPECT_TRUE(validate_assumptions(bessel(0.5, 1.0, 1.0), 32, 1e-10, 1).all_passed());
    EXPECT_FALSE(validate_assumptions(bessel(0.4, 1.0, 1.0), 32, 1e-10, 1).all_passed());
}

TEST(Assumptions, LargeNoiseFailsConditionThree) {
    const ModelSpec m = preset_dyson_A(2, TimeFn::constant(1.0),
                                       Diffusion::diagonal({TimeFn::constant(2.0), TimeFn::constant(1.0)}),
                                       Drift::zero(), vec({0.5, -0.5}), 1.0);
    const AssumptionReport rep = validate_assumptions(m, 16, 1e-10, 1);
    EXPECT_EQ(rep.conditions[2].status, CheckStatus::fail);
    EXPECT_DOUBLE_EQ(rep.conditions[2].worst_violation, 2.0);
    EXPECT_FALSE(rep.all_passed());
}

TEST(Assumptions, TypeBNeedsSmallestMultiplicity) {
    const ModelSpec ok = preset_type_B(2, TimeFn::constant(1.0), TimeFn::constant(0.5), TimeFn::constant(1.0),
                                       TimeFn::constant(0.0), vec({2.0, 1.0}), 1.0);
    EXPECT_TRUE(validate_assumptions(ok, 32, 1e-10, 2).all_passed());
    const ModelSpec bad = preset_type_B(2, TimeFn::constant(1.0), TimeFn::constant(0.4), TimeFn::constant(1.0),
                                        TimeFn::constant(0.0), vec({2.0, 1.0}), 1.0);
    EXPECT_FALSE(validate_assumptions(bad, 32, 1e-10, 2).all_passed());
}

TEST(Assumptions, UnorderedConstantDriftFailsWallCondition) {
    const ModelSpec m = preset_dyson_A(2, TimeFn::constant(1.0), Diffusion::scalar(TimeFn::constant(1.0), 2),
                                       Drift::constant(vec({0.0, 1.0})), vec({0.5, -0.5}), 1.0);
    EXPECT_EQ(validate_assumptions(m, 16, 1e-10, 1).conditions[3].status, CheckStatus::fail);
}

TEST(Assumptions, AffineDriftIsSampled) {
    Eigen::Matrix2d A;
    A << -1.0, 0.0, 0.0, -1.0;
    const ModelSpec m = preset_dyson_A(2, TimeFn::constant(1.0), Diffusion::scalar(TimeFn::constant(1.0), 2),
                                       Drift::affine(A, vec({1.0, 0.0})), vec({0.5, -0.5}), 1.0);
    const AssumptionReport rep = validate_assumptions(m, 64, 1e-10, 1);
    EXPECT_EQ(rep.conditions[3].status, CheckStatus::sampled_pass);
    EXPECT_EQ(rep.conditions[3].samples, 64);
    EXPECT_LT(rep.k_bound, 1.0);
    EXPECT_GT(rep.k_bound, 0.8);
}

TEST(Sampling, PointsLieInChamberAndAreReproducible) {
    const RootSystem rs = make_type_B(4);
    const auto a = sample_chamber_points(rs, 100, 5);
    const auto b = sample_chamber_points(rs, 100, 5);
    ASSERT_EQ(a.size(), 100u);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double mp = min_pairing(rs, a[i]);
        EXPECT_GT(mp, 0.0);
        EXPECT_EQ(a[i], b[i]);
        lo = std::min(lo, mp);
        hi = std::max(hi, mp);
    }
    EXPECT_LT(lo, 1e-2);
    EXPECT_GT(hi, 1.0);
}
