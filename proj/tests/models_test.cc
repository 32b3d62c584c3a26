#include "maxcon/datagen.h"
#include "maxcon/models/factory.h"
#include "maxcon/models/fundamental.h"
#include "maxcon/models/geometry.h"
#include "maxcon/models/homography.h"
#include "maxcon/models/regression.h"
#include "maxcon/models/triangulation.h"
#include "test_util.h"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace maxcon;
using maxcon::testing::vec;

namespace {

std::vector<std::size_t> iota_n(std::size_t n, std::size_t from = 0) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), from);
    return v;
}

Eigen::Matrix3d random_homography(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            h(r, c) += u(rng);
    h(0, 2) = 300 * u(rng);
    h(1, 2) = 300 * u(rng);
    h(2, 0) = 1e-3 * u(rng);
    h(2, 1) = 1e-3 * u(rng);
    return h;
}

std::vector<Correspondence> map_points(const Eigen::Matrix3d &h, std::size_t n, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> x(0, 640), y(0, 480);
    std::vector<Correspondence> out;
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::Vector2d u(x(rng), y(rng));
        out.push_back({u, apply_transform(h, u)});
    }
    return out;
}

ViewObservation look(const Eigen::Matrix3d &r, const Eigen::Vector3d &t, const Eigen::Vector3d &point) {
    ViewObservation v;
    v.camera << r, t;
    v.point = (v.camera * point.homogeneous()).hnormalized();
    return v;
}

}  // namespace

TEST(Family, NamesRoundTrip) {
    for (Family f : {Family::regression, Family::homography, Family::triangulation, Family::fundamental})
        EXPECT_EQ(family_from_string(to_string(f)), f);
    EXPECT_THROW(family_from_string("affine"), std::invalid_argument);
}

TEST(Family, DefaultThresholds) {
    EXPECT_EQ(default_epsilon(Family::regression), 0.3);
    EXPECT_EQ(default_epsilon(Family::homography), 4.0);
    EXPECT_EQ(default_epsilon(Family::triangulation), 1.0);
    EXPECT_EQ(default_epsilon(Family::fundamental), 0.006);
}

TEST(Regression, ExampleAndThreshold) {
    RegressionProblem p({{vec({1, 0}), 2.0}, {vec({0, 1}), 1.0}}, 0.3);
    EXPECT_EQ(p.instance().epsilon(), 0.3);
    EXPECT_EQ(*residual(p.instance(), 0, vec({2, 0})), 0.0);
    EXPECT_EQ(p.minimal_sample_size(), 2u);
    EXPECT_THROW(RegressionProblem({{vec({1, 0}), 2.0}, {vec({1}), 1.0}}, 0.3), std::invalid_argument);
}

TEST(Regression, LargeInstanceBuilds) {
    GeneratorConfig cfg;
    cfg.n = 1000;
    cfg.dimension = 8;
    const auto g = generate(cfg);
    const auto model = make_estimator(g.data);
    EXPECT_EQ(model->size(), 1000u);
    EXPECT_EQ(model->dimension(), 8);
}

TEST(Regression, MinimalSolveInterpolates) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(5, [&] { return u(rng); });
    std::vector<RegressionDatum> data;
    for (int i = 0; i < 5; ++i) {
        const Eigen::VectorXd a = Eigen::VectorXd::NullaryExpr(5, [&] { return u(rng); });
        data.push_back({a, a.dot(x)});
    }
    RegressionProblem p(data, 0.3);
    const auto sols = p.minimal_solve(iota_n(5));
    ASSERT_EQ(sols.size(), 1u);
    EXPECT_LE((sols[0] - x).norm(), 1e-10);
    for (std::size_t i = 0; i < 5; ++i)
        EXPECT_LE(*residual(p.instance(), i, sols[0]), 1e-8);
}

TEST(Regression, DegenerateSampleIsEmpty) {
    RegressionProblem p({{vec({1, 2}), 1.0}, {vec({2, 4}), 2.0}, {vec({0, 1}), 0.0}}, 0.3);
    const std::vector<std::size_t> s{0, 1};
    EXPECT_TRUE(p.minimal_solve(s).empty());
    EXPECT_FALSE(p.least_squares(s).has_value());
}

TEST(Regression, LeastSquaresBeatsMinimalFitsOnAverage) {
    double ls_sum = 0.0, minimal_sum = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        GeneratorConfig cfg;
        cfg.n = 200;
        cfg.seed = seed;
        const auto g = generate(cfg);
        const auto model = make_estimator(g.data);
        const auto ls = model->least_squares(iota_n(200));
        ASSERT_TRUE(ls);
        ls_sum += e_ls(model->instance(), g.truth, *ls);
        const auto minimal = model->minimal_solve(iota_n(8, 10 * seed));
        ASSERT_FALSE(minimal.empty());
        minimal_sum += e_ls(model->instance(), g.truth, minimal[0]);
    }
    EXPECT_LT(ls_sum, minimal_sum);
}

TEST(Homography, IdentityCorrespondences) {
    std::mt19937_64 rng(2);
    const auto corrs = map_points(Eigen::Matrix3d::Identity(), 20, rng);
    HomographyProblem p(corrs, 4.0);
    EXPECT_EQ(p.instance().epsilon(), 4.0);
    EXPECT_EQ(p.dimension(), 8);
    const auto x = p.to_params(Eigen::Matrix3d::Identity());
    ASSERT_TRUE(x);
    for (std::size_t i = 0; i < corrs.size(); ++i)
        EXPECT_NEAR(*residual(p.instance(), i, *x), 0.0, 1e-9);

    const auto sols = p.minimal_solve(iota_n(4));
    ASSERT_EQ(sols.size(), 1u);
    Eigen::Matrix3d h = p.to_matrix(sols[0]);
    h /= h(2, 2);
    EXPECT_LE((h - Eigen::Matrix3d::Identity()).norm(), 1e-9);
}

TEST(Homography, ResidualIsTransferError) {
    std::mt19937_64 rng(3);
    const Eigen::Matrix3d h = random_homography(rng);
    auto corrs = map_points(h, 30, rng);
    std::normal_distribution<double> noise(0, 3);
    for (auto &c : corrs)
        c.v += Eigen::Vector2d(noise(rng), noise(rng));
    HomographyProblem p(corrs, 4.0);
    for (int t = 0; t < 5; ++t) {
        const Eigen::Matrix3d g = random_homography(rng);
        const Eigen::VectorXd x = *p.to_params(g);
        EXPECT_LE((p.to_matrix(x) / p.to_matrix(x)(2, 2) - g / g(2, 2)).norm(), 1e-9 * g.norm());
        for (std::size_t i = 0; i < corrs.size(); ++i) {
            const double direct = (apply_transform(g, corrs[i].u) - corrs[i].v).norm();
            EXPECT_NEAR(*residual(p.instance(), i, x), direct, 1e-10 * (1 + direct));
        }
    }
}

TEST(Homography, MinimalSolveInterpolates) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
        auto corrs = map_points(random_homography(rng), 12, rng);
        std::normal_distribution<double> noise(0, 5);
        for (auto &c : corrs)
            c.v += Eigen::Vector2d(noise(rng), noise(rng));
        HomographyProblem p(corrs, 4.0);
        const std::vector<std::size_t> s{1, 4, 7, 10};
        for (const auto &x : p.minimal_solve(s))
            for (auto i : s)
                EXPECT_LE(*residual(p.instance(), i, x), 1e-8);
    }
}

TEST(Homography, CollinearSampleIsDegenerate) {
    std::vector<Correspondence> corrs;
    for (int i = 0; i < 4; ++i)
        corrs.push_back({Eigen::Vector2d(10.0 * i, 5.0 * i), Eigen::Vector2d(10.0 * i, 5.0 * i)});
    corrs.push_back({Eigen::Vector2d(100, 0), Eigen::Vector2d(100, 0)});
    HomographyProblem p(corrs, 4.0);
    EXPECT_TRUE(p.minimal_solve(iota_n(4)).empty());
}

TEST(Homography, PlantedInliersAtGroundTruth) {
    GeneratorConfig cfg;
    cfg.family = Family::homography;
    cfg.n = 150;
    cfg.eta = 35;
    cfg.seed = 9;
    const auto g = generate(cfg);
    const auto model = make_estimator(g.data);
    EXPECT_EQ(consensus(model->instance(), g.truth.x_true).inlier_mask, g.truth.inlier_mask);
}

TEST(Triangulation, ExactObservationsAndThreshold) {
    const Eigen::Vector3d point(0.3, -0.2, 5.0);
    const Eigen::Matrix3d r = Eigen::AngleAxisd(0.2, Eigen::Vector3d::UnitY()).toRotationMatrix();
    const auto a = look(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(), point);
    const auto b = look(r, Eigen::Vector3d(-1, 0, 0), point);
    TriangulationProblem p({a, b}, 1.0);
    EXPECT_EQ(p.instance().epsilon(), 1.0);
    EXPECT_EQ(p.dimension(), 3);
    EXPECT_EQ(p.minimal_sample_size(), 2u);
    EXPECT_NEAR(*residual(p.instance(), 0, point), 0.0, 1e-14);
    EXPECT_NEAR(*residual(p.instance(), 1, point), 0.0, 1e-14);

    const auto sols = p.minimal_solve(iota_n(2));
    ASSERT_EQ(sols.size(), 1u);
    EXPECT_LE((sols[0] - point).norm(), 1e-9);
}

TEST(Triangulation, PointBehindCameraIsOutlier) {
    const Eigen::Vector3d point(0.0, 0.0, 5.0);
    const auto front = look(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(), point);
    // camera facing the other way sees the point at negative depth
    ViewObservation back = front;
    back.camera.leftCols<3>() = -Eigen::Matrix3d::Identity();
    back.point = Eigen::Vector2d::Zero();  // numerator is exactly zero there
    TriangulationProblem p({front, back}, 1.0);
    const Estimate e = consensus(p.instance(), point);
    EXPECT_TRUE(e.inlier_mask[0]);
    EXPECT_FALSE(e.inlier_mask[1]);
    EXPECT_EQ(p.instance().functional(1).numerator_norm(point), 0.0);
}

TEST(Triangulation, ResidualIsReprojectionError) {
    GeneratorConfig cfg;
    cfg.family = Family::triangulation;
    cfg.n = 30;
    cfg.eta = 20;
    const auto g = generate(cfg);
    TriangulationProblem p(g.data.views, 1.0);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0, 0.1);
    for (int t = 0; t < 5; ++t) {
        const Eigen::Vector3d x = g.truth.x_true + Eigen::Vector3d(n(rng), n(rng), n(rng));
        for (std::size_t i = 0; i < p.size(); ++i) {
            const auto &v = g.data.views[i];
            const double direct = ((v.camera * x.homogeneous()).hnormalized() - v.point).norm();
            EXPECT_NEAR(*residual(p.instance(), i, x), direct, 1e-10 * (1 + direct));
        }
    }
}

TEST(Fundamental, ThresholdAndExactEpipolarResidual) {
    GeneratorConfig cfg;
    cfg.family = Family::fundamental;
    cfg.n = 40;
    cfg.eta = 0;
    cfg.pixel_noise = 0;
    const auto g = generate(cfg);
    FundamentalProblem p(g.data.correspondences, 0.006);
    EXPECT_EQ(p.instance().epsilon(), 0.006);
    EXPECT_EQ(p.dimension(), 8);
    EXPECT_TRUE(p.instance().functional(0).constant_denominator());
    for (std::size_t i = 0; i < p.size(); ++i)
        EXPECT_LE(*residual(p.instance(), i, g.truth.x_true), 1e-9);
}

TEST(Fundamental, EightPointRecoversKnownF) {
    GeneratorConfig cfg;
    cfg.family = Family::fundamental;
    cfg.n = 40;
    cfg.eta = 0;
    cfg.pixel_noise = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        cfg.seed = seed;
        const auto g = generate(cfg);
        FundamentalProblem p(g.data.correspondences, 0.006);
        const auto sols = p.minimal_solve(iota_n(8, 3));
        ASSERT_EQ(sols.size(), 1u);
        for (std::size_t i = 0; i < p.size(); ++i)
            EXPECT_LE(*residual(p.instance(), i, sols[0]), 1e-9);
        Eigen::Matrix3d f = p.to_matrix(sols[0]);
        Eigen::Matrix3d truth = g.truth.model;
        f /= f.norm();
        truth /= truth.norm();
        EXPECT_LE(std::min((f - truth).norm(), (f + truth).norm()), 1e-6);
    }
}

TEST(Fundamental, ResidualIsNormalizedAlgebraicError) {
    GeneratorConfig cfg;
    cfg.family = Family::fundamental;
    cfg.n = 30;
    cfg.eta = 30;
    const auto g = generate(cfg);
    FundamentalProblem p(g.data.correspondences, 0.006);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n(0, 0.05);
    for (int t = 0; t < 5; ++t) {
        const Eigen::VectorXd x = g.truth.x_true + Eigen::VectorXd::NullaryExpr(8, [&] { return n(rng); });
        const Eigen::Matrix3d fn = matrix_from_params(x);
        for (std::size_t i = 0; i < p.size(); ++i) {
            const auto &c = g.data.correspondences[i];
            const Eigen::Vector3d u = p.t1() * c.u.homogeneous();
            const Eigen::Vector3d v = p.t2() * c.v.homogeneous();
            const double direct = std::abs(v.dot(fn * u));
            EXPECT_NEAR(*residual(p.instance(), i, x), direct, 1e-10 * (1 + direct));
        }
    }
}

TEST(Fundamental, MinimalSolveInterpolatesBeforeProjection) {
    GeneratorConfig cfg;
    cfg.family = Family::fundamental;
    cfg.n = 30;
    cfg.eta = 50;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = seed;
        const auto g = generate(cfg);
        FundamentalProblem p(g.data.correspondences, 0.006);
        const auto idx = iota_n(8, seed);
        const auto f = p.eight_point_unprojected(idx);
        ASSERT_TRUE(f);
        const Eigen::Matrix3d fn = *f / (*f)(2, 2);
        for (auto i : idx) {
            const auto &c = g.data.correspondences[i];
            const Eigen::Vector3d u = p.t1() * c.u.homogeneous();
            const Eigen::Vector3d v = p.t2() * c.v.homogeneous();
            EXPECT_LE(std::abs(v.dot(fn * u)), 1e-8);
        }
        for (const auto &x : p.minimal_solve(idx)) {
            Eigen::JacobiSVD<Eigen::Matrix3d> svd(matrix_from_params(x));
            EXPECT_LE(svd.singularValues()(2), 1e-12 * svd.singularValues()(0));
        }
    }
}

TEST(Fundamental, ProjectionGivesRankTwoPixelMatrix) {
    GeneratorConfig cfg;
    cfg.family = Family::fundamental;
    cfg.n = 30;
    cfg.eta = 10;
    const auto g = generate(cfg);
    FundamentalProblem p(g.data.correspondences, 0.006);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0, 0.3);
    const Eigen::VectorXd x = g.truth.x_true + Eigen::VectorXd::NullaryExpr(8, [&] { return n(rng); });
    const auto projected = p.project(x);
    ASSERT_TRUE(projected);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(p.to_matrix(*projected));
    EXPECT_LE(svd.singularValues()(2), 1e-10 * svd.singularValues()(0));
    const auto again = p.project(*projected);
    EXPECT_LE((*again - *projected).norm(), 1e-10 * projected->norm());
}

TEST(Rank2, DiagonalTruncation) {
    const Rank2Projection r = rank2_project(Eigen::Vector3d(3, 2, 1).asDiagonal());
    EXPECT_LE((r.nearest - Eigen::Matrix3d(Eigen::Vector3d(3, 2, 0).asDiagonal())).norm(), 1e-14);
    EXPECT_FALSE(r.rescaled);  // entry (2,2) vanished
}

TEST(Rank2, IdempotentOnRankTwo) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n;
    for (int t = 0; t < 20; ++t) {
        const Eigen::Matrix3d f = Eigen::Matrix3d::NullaryExpr([&] { return n(rng); });
        const Eigen::Matrix3d once = rank2_project(f).nearest;
        EXPECT_LE((rank2_project(once).nearest - once).norm(), 1e-12 * once.norm());
    }
}

TEST(Rank2, DistanceEqualsSmallestSingularValue) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n;
    for (int t = 0; t < 20; ++t) {
        const Eigen::Matrix3d f = Eigen::Matrix3d::NullaryExpr([&] { return n(rng); });
        const Rank2Projection r = rank2_project(f);
        const Eigen::Vector3d sv = Eigen::JacobiSVD<Eigen::Matrix3d>(f).singularValues();
        EXPECT_NEAR((f - r.nearest).norm(), sv(2), 1e-12);
        const Eigen::Vector3d out = Eigen::JacobiSVD<Eigen::Matrix3d>(r.nearest).singularValues();
        EXPECT_LE(out(2), 1e-14 * out(0));
        if (r.rescaled)
            EXPECT_NEAR(r.matrix(2, 2), 1.0, 1e-14);
    }
}

TEST(Geometry, HartleyNormalization) {
    const std::vector<Eigen::Vector2d> pts{{0, 0}, {4, 0}, {4, 2}, {10, 7}};
    const Eigen::Matrix3d t = hartley_normalization(pts);
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    double dist = 0.0;
    for (const auto &p : pts)
        centroid += apply_transform(t, p) / 4.0;
    for (const auto &p : pts)
        dist += apply_transform(t, p).norm() / 4.0;
    EXPECT_LE(centroid.norm(), 1e-14);
    EXPECT_NEAR(dist, std::sqrt(2.0), 1e-14);
}

TEST(Geometry, NullVectorRejectsRankDeficiency) {
    Eigen::MatrixXd a(3, 3);
    a << 1, 2, 3, 2, 4, 6, 1, 0, 1;  // rank 2, wanted rank 2 -> fine
    EXPECT_TRUE(null_vector(a, 2).has_value());
    a.row(2) = 3 * a.row(0);  // rank 1
    EXPECT_FALSE(null_vector(a, 2).has_value());
}

TEST(Geometry, MatrixParams) {
    Eigen::Matrix3d m;
    m << 2, 4, 6, 8, 10, 12, 14, 16, 2;
    const auto p = params_from_matrix(m);
    ASSERT_TRUE(p);
    EXPECT_EQ(*p, vec({1, 2, 3, 4, 5, 6, 7, 8}));
    EXPECT_EQ(matrix_from_params(*p), m / 2);
    m(2, 2) = 0;
    EXPECT_FALSE(params_from_matrix(m));
}
