#include "maxcon/datagen.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace maxcon {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng &rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Eigen::VectorXd uniform_vector(Rng &rng, Eigen::Index d, double lo, double hi) {
    Eigen::VectorXd v(d);
    for (auto &x : v)
        x = uniform(rng, lo, hi);
    return v;
}

Eigen::Vector2d in_disc(Rng &rng, double radius) {
    const double r = radius * std::sqrt(uniform(rng, 0.0, 1.0));
    const double th = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    return {r * std::cos(th), r * std::sin(th)};
}

Eigen::Vector2d in_image(Rng &rng, const GeneratorConfig &cfg) {
    return {uniform(rng, 0.0, cfg.image_width), uniform(rng, 0.0, cfg.image_height)};
}

std::vector<bool> plant_mask(Rng &rng, std::size_t n, double eta) {
    const std::size_t outliers = n - planted_inlier_count(n, eta);
    std::vector<std::size_t> all(n), picked(outliers);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::sample(all.begin(), all.end(), picked.begin(), outliers, rng);
    std::vector<bool> mask(n, true);
    for (std::size_t i : picked)
        mask[i] = false;
    return mask;
}

// Data whose inlier status at x disagrees with the planted label.
std::vector<std::size_t> violators(const ConsensusInstance &inst, const Eigen::VectorXd &x,
                                   const std::vector<bool> &mask) {
    const Estimate e = consensus(inst, x);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (e.inlier_mask[i] != mask[i])
            out.push_back(i);
    return out;
}

Eigen::Matrix3d intrinsics(const GeneratorConfig &cfg) {
    Eigen::Matrix3d k;
    k << cfg.focal, 0, cfg.image_width / 2, 0, cfg.focal, cfg.image_height / 2, 0, 0, 1;
    return k;
}

Eigen::Matrix3d skew(const Eigen::Vector3d &t) {
    Eigen::Matrix3d s;
    s << 0, -t.z(), t.y(), t.z(), 0, -t.x(), -t.y(), t.x(), 0;
    return s;
}

constexpr int kMaxRepairRounds = 200;
// Smallest accepted |Fn(2,2)| / ||Fn|| for a generated two-view scene.
constexpr double kMinCorner = 1e-3;

[[noreturn]] void repair_failed() {
    throw std::runtime_error("generator could not enforce the planted inlier set");
}

void generate_regression(const GeneratorConfig &cfg, Rng &rng, GeneratedProblem &out) {
    const double eps = cfg.resolved_epsilon();
    const double bound = cfg.inlier_noise_bound.value_or(eps);
    const int d = cfg.dimension;
    std::normal_distribution<double> outlier_noise(0.0, cfg.outlier_sigma);

    out.truth.x_true = uniform_vector(rng, d, -1.0, 1.0);
    out.truth.inlier_mask = plant_mask(rng, cfg.n, cfg.eta);
    const Eigen::VectorXd &x = out.truth.x_true;

    auto draw_b = [&](const Eigen::VectorXd &a, bool inlier) {
        double noise = 0.0;
        if (inlier) {
            noise = uniform(rng, -bound, bound);
        } else {
            do
                noise = outlier_noise(rng);
            while (std::abs(noise) <= eps);
        }
        return a.dot(x) + noise;
    };

    auto &data = out.data.regression;
    data.resize(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        data[i].a = uniform_vector(rng, d, -1.0, 1.0);
        data[i].b = draw_b(data[i].a, out.truth.inlier_mask[i]);
    }
    // Rounding can move a residual across the threshold; redraw those.
    for (int round = 0; round < kMaxRepairRounds; ++round) {
        const auto bad = violators(build_regression_instance(data, eps), x, out.truth.inlier_mask);
        if (bad.empty())
            return;
        for (std::size_t i : bad)
            data[i].b = draw_b(data[i].a, out.truth.inlier_mask[i]);
    }
    repair_failed();
}

void generate_homography(const GeneratorConfig &cfg, Rng &rng, GeneratedProblem &out) {
    const double eps = cfg.resolved_epsilon();
    Eigen::Matrix3d h;
    h << 1 + uniform(rng, -0.1, 0.1), uniform(rng, -0.1, 0.1), uniform(rng, -30, 30),
        uniform(rng, -0.1, 0.1), 1 + uniform(rng, -0.1, 0.1), uniform(rng, -30, 30),
        uniform(rng, -1e-4, 1e-4), uniform(rng, -1e-4, 1e-4), 1;
    out.truth.model = h;
    out.truth.inlier_mask = plant_mask(rng, cfg.n, cfg.eta);

    auto &corrs = out.data.correspondences;
    auto draw_v = [&](const Eigen::Vector2d &u, bool inlier) -> Eigen::Vector2d {
        const Eigen::Vector2d hu = (h * u.homogeneous()).hnormalized();
        if (inlier)
            return hu + in_disc(rng, 0.99 * eps);
        Eigen::Vector2d v;
        do
            v = in_image(rng, cfg);
        while ((v - hu).norm() <= 1.01 * eps);
        return v;
    };
    corrs.resize(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        corrs[i].u = in_image(rng, cfg);
        corrs[i].v = draw_v(corrs[i].u, out.truth.inlier_mask[i]);
    }
    for (int round = 0; round < kMaxRepairRounds; ++round) {
        const HomographyProblem problem(corrs, eps);
        const auto x = problem.to_params(h);
        if (!x)
            repair_failed();
        const auto bad = violators(problem.instance(), *x, out.truth.inlier_mask);
        if (bad.empty()) {
            out.truth.x_true = *x;
            return;
        }
        for (std::size_t i : bad)
            corrs[i].v = draw_v(corrs[i].u, out.truth.inlier_mask[i]);
    }
    repair_failed();
}

void generate_triangulation(const GeneratorConfig &cfg, Rng &rng, GeneratedProblem &out) {
    const double eps = cfg.resolved_epsilon();
    const Eigen::Matrix3d k = intrinsics(cfg);
    const Eigen::Vector3d point = uniform_vector(rng, 3, -0.5, 0.5);
    out.truth.x_true = point;
    out.truth.model = point;
    out.truth.inlier_mask = plant_mask(rng, cfg.n, cfg.eta);

    auto &views = out.data.views;
    views.resize(cfg.n);
    std::vector<Eigen::Vector2d> exact(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const double th = 2.0 * std::numbers::pi * (static_cast<double>(i) + uniform(rng, -0.3, 0.3)) /
                          static_cast<double>(cfg.n);
        const double radius = uniform(rng, 4.0, 8.0);
        const Eigen::Vector3d centre(radius * std::cos(th), uniform(rng, -1.0, 1.0), radius * std::sin(th));
        const Eigen::Vector3d target = uniform_vector(rng, 3, -0.3, 0.3);
        const Eigen::Vector3d z = (target - centre).normalized();
        const Eigen::Vector3d x = Eigen::Vector3d::UnitY().cross(z).normalized();
        const Eigen::Vector3d y = z.cross(x);
        Eigen::Matrix3d r;
        r.row(0) = x.transpose();
        r.row(1) = y.transpose();
        r.row(2) = z.transpose();
        Eigen::Matrix<double, 3, 4> rt;
        rt.leftCols<3>() = r;
        rt.col(3) = -r * centre;
        views[i].camera = k * rt;
        exact[i] = (views[i].camera * point.homogeneous()).hnormalized();
    }

    auto draw_obs = [&](std::size_t i) -> Eigen::Vector2d {
        if (out.truth.inlier_mask[i])
            return exact[i] + in_disc(rng, 0.99 * eps);
        Eigen::Vector2d obs;
        do
            obs = in_image(rng, cfg);
        while ((obs - exact[i]).norm() <= 1.01 * eps);
        return obs;
    };
    for (std::size_t i = 0; i < cfg.n; ++i)
        views[i].point = draw_obs(i);
    for (int round = 0; round < kMaxRepairRounds; ++round) {
        const auto bad = violators(build_triangulation_instance(views, eps), point, out.truth.inlier_mask);
        if (bad.empty())
            return;
        for (std::size_t i : bad)
            views[i].point = draw_obs(i);
    }
    repair_failed();
}

struct TwoViewScene {
    Eigen::Matrix3d f;
    std::vector<Eigen::Vector2d> u, v;  // noise-free projections
};

TwoViewScene two_view_scene(const GeneratorConfig &cfg, Rng &rng) {
    const Eigen::Matrix3d k = intrinsics(cfg);
    const Eigen::Vector3d axis = uniform_vector(rng, 3, -1.0, 1.0).normalized();
    const Eigen::Matrix3d r = Eigen::AngleAxisd(uniform(rng, 0.0, 0.15), axis).toRotationMatrix();
    const Eigen::Vector3d t((uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0) * uniform(rng, 0.6, 1.0),
                            uniform(rng, -0.3, 0.3), uniform(rng, -0.2, 0.2));
    TwoViewScene scene;
    const Eigen::Matrix3d kinv = k.inverse();
    scene.f = kinv.transpose() * skew(t) * r * kinv;
    scene.f /= scene.f.norm();

    const double margin_x = 0.2 * cfg.image_width, margin_y = 0.2 * cfg.image_height;
    while (scene.u.size() < cfg.n) {
        const Eigen::Vector2d u = in_image(rng, cfg);
        const Eigen::Vector3d p = uniform(rng, 4.0, 12.0) * (kinv * u.homogeneous());
        const Eigen::Vector3d q = k * (r * p + t);
        if (q.z() < 0.5)
            continue;
        const Eigen::Vector2d v = q.hnormalized();
        if (v.x() < -margin_x || v.x() > cfg.image_width + margin_x || v.y() < -margin_y ||
            v.y() > cfg.image_height + margin_y)
            continue;
        scene.u.push_back(u);
        scene.v.push_back(v);
    }
    return scene;
}

void generate_fundamental(const GeneratorConfig &cfg, Rng &rng, GeneratedProblem &out) {
    const double eps = cfg.resolved_epsilon();
    out.truth.inlier_mask = plant_mask(rng, cfg.n, cfg.eta);
    const auto &mask = out.truth.inlier_mask;

    // Fn(2,2) is the epipolar residual of the two centroids, and the centroids
    // of exact matches nearly correspond, so Fn(2,2) is small on clean data.
    // Scenes where it all but vanishes are redrawn.
    for (int scene_attempt = 0; scene_attempt < 100; ++scene_attempt) {
        const TwoViewScene scene = two_view_scene(cfg, rng);
        std::vector<double> radius(cfg.n, cfg.pixel_noise);
        auto &corrs = out.data.correspondences;
        corrs.resize(cfg.n);
        auto draw_v = [&](std::size_t i) -> Eigen::Vector2d {
            if (mask[i])
                return scene.v[i] + in_disc(rng, radius[i]);
            return in_image(rng, cfg);
        };
        for (std::size_t i = 0; i < cfg.n; ++i) {
            corrs[i].u = scene.u[i];
            corrs[i].v = draw_v(i);
        }

        bool redraw_scene = false;
        for (int round = 0; round < kMaxRepairRounds && !redraw_scene; ++round) {
            const FundamentalProblem problem(corrs, eps);
            const Eigen::Matrix3d fn = problem.t2().transpose().inverse() * scene.f * problem.t1().inverse();
            if (std::abs(fn(2, 2)) < kMinCorner * fn.norm()) {
                redraw_scene = true;
                break;
            }
            const auto x = problem.to_params(scene.f);
            const auto bad = violators(problem.instance(), *x, mask);
            if (bad.empty()) {
                out.truth.x_true = *x;
                out.truth.model = scene.f;
                return;
            }
            for (std::size_t i : bad) {
                if (mask[i])
                    radius[i] = radius[i] < 1e-9 ? 0.0 : 0.5 * radius[i];
                corrs[i].v = draw_v(i);
            }
        }
    }
    repair_failed();
}

}  // namespace

void GeneratorConfig::validate() const {
    if (!(eta >= 0.0 && eta <= 100.0))
        throw std::invalid_argument("eta must lie in [0, 100]");
    const double eps = resolved_epsilon();
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw std::invalid_argument("epsilon must be positive");
    if (family == Family::regression) {
        if (dimension < 1)
            throw std::invalid_argument("regression dimension must be positive");
        const double bound = inlier_noise_bound.value_or(eps);
        if (!(bound > 0.0) || bound > eps)
            throw std::invalid_argument("inlier noise bound must lie in (0, epsilon]");
        if (!(outlier_sigma > 0.0))
            throw std::invalid_argument("outlier sigma must be positive");
    } else {
        if (!(image_width > 0.0 && image_height > 0.0 && focal > 0.0))
            throw std::invalid_argument("image size and focal length must be positive");
        if (!(pixel_noise >= 0.0))
            throw std::invalid_argument("pixel noise must be nonnegative");
    }
    std::size_t k = 0;
    switch (family) {
    case Family::regression:
        k = static_cast<std::size_t>(std::max(dimension, 1));
        break;
    case Family::homography:
        k = 4;
        break;
    case Family::triangulation:
        k = 2;
        break;
    case Family::fundamental:
        k = 8;
        break;
    }
    if (n < k)
        throw std::invalid_argument("n is below the minimal sample size");
}

std::size_t GroundTruth::planted_inliers() const {
    return static_cast<std::size_t>(std::count(inlier_mask.begin(), inlier_mask.end(), true));
}

std::size_t planted_inlier_count(std::size_t n, double eta) {
    const double kept = static_cast<double>(n) * (100.0 - eta) / 100.0;
    return std::min(n, static_cast<std::size_t>(std::ceil(kept - 1e-9)));
}

GeneratedProblem generate(const GeneratorConfig &config) {
    config.validate();
    GeneratedProblem out;
    out.config = config;
    out.data.family = config.family;
    out.data.epsilon = config.resolved_epsilon();
    Rng rng(config.seed);
    switch (config.family) {
    case Family::regression:
        generate_regression(config, rng, out);
        break;
    case Family::homography:
        generate_homography(config, rng, out);
        break;
    case Family::triangulation:
        generate_triangulation(config, rng, out);
        break;
    case Family::fundamental:
        generate_fundamental(config, rng, out);
        break;
    }
    return out;
}

double e_ls(const ConsensusInstance &inst, const GroundTruth &truth, const Eigen::VectorXd &x) {
    if (truth.inlier_mask.size() != inst.size())
        throw std::invalid_argument("ground-truth mask length differs from instance size");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < inst.size(); ++i) {
        if (!truth.inlier_mask[i])
            continue;
        const auto r = residual(inst, i, x);
        if (!r)
            return std::numeric_limits<double>::infinity();
        sum += *r;
        ++count;
    }
    if (count == 0)
        throw std::domain_error("e_ls is undefined without ground-truth inliers");
    return sum / static_cast<double>(count);
}

}  // namespace maxcon
