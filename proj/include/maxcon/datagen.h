#ifndef MAXCON_DATAGEN_H_
#define MAXCON_DATAGEN_H_

#include "maxcon/models/factory.h"
#include "maxcon/problem.h"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace maxcon {

struct GeneratorConfig {
    Family family = Family::regression;
    std::size_t n = 1000;
    double eta = 0.0;                 // planted outlier percentage
    std::optional<double> epsilon;    // default_epsilon(family) when unset
    std::uint64_t seed = 0;

    // regression
    int dimension = 8;
    std::optional<double> inlier_noise_bound;  // defaults to epsilon
    double outlier_sigma = 1.5;

    // geometry
    double image_width = 640.0;
    double image_height = 480.0;
    double focal = 500.0;
    double pixel_noise = 0.5;  // fundamental inlier noise radius, pixels

    double resolved_epsilon() const { return epsilon.value_or(default_epsilon(family)); }
    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

struct GroundTruth {
    Eigen::VectorXd x_true;          // in the family's parameter frame
    std::vector<bool> inlier_mask;   // planted inliers
    Eigen::MatrixXd model;           // pixel-frame H or F; 3D point; empty for regression

    std::size_t planted_inliers() const;
};

struct GeneratedProblem {
    GeneratorConfig config;
    ProblemData data;
    GroundTruth truth;
};

/// ceil(n (1 - eta / 100)).
std::size_t planted_inlier_count(std::size_t n, double eta);

/// Synthetic instance with a planted inlier set. Every planted inlier has
/// r_i(x_true) <= epsilon and every planted outlier has r_i(x_true) > epsilon.
///
/// regression     a_i, x_true uniform in [-1, 1]^d; inlier noise uniform in
///                [-bound, bound]; outlier noise N(0, sigma^2) redrawn until
///                it exceeds epsilon in magnitude.
/// homography     u uniform in the image, mild perspective H, inlier noise
///                uniform in a disc of radius 0.99 epsilon, outliers uniform.
/// triangulation  cameras on a ring 4 to 8 units around a point near the
///                origin, f = focal, principal point at the image centre.
/// fundamental    two cameras with a sideways baseline; inlier noise in a
///                disc of radius pixel_noise, shrunk until the algebraic
///                error is within epsilon.
GeneratedProblem generate(const GeneratorConfig &config);

/// Mean residual of x over the planted inliers; +inf when x leaves the
/// domain of one of them. Throws std::domain_error on an empty mask.
double e_ls(const ConsensusInstance &inst, const GroundTruth &truth, const Eigen::VectorXd &x);

}  // namespace maxcon

#endif  // MAXCON_DATAGEN_H_
