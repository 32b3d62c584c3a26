#ifndef MAXCON_RANSAC_H_
#define MAXCON_RANSAC_H_

#include "maxcon/models/estimator.h"
#include "maxcon/problem.h"

#include <cstddef>
#include <cstdint>

namespace maxcon {

struct RansacConfig {
    double confidence = 0.99;
    std::size_t max_iterations = 100000;
    std::uint64_t seed = 0;
    bool polish = true;  // least-squares refit on the best consensus set
};

struct RansacResult {
    Estimate estimate;
    std::size_t iterations = 0;
    std::size_t unpolished_consensus = 0;
    bool polished = false;  // the refit was adopted
    bool zero_consensus = false;
};

/// Number of samples needed to draw one all-inlier sample of size k with
/// probability `confidence`, given inlier ratio w. Infinite when w == 0.
double ransac_bound(double confidence, double inlier_ratio, std::size_t k);

/// Uniform minimal samples with adaptive stopping, then the optional
/// least-squares polish, kept only when it does not lose consensus.
RansacResult run_ransac(const ModelEstimator &model, const RansacConfig &cfg);

/// Every minimal subset in lexicographic order; used on tiny instances.
RansacResult run_exhaustive_ransac(const ModelEstimator &model, bool polish = true);

/// Random in-domain parameters, reproducible from the seed.
Eigen::VectorXd random_init(const ModelEstimator &model, std::uint64_t seed);

}  // namespace maxcon

#endif  // MAXCON_RANSAC_H_
