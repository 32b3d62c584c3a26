#include "maxcon/ransac.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace maxcon {

double ransac_bound(double confidence, double inlier_ratio, std::size_t k) {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("confidence must lie in (0, 1)");
    const double wk = std::pow(inlier_ratio, static_cast<double>(k));
    if (wk <= 0.0)
        return std::numeric_limits<double>::infinity();
    if (wk >= 1.0)
        return 1.0;
    return std::log(1.0 - confidence) / std::log1p(-wk);
}

namespace {

struct Scorer {
    const ModelEstimator &model;
    Estimate best;
    bool have = false;

    void offer(const Eigen::VectorXd &x) {
        Estimate e = consensus(model.instance(), x);
        if (!have || e.consensus > best.consensus) {
            best = std::move(e);
            have = true;
        }
    }
};

RansacResult finish(const ModelEstimator &model, Scorer &scorer, std::size_t iterations, bool polish) {
    RansacResult out;
    out.iterations = iterations;
    if (!scorer.have) {
        // Every sample was degenerate.
        out.estimate = consensus(model.instance(), Eigen::VectorXd::Zero(model.dimension()));
        out.zero_consensus = true;
        return out;
    }
    out.estimate = scorer.best;
    out.unpolished_consensus = out.estimate.consensus;
    if (polish && out.estimate.consensus >= model.minimal_sample_size()) {
        const auto idx = out.estimate.inlier_indices();
        if (auto x = model.least_squares(idx)) {
            Estimate e = consensus(model.instance(), *x);
            if (e.consensus >= out.estimate.consensus) {
                out.estimate = std::move(e);
                out.polished = true;
            }
        }
    }
    out.zero_consensus = out.estimate.consensus == 0;
    return out;
}

}  // namespace

RansacResult run_ransac(const ModelEstimator &model, const RansacConfig &cfg) {
    const std::size_t n = model.size();
    const std::size_t k = model.minimal_sample_size();
    if (n < k)
        throw std::invalid_argument("fewer data than the minimal sample size");
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0))
        throw std::invalid_argument("confidence must lie in (0, 1)");

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> sample(k);

    Scorer scorer{model, {}, false};
    double bound = std::numeric_limits<double>::infinity();
    std::size_t it = 0;
    while (it < cfg.max_iterations && static_cast<double>(it) < bound) {
        ++it;
        std::sample(all.begin(), all.end(), sample.begin(), k, rng);
        for (const auto &x : model.minimal_solve(sample))
            scorer.offer(x);
        if (scorer.have)
            bound = ransac_bound(cfg.confidence,
                                 static_cast<double>(scorer.best.consensus) / static_cast<double>(n), k);
    }
    return finish(model, scorer, it, cfg.polish);
}

RansacResult run_exhaustive_ransac(const ModelEstimator &model, bool polish) {
    const std::size_t n = model.size();
    const std::size_t k = model.minimal_sample_size();
    if (n < k)
        throw std::invalid_argument("fewer data than the minimal sample size");
    std::vector<std::size_t> sample(k);
    std::iota(sample.begin(), sample.end(), std::size_t{0});
    Scorer scorer{model, {}, false};
    std::size_t it = 0;
    while (true) {
        ++it;
        for (const auto &x : model.minimal_solve(sample))
            scorer.offer(x);
        // Next k-combination.
        std::size_t i = k;
        while (i > 0 && sample[i - 1] == n - k + i - 1)
            --i;
        if (i == 0)
            break;
        ++sample[i - 1];
        for (std::size_t j = i; j < k; ++j)
            sample[j] = sample[j - 1] + 1;
    }
    return finish(model, scorer, it, polish);
}

Eigen::VectorXd random_init(const ModelEstimator &model, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return model.random_parameters(rng);
}

}  // namespace maxcon
