#include "maxcon/models/estimator.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace maxcon {

std::string_view to_string(Family family) {
    switch (family) {
    case Family::regression:
        return "regression";
    case Family::homography:
        return "homography";
    case Family::triangulation:
        return "triangulation";
    case Family::fundamental:
        return "fundamental";
    }
    return "unknown";
}

Family family_from_string(std::string_view name) {
    for (Family f : {Family::regression, Family::homography, Family::triangulation,
                     Family::fundamental})
        if (to_string(f) == name)
            return f;
    throw std::invalid_argument("unknown model family: " + std::string(name));
}

// Minimal fit on one random sample; retried until the candidate lies in the
// domain of every datum. The last candidate is returned if none does.
Eigen::VectorXd ModelEstimator::random_parameters(std::mt19937_64 &rng) const {
    const std::size_t k = minimal_sample_size();
    if (size() < k)
        throw std::invalid_argument("not enough data for a minimal sample");
    std::vector<std::size_t> all(size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> sample(k);

    std::optional<Eigen::VectorXd> fallback;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::sample(all.begin(), all.end(), sample.begin(), k, rng);
        for (auto &x : minimal_solve(sample)) {
            if ((denominators(instance(), x).array() >= instance().domain_margin()).all())
                return x;
            if (!fallback)
                fallback = x;
        }
    }
    if (fallback)
        return *fallback;
    throw std::runtime_error("no non-degenerate minimal sample found");
}

}  // namespace maxcon
