#ifndef MAXCON_MODELS_ESTIMATOR_H_
#define MAXCON_MODELS_ESTIMATOR_H_

#include "maxcon/problem.h"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace maxcon {

enum class Family { regression, homography, triangulation, fundamental };

std::string_view to_string(Family family);
/// Throws std::invalid_argument on an unknown name.
Family family_from_string(std::string_view name);

/// A model family bound to its data: builds the consensus instance and
/// provides the sampling-side machinery (minimal and least-squares fits).
///
/// Parameter vectors live in the family's parameter frame; for the
/// geometric families that is a Hartley-normalized frame with the last
/// matrix entry fixed to one.
class ModelEstimator {
  public:
    virtual ~ModelEstimator() = default;

    virtual Family family() const = 0;
    virtual std::size_t minimal_sample_size() const = 0;
    virtual const ConsensusInstance &instance() const = 0;

    std::size_t size() const { return instance().size(); }
    int dimension() const { return instance().dimension(); }

    /// Candidate models through a minimal sample; empty when degenerate.
    virtual std::vector<Eigen::VectorXd> minimal_solve(std::span<const std::size_t> sample) const = 0;

    /// Algebraic least-squares fit on a subset; nullopt when rank deficient.
    virtual std::optional<Eigen::VectorXd> least_squares(std::span<const std::size_t> subset) const = 0;

    /// Post-processing applied after each refinement (identity by default).
    virtual std::optional<Eigen::VectorXd> project(const Eigen::VectorXd &x) const { return x; }

    /// Replaces the instance's domain margin (used after calibration).
    virtual void set_domain_margin(double margin) = 0;

    /// A random in-domain parameter vector.
    virtual Eigen::VectorXd random_parameters(std::mt19937_64 &rng) const;
};

/// Condition number above which a design matrix counts as degenerate.
inline constexpr double kDegenerateCondition = 1e10;

}  // namespace maxcon

#endif  // MAXCON_MODELS_ESTIMATOR_H_
