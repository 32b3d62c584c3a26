#ifndef MAXCON_MODELS_REGRESSION_H_
#define MAXCON_MODELS_REGRESSION_H_

#include "maxcon/models/estimator.h"

#include <vector>

namespace maxcon {

struct RegressionDatum {
    Eigen::VectorXd a;
    double b = 0.0;
};

/// Residual |a' x - b|: numerator row [a', -b], constant unit denominator.
ConsensusInstance build_regression_instance(const std::vector<RegressionDatum> &data, double epsilon);

class RegressionProblem final : public ModelEstimator {
  public:
    RegressionProblem(std::vector<RegressionDatum> data, double epsilon);

    Family family() const override { return Family::regression; }
    std::size_t minimal_sample_size() const override { return static_cast<std::size_t>(dimension()); }
    const ConsensusInstance &instance() const override { return instance_; }
    void set_domain_margin(double margin) override { instance_ = instance_.with_domain_margin(margin); }

    std::vector<Eigen::VectorXd> minimal_solve(std::span<const std::size_t> sample) const override;
    std::optional<Eigen::VectorXd> least_squares(std::span<const std::size_t> subset) const override;
    /// Standard normal entries.
    Eigen::VectorXd random_parameters(std::mt19937_64 &rng) const override;

    const std::vector<RegressionDatum> &data() const { return data_; }

  private:
    std::vector<RegressionDatum> data_;
    ConsensusInstance instance_;
};

}  // namespace maxcon

#endif  // MAXCON_MODELS_REGRESSION_H_
