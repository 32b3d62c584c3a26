#ifndef MAXCON_MODELS_TRIANGULATION_H_
#define MAXCON_MODELS_TRIANGULATION_H_

#include "maxcon/models/estimator.h"
#include "maxcon/models/geometry.h"

#include <vector>

namespace maxcon {

/// Multiview triangulation of one 3D point with reprojection residuals
///
///   r_i(X) = ||(P_i^{1:2} - u_i P_i^3) [X; 1]|| / (P_i^3 [X; 1]),
///
/// whose denominator (the depth) must stay positive in every view.
class TriangulationProblem final : public ModelEstimator {
  public:
    TriangulationProblem(std::vector<ViewObservation> views, double epsilon);

    Family family() const override { return Family::triangulation; }
    std::size_t minimal_sample_size() const override { return 2; }
    const ConsensusInstance &instance() const override { return instance_; }
    void set_domain_margin(double margin) override { instance_ = instance_.with_domain_margin(margin); }

    std::vector<Eigen::VectorXd> minimal_solve(std::span<const std::size_t> sample) const override;
    std::optional<Eigen::VectorXd> least_squares(std::span<const std::size_t> subset) const override;

    const std::vector<ViewObservation> &views() const { return views_; }

  private:
    std::optional<Eigen::VectorXd> dlt(std::span<const std::size_t> idx) const;

    std::vector<ViewObservation> views_;
    ConsensusInstance instance_;
};

ConsensusInstance build_triangulation_instance(const std::vector<ViewObservation> &views,
                                               double epsilon);

}  // namespace maxcon

#endif  // MAXCON_MODELS_TRIANGULATION_H_
