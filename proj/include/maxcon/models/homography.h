#ifndef MAXCON_MODELS_HOMOGRAPHY_H_
#define MAXCON_MODELS_HOMOGRAPHY_H_

#include "maxcon/models/estimator.h"
#include "maxcon/models/geometry.h"

#include <vector>

namespace maxcon {

/// Homography fitting with the one-sided transfer error in image 2 (pixels).
///
/// Both images are Hartley-normalized; the parameter vector holds the first
/// eight entries of the normalized homography Hn (Hn(2,2) = 1), related to
/// the pixel homography by H = T2^{-1} Hn T1. The numerator is rescaled so
/// residuals stay in pixels.
class HomographyProblem final : public ModelEstimator {
  public:
    HomographyProblem(std::vector<Correspondence> data, double epsilon);

    Family family() const override { return Family::homography; }
    std::size_t minimal_sample_size() const override { return 4; }
    const ConsensusInstance &instance() const override { return instance_; }
    void set_domain_margin(double margin) override { instance_ = instance_.with_domain_margin(margin); }

    std::vector<Eigen::VectorXd> minimal_solve(std::span<const std::size_t> sample) const override;
    std::optional<Eigen::VectorXd> least_squares(std::span<const std::size_t> subset) const override;

    Eigen::Matrix3d to_matrix(const Eigen::VectorXd &params) const;
    std::optional<Eigen::VectorXd> to_params(const Eigen::Matrix3d &h) const;

    const std::vector<Correspondence> &data() const { return data_; }
    const Eigen::Matrix3d &t1() const { return t1_; }
    const Eigen::Matrix3d &t2() const { return t2_; }

  private:
    std::optional<Eigen::VectorXd> dlt(std::span<const std::size_t> idx) const;

    std::vector<Correspondence> data_;
    std::vector<Correspondence> normalized_;
    Eigen::Matrix3d t1_, t2_;
    ConsensusInstance instance_;
};

ConsensusInstance build_homography_instance(const std::vector<Correspondence> &corrs, double epsilon);

}  // namespace maxcon

#endif  // MAXCON_MODELS_HOMOGRAPHY_H_
