#ifndef MAXCON_MODELS_FUNDAMENTAL_H_
#define MAXCON_MODELS_FUNDAMENTAL_H_

#include "maxcon/models/estimator.h"
#include "maxcon/models/geometry.h"

#include <vector>

namespace maxcon {

/// Fundamental matrix fitting with the linearized epipolar constraint.
///
/// The residual is the algebraic error |vn' Fn un| in Hartley-normalized
/// coordinates, with Fn(2,2) fixed to one; it is linear in the eight free
/// entries, so the denominator is the constant 1. The threshold is read in
/// the normalized frame. Pixel F = T2' Fn T1.
class FundamentalProblem final : public ModelEstimator {
  public:
    FundamentalProblem(std::vector<Correspondence> data, double epsilon);

    Family family() const override { return Family::fundamental; }
    std::size_t minimal_sample_size() const override { return 8; }
    const ConsensusInstance &instance() const override { return instance_; }
    void set_domain_margin(double margin) override { instance_ = instance_.with_domain_margin(margin); }

    /// Normalized 8-point algorithm followed by the rank-2 projection.
    std::vector<Eigen::VectorXd> minimal_solve(std::span<const std::size_t> sample) const override;
    std::optional<Eigen::VectorXd> least_squares(std::span<const std::size_t> subset) const override;
    /// Rank-2 projection of Fn, rescaled to Fn(2,2) = 1.
    std::optional<Eigen::VectorXd> project(const Eigen::VectorXd &x) const override;

    /// Null vector of the 8-point design matrix before any rank-2 projection.
    std::optional<Eigen::Matrix3d> eight_point_unprojected(std::span<const std::size_t> idx) const;

    /// Pixel-frame F (rank 2 up to rounding).
    Eigen::Matrix3d to_matrix(const Eigen::VectorXd &params) const;
    std::optional<Eigen::VectorXd> to_params(const Eigen::Matrix3d &f) const;

    const std::vector<Correspondence> &data() const { return data_; }
    const Eigen::Matrix3d &t1() const { return t1_; }
    const Eigen::Matrix3d &t2() const { return t2_; }

  private:
    std::optional<Eigen::VectorXd> fit(std::span<const std::size_t> idx) const;

    std::vector<Correspondence> data_;
    std::vector<Correspondence> normalized_;
    Eigen::Matrix3d t1_, t2_;
    ConsensusInstance instance_;
};

ConsensusInstance build_fundamental_instance(const std::vector<Correspondence> &corrs, double epsilon);

}  // namespace maxcon

#endif  // MAXCON_MODELS_FUNDAMENTAL_H_
