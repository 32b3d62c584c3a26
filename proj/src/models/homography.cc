#include "maxcon/models/homography.h"

#include <stdexcept>

namespace maxcon {

namespace {

std::vector<Eigen::Vector2d> column(const std::vector<Correspondence> &data, bool first) {
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(data.size());
    for (const auto &c : data)
        pts.push_back(first ? c.u : c.v);
    return pts;
}

}  // namespace

HomographyProblem::HomographyProblem(std::vector<Correspondence> data, double epsilon)
    : data_(std::move(data)),
      t1_(hartley_normalization(column(data_, true))),
      t2_(hartley_normalization(column(data_, false))),
      instance_(build_homography_instance(data_, epsilon)) {
    normalized_.reserve(data_.size());
    for (const auto &c : data_)
        normalized_.push_back({apply_transform(t1_, c.u), apply_transform(t2_, c.v)});
}

ConsensusInstance build_homography_instance(const std::vector<Correspondence> &corrs, double epsilon) {
    if (corrs.size() < 4)
        throw std::invalid_argument("homography needs at least four correspondences");
    const Eigen::Matrix3d t1 = hartley_normalization(column(corrs, true));
    const Eigen::Matrix3d t2 = hartley_normalization(column(corrs, false));
    // Distances in the normalized second image are scaled by t2(0,0).
    const double to_pixels = 1.0 / t2(0, 0);

    std::vector<ResidualFunctional> fs;
    fs.reserve(corrs.size());
    for (const auto &c : corrs) {
        const Eigen::Vector2d u = apply_transform(t1, c.u);
        const Eigen::Vector2d v = apply_transform(t2, c.v);
        // Parameters [h11 h12 h13 h21 h22 h23 h31 h32 | 1].
        ResidualFunctional f;
        f.numerator = Eigen::MatrixXd::Zero(2, 9);
        f.numerator.row(0) << u.x(), u.y(), 1, 0, 0, 0, -v.x() * u.x(), -v.x() * u.y(), -v.x();
        f.numerator.row(1) << 0, 0, 0, u.x(), u.y(), 1, -v.y() * u.x(), -v.y() * u.y(), -v.y();
        f.numerator *= to_pixels;
        f.denominator = Eigen::RowVectorXd::Zero(9);
        f.denominator << 0, 0, 0, 0, 0, 0, u.x(), u.y(), 1;
        fs.push_back(std::move(f));
    }
    return ConsensusInstance(std::move(fs), epsilon);
}

std::optional<Eigen::VectorXd> HomographyProblem::dlt(std::span<const std::size_t> idx) const {
    Eigen::MatrixXd a(2 * static_cast<Eigen::Index>(idx.size()), 9);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto &c = normalized_.at(idx[k]);
        const double x = c.u.x(), y = c.u.y(), xp = c.v.x(), yp = c.v.y();
        const auto r = 2 * static_cast<Eigen::Index>(k);
        a.row(r) << x, y, 1, 0, 0, 0, -xp * x, -xp * y, -xp;
        a.row(r + 1) << 0, 0, 0, x, y, 1, -yp * x, -yp * y, -yp;
    }
    const auto h = null_vector(a, 8);
    if (!h)
        return std::nullopt;
    Eigen::Matrix3d hn;
    hn << (*h)(0), (*h)(1), (*h)(2), (*h)(3), (*h)(4), (*h)(5), (*h)(6), (*h)(7), (*h)(8);
    return params_from_matrix(hn);
}

std::vector<Eigen::VectorXd> HomographyProblem::minimal_solve(std::span<const std::size_t> sample) const {
    if (sample.size() != 4)
        throw std::invalid_argument("homography minimal sample needs four correspondences");
    if (auto x = dlt(sample))
        return {*x};
    return {};
}

std::optional<Eigen::VectorXd> HomographyProblem::least_squares(std::span<const std::size_t> subset) const {
    if (subset.size() < 4)
        return std::nullopt;
    return dlt(subset);
}

Eigen::Matrix3d HomographyProblem::to_matrix(const Eigen::VectorXd &params) const {
    return t2_.inverse() * matrix_from_params(params) * t1_;
}

std::optional<Eigen::VectorXd> HomographyProblem::to_params(const Eigen::Matrix3d &h) const {
    return params_from_matrix(t2_ * h * t1_.inverse());
}

}  // namespace maxcon
