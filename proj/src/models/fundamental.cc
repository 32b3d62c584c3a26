#include "maxcon/models/fundamental.h"

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

// Coefficients of vec(F) (row-major) in v~' F u~.
Eigen::Matrix<double, 1, 9> epipolar_row(const Eigen::Vector2d &u, const Eigen::Vector2d &v) {
    Eigen::Matrix<double, 1, 9> row;
    row << v.x() * u.x(), v.x() * u.y(), v.x(), v.y() * u.x(), v.y() * u.y(), v.y(), u.x(), u.y(), 1.0;
    return row;
}

}  // namespace

ConsensusInstance build_fundamental_instance(const std::vector<Correspondence> &corrs, double epsilon) {
    if (corrs.size() < 8)
        throw std::invalid_argument("fundamental matrix needs at least eight correspondences");
    const Eigen::Matrix3d t1 = hartley_normalization(column(corrs, true));
    const Eigen::Matrix3d t2 = hartley_normalization(column(corrs, false));
    std::vector<ResidualFunctional> fs;
    fs.reserve(corrs.size());
    for (const auto &c : corrs) {
        ResidualFunctional f;
        f.numerator = epipolar_row(apply_transform(t1, c.u), apply_transform(t2, c.v));
        f.denominator = Eigen::RowVectorXd::Zero(9);
        f.denominator(8) = 1.0;
        fs.push_back(std::move(f));
    }
    return ConsensusInstance(std::move(fs), epsilon);
}

FundamentalProblem::FundamentalProblem(std::vector<Correspondence> data, double epsilon)
    : data_(std::move(data)),
      t1_(hartley_normalization(column(data_, true))),
      t2_(hartley_normalization(column(data_, false))),
      instance_(build_fundamental_instance(data_, epsilon)) {
    normalized_.reserve(data_.size());
    for (const auto &c : data_)
        normalized_.push_back({apply_transform(t1_, c.u), apply_transform(t2_, c.v)});
}

std::optional<Eigen::Matrix3d> FundamentalProblem::eight_point_unprojected(
    std::span<const std::size_t> idx) const {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(idx.size()), 9);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto &c = normalized_.at(idx[k]);
        a.row(static_cast<Eigen::Index>(k)) = epipolar_row(c.u, c.v);
    }
    const auto f = null_vector(a, 8);
    if (!f)
        return std::nullopt;
    Eigen::Matrix3d m;
    m << (*f)(0), (*f)(1), (*f)(2), (*f)(3), (*f)(4), (*f)(5), (*f)(6), (*f)(7), (*f)(8);
    return m;
}

std::optional<Eigen::VectorXd> FundamentalProblem::fit(std::span<const std::size_t> idx) const {
    const auto f = eight_point_unprojected(idx);
    if (!f)
        return std::nullopt;
    const Rank2Projection proj = rank2_project(*f);
    if (!proj.rescaled)
        return std::nullopt;
    return params_from_matrix(proj.matrix);
}

std::vector<Eigen::VectorXd> FundamentalProblem::minimal_solve(std::span<const std::size_t> sample) const {
    if (sample.size() != 8)
        throw std::invalid_argument("fundamental minimal sample needs eight correspondences");
    if (auto x = fit(sample))
        return {*x};
    return {};
}

std::optional<Eigen::VectorXd> FundamentalProblem::least_squares(std::span<const std::size_t> subset) const {
    if (subset.size() < 8)
        return std::nullopt;
    return fit(subset);
}

std::optional<Eigen::VectorXd> FundamentalProblem::project(const Eigen::VectorXd &x) const {
    const Rank2Projection proj = rank2_project(matrix_from_params(x));
    if (!proj.rescaled)
        return std::nullopt;
    return params_from_matrix(proj.matrix);
}

Eigen::Matrix3d FundamentalProblem::to_matrix(const Eigen::VectorXd &params) const {
    return t2_.transpose() * matrix_from_params(params) * t1_;
}

std::optional<Eigen::VectorXd> FundamentalProblem::to_params(const Eigen::Matrix3d &f) const {
    return params_from_matrix(t2_.transpose().inverse() * f * t1_.inverse());
}

}  // namespace maxcon
