#include "maxcon/models/geometry.h"

#include "maxcon/models/estimator.h"

#include <cmath>
#include <stdexcept>

namespace maxcon {

Eigen::Matrix3d hartley_normalization(std::span<const Eigen::Vector2d> points) {
    if (points.empty())
        throw std::invalid_argument("normalization needs at least one point");
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto &p : points)
        centroid += p;
    centroid /= static_cast<double>(points.size());
    double mean_dist = 0.0;
    for (const auto &p : points)
        mean_dist += (p - centroid).norm();
    mean_dist /= static_cast<double>(points.size());
    const double scale = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;

    Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
    t(0, 0) = t(1, 1) = scale;
    t(0, 2) = -scale * centroid.x();
    t(1, 2) = -scale * centroid.y();
    return t;
}

std::optional<Eigen::VectorXd> null_vector(const Eigen::MatrixXd &design, int rank) {
    if (design.rows() < rank || rank < 1 || rank >= design.cols())
        return std::nullopt;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeFullV);
    const auto &sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(0) > kDegenerateCondition * sv(rank - 1))
        return std::nullopt;
    return Eigen::VectorXd(svd.matrixV().col(design.cols() - 1));
}

Rank2Projection rank2_project(const Eigen::Matrix3d &f) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Vector3d sv = svd.singularValues();
    sv(2) = 0.0;
    Rank2Projection out;
    out.nearest = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
    out.matrix = out.nearest;
    const double corner = out.nearest(2, 2);
    if (std::abs(corner) > 1e-12 * out.nearest.norm()) {
        out.matrix /= corner;
        out.rescaled = true;
    }
    return out;
}

Eigen::Matrix3d matrix_from_params(const Eigen::VectorXd &params) {
    if (params.size() != 8)
        throw std::invalid_argument("3x3 parameterization needs eight entries");
    Eigen::Matrix3d m;
    m << params(0), params(1), params(2), params(3), params(4), params(5), params(6), params(7), 1.0;
    return m;
}

std::optional<Eigen::VectorXd> params_from_matrix(const Eigen::Matrix3d &m) {
    const double corner = m(2, 2);
    if (!(std::abs(corner) > 1e-12 * m.norm()))
        return std::nullopt;
    const Eigen::Matrix3d n = m / corner;
    Eigen::VectorXd p(8);
    p << n(0, 0), n(0, 1), n(0, 2), n(1, 0), n(1, 1), n(1, 2), n(2, 0), n(2, 1);
    return p;
}

}  // namespace maxcon
