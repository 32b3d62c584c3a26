#ifndef MAXCON_MODELS_GEOMETRY_H_
#define MAXCON_MODELS_GEOMETRY_H_

#include <Eigen/Dense>

#include <optional>
#include <span>

namespace maxcon {

struct Correspondence {
    Eigen::Vector2d u;  // image 1, pixels
    Eigen::Vector2d v;  // image 2, pixels
};

struct ViewObservation {
    Eigen::Matrix<double, 3, 4> camera;
    Eigen::Vector2d point;
};

/// Isotropic normalization: centroid to the origin, mean distance sqrt(2).
Eigen::Matrix3d hartley_normalization(std::span<const Eigen::Vector2d> points);

inline Eigen::Vector2d apply_transform(const Eigen::Matrix3d &t, const Eigen::Vector2d &p) {
    return (t * p.homogeneous()).hnormalized();
}

/// Smallest right singular vector of a design matrix, or nullopt when
/// sigma_1 / sigma_{rank} exceeds kDegenerateCondition.
std::optional<Eigen::VectorXd> null_vector(const Eigen::MatrixXd &design, int rank);

struct Rank2Projection {
    Eigen::Matrix3d nearest;  // closest rank <= 2 matrix in Frobenius norm
    Eigen::Matrix3d matrix;   // nearest, rescaled so that entry (2,2) is 1
    bool rescaled = false;    // false when entry (2,2) vanished
};

Rank2Projection rank2_project(const Eigen::Matrix3d &f);

/// Row-major 3x3 matrix with unit last entry <-> its first eight entries.
Eigen::Matrix3d matrix_from_params(const Eigen::VectorXd &params);
/// nullopt when |m(2,2)| is negligible relative to ||m||.
std::optional<Eigen::VectorXd> params_from_matrix(const Eigen::Matrix3d &m);

}  // namespace maxcon

#endif  // MAXCON_MODELS_GEOMETRY_H_
