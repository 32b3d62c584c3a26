#include "maxcon/models/triangulation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace maxcon {

ConsensusInstance build_triangulation_instance(const std::vector<ViewObservation> &views,
                                               double epsilon) {
    if (views.size() < 2)
        throw std::invalid_argument("triangulation needs at least two views");
    std::vector<ResidualFunctional> fs;
    fs.reserve(views.size());
    for (const auto &view : views) {
        const auto &p = view.camera;
        ResidualFunctional f;
        f.numerator.resize(2, 4);
        f.numerator.row(0) = p.row(0) - view.point.x() * p.row(2);
        f.numerator.row(1) = p.row(1) - view.point.y() * p.row(2);
        f.denominator = p.row(2);
        fs.push_back(std::move(f));
    }
    return ConsensusInstance(std::move(fs), epsilon);
}

TriangulationProblem::TriangulationProblem(std::vector<ViewObservation> views, double epsilon)
    : views_(std::move(views)), instance_(build_triangulation_instance(views_, epsilon)) {}

std::optional<Eigen::VectorXd> TriangulationProblem::dlt(std::span<const std::size_t> idx) const {
    Eigen::MatrixXd a(2 * static_cast<Eigen::Index>(idx.size()), 4);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto &view = views_.at(idx[k]);
        const auto r = 2 * static_cast<Eigen::Index>(k);
        a.row(r) = view.point.x() * view.camera.row(2) - view.camera.row(0);
        a.row(r + 1) = view.point.y() * view.camera.row(2) - view.camera.row(1);
        // Row scaling leaves the null space unchanged and balances views.
        for (Eigen::Index j : {r, r + 1}) {
            const double n = a.row(j).norm();
            if (n > 0.0)
                a.row(j) /= n;
        }
    }
    const auto xh = null_vector(a, 3);
    if (!xh || !(std::abs((*xh)(3)) > 1e-12 * xh->norm()))
        return std::nullopt;
    return Eigen::VectorXd(xh->head(3) / (*xh)(3));
}

std::vector<Eigen::VectorXd> TriangulationProblem::minimal_solve(std::span<const std::size_t> sample) const {
    if (sample.size() != 2)
        throw std::invalid_argument("triangulation minimal sample needs two views");
    if (auto x = dlt(sample))
        return {*x};
    return {};
}

std::optional<Eigen::VectorXd> TriangulationProblem::least_squares(std::span<const std::size_t> subset) const {
    if (subset.size() < 2)
        return std::nullopt;
    return dlt(subset);
}

}  // namespace maxcon
