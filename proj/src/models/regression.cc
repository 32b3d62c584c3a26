#include "maxcon/models/regression.h"

#include <stdexcept>

namespace maxcon {

namespace {

std::vector<ResidualFunctional> regression_functionals(const std::vector<RegressionDatum> &data) {
    if (data.empty())
        throw std::invalid_argument("regression needs at least one datum");
    const auto d = data.front().a.size();
    std::vector<ResidualFunctional> out;
    out.reserve(data.size());
    for (const auto &datum : data) {
        if (datum.a.size() != d || d == 0)
            throw std::invalid_argument("regression data disagree on dimension");
        ResidualFunctional f;
        f.numerator.resize(1, d + 1);
        f.numerator.leftCols(d) = datum.a.transpose();
        f.numerator(0, d) = -datum.b;
        f.denominator = Eigen::RowVectorXd::Zero(d + 1);
        f.denominator(d) = 1.0;
        out.push_back(std::move(f));
    }
    return out;
}

std::optional<Eigen::VectorXd> solve_rows(const std::vector<RegressionDatum> &data,
                                          std::span<const std::size_t> idx, Eigen::Index d) {
    if (static_cast<Eigen::Index>(idx.size()) < d)
        return std::nullopt;
    Eigen::MatrixXd a(static_cast<Eigen::Index>(idx.size()), d);
    Eigen::VectorXd b(a.rows());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        const auto &datum = data.at(idx[static_cast<std::size_t>(r)]);
        a.row(r) = datum.a.transpose();
        b(r) = datum.b;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto &sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(0) > kDegenerateCondition * sv(d - 1))
        return std::nullopt;
    return Eigen::VectorXd(svd.solve(b));
}

}  // namespace

ConsensusInstance build_regression_instance(const std::vector<RegressionDatum> &data, double epsilon) {
    return ConsensusInstance(regression_functionals(data), epsilon);
}

RegressionProblem::RegressionProblem(std::vector<RegressionDatum> data, double epsilon)
    : data_(std::move(data)), instance_(build_regression_instance(data_, epsilon)) {}

std::vector<Eigen::VectorXd> RegressionProblem::minimal_solve(std::span<const std::size_t> sample) const {
    if (sample.size() != minimal_sample_size())
        throw std::invalid_argument("regression minimal sample has wrong size");
    if (auto x = solve_rows(data_, sample, dimension()))
        return {*x};
    return {};
}

std::optional<Eigen::VectorXd> RegressionProblem::least_squares(std::span<const std::size_t> subset) const {
    return solve_rows(data_, subset, dimension());
}

Eigen::VectorXd RegressionProblem::random_parameters(std::mt19937_64 &rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd x(dimension());
    for (auto &v : x)
        v = normal(rng);
    return x;
}

}  // namespace maxcon
