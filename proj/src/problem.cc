#include "maxcon/problem.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maxcon {

namespace {

Eigen::VectorXd homogenize(const Eigen::VectorXd &x) {
    Eigen::VectorXd xh(x.size() + 1);
    xh.head(x.size()) = x;
    xh(x.size()) = 1.0;
    return xh;
}

void check_parameter(const ConsensusInstance &inst, const Eigen::VectorXd &x) {
    if (x.size() != inst.dimension())
        throw std::invalid_argument("parameter vector has wrong dimension");
}

}  // namespace

double ResidualFunctional::numerator_norm(const Eigen::VectorXd &x) const {
    return (numerator.leftCols(x.size()) * x + numerator.col(x.size())).norm();
}

double ResidualFunctional::denominator_value(const Eigen::VectorXd &x) const {
    return denominator.head(x.size()).dot(x) + denominator(x.size());
}

bool ResidualFunctional::constant_denominator() const {
    return denominator.head(denominator.size() - 1).isZero(0.0);
}

ConsensusInstance::ConsensusInstance(std::vector<ResidualFunctional> functionals, double epsilon,
                                     double domain_margin)
    : epsilon_(epsilon), domain_margin_(domain_margin) {
    if (functionals.empty())
        throw std::invalid_argument("consensus instance needs at least one datum");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("inlier threshold must be finite and nonnegative");
    if (!(domain_margin > 0.0))
        throw std::invalid_argument("domain margin must be positive");

    dimension_ = functionals.front().dimension();
    if (dimension_ < 1)
        throw std::invalid_argument("parameter dimension must be positive");

    offsets_.reserve(functionals.size() + 1);
    offsets_.push_back(0);
    for (const auto &f : functionals) {
        if (f.rows() < 1)
            throw std::invalid_argument("residual numerator needs at least one row");
        if (f.dimension() != dimension_ || f.denominator.size() != dimension_ + 1)
            throw std::invalid_argument("residual functionals disagree on dimension");
        if (!f.numerator.allFinite() || !f.denominator.allFinite())
            throw std::invalid_argument("residual functional has non-finite entries");
        offsets_.push_back(offsets_.back() + f.rows());
    }

    numerators_.resize(offsets_.back(), dimension_ + 1);
    denominators_.resize(static_cast<Eigen::Index>(functionals.size()), dimension_ + 1);
    for (std::size_t i = 0; i < functionals.size(); ++i) {
        numerators_.middleRows(offsets_[i], functionals[i].rows()) = functionals[i].numerator;
        denominators_.row(static_cast<Eigen::Index>(i)) = functionals[i].denominator;
    }
}

ResidualFunctional ConsensusInstance::functional(std::size_t i) const {
    return {numerator_block(i), denominator_row(i)};
}

ConsensusInstance ConsensusInstance::with_domain_margin(double margin) const {
    if (!(margin > 0.0))
        throw std::invalid_argument("domain margin must be positive");
    ConsensusInstance copy = *this;
    copy.domain_margin_ = margin;
    return copy;
}

ConsensusInstance ConsensusInstance::with_epsilon(double epsilon) const {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("inlier threshold must be finite and nonnegative");
    ConsensusInstance copy = *this;
    copy.epsilon_ = epsilon;
    return copy;
}

std::vector<std::size_t> Estimate::inlier_indices() const {
    std::vector<std::size_t> idx;
    idx.reserve(consensus);
    for (std::size_t i = 0; i < inlier_mask.size(); ++i)
        if (inlier_mask[i])
            idx.push_back(i);
    return idx;
}

std::optional<double> residual(const ConsensusInstance &inst, std::size_t i,
                               const Eigen::VectorXd &x) {
    check_parameter(inst, x);
    if (i >= inst.size())
        throw std::out_of_range("datum index out of range");
    const Eigen::VectorXd xh = homogenize(x);
    const double p = inst.denominator_row(i).dot(xh);
    if (p < inst.domain_margin())
        return std::nullopt;
    return (inst.numerator_block(i) * xh).norm() / p;
}

double shifted_residual(const ConsensusInstance &inst, std::size_t i, const Eigen::VectorXd &x) {
    check_parameter(inst, x);
    if (i >= inst.size())
        throw std::out_of_range("datum index out of range");
    const Eigen::VectorXd xh = homogenize(x);
    return (inst.numerator_block(i) * xh).norm() - inst.epsilon() * inst.denominator_row(i).dot(xh);
}

Eigen::VectorXd shifted_residuals(const ConsensusInstance &inst, const Eigen::VectorXd &x) {
    check_parameter(inst, x);
    const Eigen::VectorXd xh = homogenize(x);
    const Eigen::VectorXd num = inst.stacked_numerators() * xh;
    const Eigen::VectorXd den = inst.stacked_denominators() * xh;
    Eigen::VectorXd out(static_cast<Eigen::Index>(inst.size()));
    for (std::size_t i = 0; i < inst.size(); ++i)
        out(i) = num.segment(inst.row_offset(i), inst.rows(i)).norm() - inst.epsilon() * den(i);
    return out;
}

Eigen::VectorXd denominators(const ConsensusInstance &inst, const Eigen::VectorXd &x) {
    check_parameter(inst, x);
    return inst.stacked_denominators() * homogenize(x);
}

Estimate consensus(const ConsensusInstance &inst, const Eigen::VectorXd &x) {
    check_parameter(inst, x);
    const Eigen::VectorXd xh = homogenize(x);
    const Eigen::VectorXd num = inst.stacked_numerators() * xh;
    const Eigen::VectorXd den = inst.stacked_denominators() * xh;

    Estimate est;
    est.x = x;
    est.inlier_mask.assign(inst.size(), false);
    for (std::size_t i = 0; i < inst.size(); ++i) {
        const double q = num.segment(inst.row_offset(i), inst.rows(i)).norm();
        if (den(i) >= inst.domain_margin() && q - inst.epsilon() * den(i) <= 0.0) {
            est.inlier_mask[i] = true;
            ++est.consensus;
        }
    }
    return est;
}

std::size_t consensus_count(const ConsensusInstance &inst, const Eigen::VectorXd &x) {
    check_parameter(inst, x);
    const Eigen::VectorXd xh = homogenize(x);
    const Eigen::VectorXd num = inst.stacked_numerators() * xh;
    const Eigen::VectorXd den = inst.stacked_denominators() * xh;
    std::size_t count = 0;
    for (std::size_t i = 0; i < inst.size(); ++i) {
        const double q = num.segment(inst.row_offset(i), inst.rows(i)).norm();
        if (den(i) >= inst.domain_margin() && q - inst.epsilon() * den(i) <= 0.0)
            ++count;
    }
    return count;
}

double domain_margin_from(const ConsensusInstance &inst, const Eigen::VectorXd &x0, double scale) {
    Eigen::VectorXd p = denominators(inst, x0).cwiseAbs();
    std::vector<double> values(p.data(), p.data() + p.size());
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    const double median = *mid;
    if (!(median > 0.0) || !std::isfinite(median))
        return scale;
    return scale * median;
}

}  // namespace maxcon
