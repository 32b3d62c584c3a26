#ifndef MAXCON_PROBLEM_H_
#define MAXCON_PROBLEM_H_

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace maxcon {

/// One datum's quasiconvex residual
///
///   r(x) = || numerator * [x; 1] ||_2 / (denominator * [x; 1])
///
/// The numerator is an m x (d+1) affine map, the denominator an affine
/// functional of length d+1. Both act on the homogenized parameter vector.
struct ResidualFunctional {
    Eigen::MatrixXd numerator;
    Eigen::RowVectorXd denominator;

    int rows() const { return static_cast<int>(numerator.rows()); }
    int dimension() const { return static_cast<int>(numerator.cols()) - 1; }

    // q(x) and p(x)
    double numerator_norm(const Eigen::VectorXd &x) const;
    double denominator_value(const Eigen::VectorXd &x) const;

    /// True when the denominator has no dependence on x (e.g. regression).
    bool constant_denominator() const;
};

/// Consensus maximization problem: N residual functionals sharing a
/// parameter space of dimension d, an inlier threshold and a domain margin.
///
/// The domain is closed: x is admissible for datum i when p_i(x) >= margin.
/// Functionals are stored stacked so that all numerators can be evaluated
/// with one matrix-vector product.
class ConsensusInstance {
  public:
    ConsensusInstance(std::vector<ResidualFunctional> functionals, double epsilon,
                      double domain_margin = 1e-6);

    std::size_t size() const { return offsets_.size() - 1; }
    int dimension() const { return dimension_; }
    double epsilon() const { return epsilon_; }
    double domain_margin() const { return domain_margin_; }

    ResidualFunctional functional(std::size_t i) const;
    int rows(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

    /// Block of numerator rows for datum i.
    auto numerator_block(std::size_t i) const {
        return numerators_.middleRows(offsets_[i], rows(i));
    }
    auto denominator_row(std::size_t i) const { return denominators_.row(i); }

    const Eigen::MatrixXd &stacked_numerators() const { return numerators_; }
    const Eigen::MatrixXd &stacked_denominators() const { return denominators_; }
    int row_offset(std::size_t i) const { return offsets_[i]; }

    /// Copy with a different domain margin (same functionals).
    ConsensusInstance with_domain_margin(double margin) const;
    ConsensusInstance with_epsilon(double epsilon) const;

  private:
    ConsensusInstance() = default;

    Eigen::MatrixXd numerators_;
    Eigen::MatrixXd denominators_;
    std::vector<int> offsets_;
    int dimension_ = 0;
    double epsilon_ = 0.0;
    double domain_margin_ = 0.0;
};

/// A parameter vector with its consensus and inlier mask.
struct Estimate {
    Eigen::VectorXd x;
    std::size_t consensus = 0;
    std::vector<bool> inlier_mask;

    std::vector<std::size_t> inlier_indices() const;
};

/// r_i(x), or nullopt when x violates p_i(x) >= margin.
std::optional<double> residual(const ConsensusInstance &inst, std::size_t i,
                               const Eigen::VectorXd &x);

/// r'_i(x) = q_i(x) - epsilon * p_i(x). Defined everywhere.
double shifted_residual(const ConsensusInstance &inst, std::size_t i, const Eigen::VectorXd &x);

/// Shifted residuals of every datum.
Eigen::VectorXd shifted_residuals(const ConsensusInstance &inst, const Eigen::VectorXd &x);

/// Denominator values p_i(x) of every datum.
Eigen::VectorXd denominators(const ConsensusInstance &inst, const Eigen::VectorXd &x);

/// Inlier count. Datum i is an inlier iff r'_i(x) <= 0 and p_i(x) >= margin.
Estimate consensus(const ConsensusInstance &inst, const Eigen::VectorXd &x);

/// Cheaper variant used in sampling loops: count only.
std::size_t consensus_count(const ConsensusInstance &inst, const Eigen::VectorXd &x);

/// Domain margin derived from an estimate: scale * median |p_i(x0)|.
/// Falls back to `scale` when all denominators vanish.
double domain_margin_from(const ConsensusInstance &inst, const Eigen::VectorXd &x0,
                          double scale = 1e-6);

}  // namespace maxcon

#endif  // MAXCON_PROBLEM_H_
