#ifndef MAXCON_CONE_PROGRAM_H_
#define MAXCON_CONE_PROGRAM_H_

#include <Eigen/Dense>

#include <vector>

namespace maxcon {

enum class ConeKind { nonnegative, second_order };

/// One conic constraint  h - G * [x; t] in K.
///
/// The variable vector splits into shared variables x (dense, small) and
/// private variables t. A block couples all of x with at most one private
/// variable, which keeps the normal equations block-arrow shaped: the
/// private block is diagonal and eliminates in closed form.
struct ConeBlock {
    ConeKind kind = ConeKind::nonnegative;
    Eigen::MatrixXd shared_coeffs;  // rows x dim(x)
    int local = -1;                 // private variable index, or -1
    Eigen::VectorXd local_coeffs;   // rows; ignored when local < 0
    Eigen::VectorXd offset;         // h

    int rows() const { return static_cast<int>(offset.size()); }
};

/// minimize  shared_cost' x + local_cost' t   subject to every ConeBlock.
struct ConeProgram {
    int shared_dim = 0;
    int local_dim = 0;
    Eigen::VectorXd shared_cost;
    Eigen::VectorXd local_cost;
    std::vector<ConeBlock> blocks;

    /// Order of the cone (orthant rows + number of second-order cones).
    int degree() const;
};

struct ConeSolverOptions {
    double tolerance = 1e-8;
    int max_iterations = 100;
    int refinement_steps = 2;
};

enum class SolveStatus { optimal, max_iterations, numerical_failure };

const char *to_string(SolveStatus status);

struct ConeSolution {
    Eigen::VectorXd x;
    Eigen::VectorXd t;
    std::vector<Eigen::VectorXd> slack;  // s_k = h_k - G_k [x; t]
    std::vector<Eigen::VectorXd> dual;   // multipliers, one per block
    SolveStatus status = SolveStatus::numerical_failure;
    int iterations = 0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double primal_residual = 0.0;  // ||G z + s - h|| / max(1, ||h||)
    double dual_residual = 0.0;    // ||G' lambda + c|| / max(1, ||c||)
    double gap = 0.0;              // s' lambda
    double kkt_residual = 0.0;
};

/// Primal-dual interior point method with Nesterov-Todd scaling and a
/// Mehrotra predictor-corrector step. The start point is (x0, t0); blocks
/// whose slack is not strictly interior are shifted along the cone identity,
/// so an infeasible start is fine.
ConeSolution solve_cone_program(const ConeProgram &program, const Eigen::VectorXd &x0,
                                const Eigen::VectorXd &t0, const ConeSolverOptions &options = {});

namespace cone {

// Cone algebra used by the solver; exposed for tests.

/// Nesterov-Todd scaling of one block at (s, z): W z = W^{-T} s = lambda.
struct Scaling {
    ConeKind kind = ConeKind::nonnegative;
    Eigen::MatrixXd w;      // W (symmetric for both cone kinds)
    Eigen::MatrixXd w_inv;  // W^{-1}
    Eigen::VectorXd lambda;
};

Scaling nt_scaling(ConeKind kind, const Eigen::VectorXd &s, const Eigen::VectorXd &z);

/// Jordan product u o v.
Eigen::VectorXd jordan_product(ConeKind kind, const Eigen::VectorXd &u, const Eigen::VectorXd &v);

/// Solves lambda o x = r for x.
Eigen::VectorXd jordan_divide(ConeKind kind, const Eigen::VectorXd &lambda,
                              const Eigen::VectorXd &r);

Eigen::VectorXd identity(ConeKind kind, int rows);

/// Largest alpha >= 0 such that u + alpha du stays in the cone (inf if unbounded).
double max_step(ConeKind kind, const Eigen::VectorXd &u, const Eigen::VectorXd &du);

/// Smallest alpha with u + alpha e in the cone; negative when u is interior.
double interior_depth(ConeKind kind, const Eigen::VectorXd &u);

}  // namespace cone

}  // namespace maxcon

#endif  // MAXCON_CONE_PROGRAM_H_
