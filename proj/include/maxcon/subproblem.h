#ifndef MAXCON_SUBPROBLEM_H_
#define MAXCON_SUBPROBLEM_H_

#include "maxcon/cone_program.h"
#include "maxcon/problem.h"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace maxcon {

/// Current (x, s, y) of the biconvex program and its objective sum_i y_i s_i.
struct BiconvexState {
    Eigen::VectorXd x;
    Eigen::VectorXd slacks;
    Eigen::VectorXd assignment;
    double objective = 0.0;
};

struct SocpSolution {
    Eigen::VectorXd x;
    Eigen::VectorXd slacks;  // all N data, max(0, r'_i(x))
    double objective = 0.0;  // sum over active data of slacks
    SolveStatus status = SolveStatus::numerical_failure;
    double kkt_residual = 0.0;
    int iterations = 0;
};

struct SubproblemOptions {
    double tolerance = 1e-8;
    int max_iterations = 100;
    /// Radius of the ball ||x - x_warm|| <= factor * (1 + ||x_warm||) that
    /// keeps the conic program bounded when the active data do not pin x.
    double trust_radius_factor = 1e3;
};

/// s_i = max(0, r'_i(x0)).
Eigen::VectorXd init_slacks(const ConsensusInstance &inst, const Eigen::VectorXd &x0);

/// Closed-form assignment step: y_i = 1 for the delta smallest slacks
/// (ties to the lower index), 0 elsewhere.
Eigen::VectorXd y_step(const Eigen::VectorXd &slacks, std::size_t delta);

/// sum_i y_i s_i.
double assignment_objective(const Eigen::VectorXd &assignment, const Eigen::VectorXd &slacks);

/// Conic form of the (x, s) step for a fixed binary assignment. Private
/// variable k is the slack of datum active[k].
struct XsProgram {
    ConeProgram program;
    std::vector<std::size_t> active;
};

XsProgram build_xs_program(const ConsensusInstance &inst, const Eigen::VectorXd &assignment,
                           const Eigen::VectorXd &x_warm, const SubproblemOptions &options = {});

/// (x, s) step: minimize sum_{y_i = 1} s_i s.t. s_i >= r'_i(x), s_i >= 0 and
/// p_j(x) >= margin for every datum. Inactive slacks are back-filled from x.
SocpSolution x_s_step(const ConsensusInstance &inst, const Eigen::VectorXd &assignment,
                      const Eigen::VectorXd &x_warm, const SubproblemOptions &options = {});

}  // namespace maxcon

#endif  // MAXCON_SUBPROBLEM_H_
