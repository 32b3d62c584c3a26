#ifndef MAXCON_BCO_H_
#define MAXCON_BCO_H_

#include "maxcon/problem.h"
#include "maxcon/subproblem.h"

#include <cstddef>
#include <vector>

namespace maxcon {

struct BcoLimits {
    double zero_tolerance = 1e-9;
    double relative_decrease = 1e-9;
    int max_cycles = 200;
    /// BCO works with the threshold eps * (1 - shrink), so a numerically
    /// zero objective leaves the assigned data strictly inside eps.
    double threshold_shrink = 1e-6;
    SubproblemOptions socp;
};

/// One (y, x-s) cycle. Objectives are those of the shrunk-threshold program;
/// consensus is counted with the instance's own threshold.
/// `objective_after_xs` is what the conic step produced
/// at its returned x, before the acceptance test; `accepted` is false when
/// that point was discarded in favour of the previous x.
struct BcoIteration {
    int cycle = 0;
    double objective_after_y = 0.0;
    double objective_after_xs = 0.0;
    std::size_t consensus = 0;  // I(x) after the cycle
    SolveStatus status = SolveStatus::optimal;
    double kkt_residual = 0.0;
    bool accepted = true;
};

struct BcoResult {
    BiconvexState state;
    int iterations = 0;
    bool converged_to_zero = false;
    bool solver_failure = false;
    std::vector<BcoIteration> trace;
};

/// Alternates the closed-form assignment step and the conic (x, s) step,
/// starting from x0 with slacks max(0, r'_i(x0)). Stops once the objective
/// is numerically zero, stops decreasing, or the cycle cap is hit.
BcoResult run_bco(const ConsensusInstance &inst, const Eigen::VectorXd &x0, std::size_t delta,
                  const BcoLimits &limits = {});

}  // namespace maxcon

#endif  // MAXCON_BCO_H_
