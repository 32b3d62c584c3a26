#ifndef MAXCON_IBCO_H_
#define MAXCON_IBCO_H_

#include "maxcon/bco.h"
#include "maxcon/problem.h"

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace maxcon {

/// Model-specific map applied to every BCO output before it is scored,
/// e.g. the rank-2 projection for fundamental matrices. Returning nullopt
/// discards the BCO output.
using PostStep = std::function<std::optional<Eigen::VectorXd>(const Eigen::VectorXd &)>;

struct BisectionStep {
    std::size_t delta_low = 0;   // bounds entering the step
    std::size_t delta_high = 0;
    std::size_t delta = 0;
    std::size_t achieved = 0;    // I(x^) after the post step
    std::size_t bco_consensus = 0;  // I(x^) straight out of BCO
    bool adopted = false;
    std::size_t next_low = 0;    // bounds leaving the step
    std::size_t next_high = 0;
    BcoResult bco;
};

struct BisectionTrace {
    std::vector<BisectionStep> steps;
    Estimate best;
    std::size_t final_low = 0;
    std::size_t final_high = 0;
};

struct IbcoResult {
    Estimate estimate;
    BisectionTrace trace;
    bool solver_failure = false;
};

struct IbcoOptions {
    BcoLimits bco;
};

/// Bisection over the target consensus with BCO as the feasibility test.
/// The incumbent only changes on strict improvement, so the returned
/// consensus is never below I(x0).
IbcoResult run_ibco(const ConsensusInstance &inst, const Eigen::VectorXd &x0,
                    const PostStep &post_step = {}, const IbcoOptions &options = {});

/// Instance whose domain margin is 1e-6 times the median |p_i(x0)|.
ConsensusInstance calibrate_domain_margin(const ConsensusInstance &inst, const Eigen::VectorXd &x0);

}  // namespace maxcon

#endif  // MAXCON_IBCO_H_
