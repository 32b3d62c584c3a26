#include "maxcon/ibco.h"

#include <algorithm>

namespace maxcon {

ConsensusInstance calibrate_domain_margin(const ConsensusInstance &inst, const Eigen::VectorXd &x0) {
    return inst.with_domain_margin(domain_margin_from(inst, x0));
}

IbcoResult run_ibco(const ConsensusInstance &inst, const Eigen::VectorXd &x0,
                    const PostStep &post_step, const IbcoOptions &options) {
    const std::size_t n = inst.size();
    IbcoResult result;
    Estimate incumbent = consensus(inst, x0);
    std::size_t low = incumbent.consensus;
    std::size_t high = n;

    while (high > low + 1) {
        BisectionStep step;
        step.delta_low = low;
        step.delta_high = high;
        step.delta = (low + high) / 2;

        step.bco = run_bco(inst, incumbent.x, step.delta, options.bco);
        result.solver_failure = result.solver_failure || step.bco.solver_failure;
        const Eigen::VectorXd &x_bco = step.bco.state.x;
        step.bco_consensus = consensus_count(inst, x_bco);

        std::optional<Eigen::VectorXd> candidate = x_bco;
        if (post_step)
            candidate = post_step(x_bco);
        Estimate scored;
        if (candidate)
            scored = consensus(inst, *candidate);
        step.achieved = scored.consensus;

        if (candidate && scored.consensus > incumbent.consensus) {
            incumbent = std::move(scored);
            low = incumbent.consensus;
            step.adopted = true;
        }
        if (step.achieved < step.delta)
            high = step.delta;
        // The upper bound is a heuristic certificate; an incumbent reaching
        // it closes the search.
        if (low >= high)
            high = std::min(n, low + 1);

        step.next_low = low;
        step.next_high = high;
        result.trace.steps.push_back(std::move(step));
    }

    result.trace.final_low = low;
    result.trace.final_high = high;
    result.trace.best = incumbent;
    result.estimate = std::move(incumbent);
    return result;
}

}  // namespace maxcon
