#include "maxcon/bco.h"

#include <stdexcept>

namespace maxcon {

BcoResult run_bco(const ConsensusInstance &inst, const Eigen::VectorXd &x0, std::size_t delta,
                  const BcoLimits &limits) {
    if (delta < 1 || delta > inst.size())
        throw std::invalid_argument("target consensus out of range");

    const ConsensusInstance shrunk = inst.with_epsilon(inst.epsilon() * (1.0 - limits.threshold_shrink));

    BcoResult result;
    BiconvexState &st = result.state;
    st.x = x0;
    st.slacks = init_slacks(shrunk, x0);

    double cycle_start = -1.0;
    for (int cycle = 1; cycle <= limits.max_cycles; ++cycle) {
        BcoIteration rec;
        rec.cycle = cycle;

        st.assignment = y_step(st.slacks, delta);
        st.objective = assignment_objective(st.assignment, st.slacks);
        rec.objective_after_y = st.objective;
        if (cycle_start < 0.0)
            cycle_start = st.objective;

        if (st.objective <= limits.zero_tolerance) {
            rec.objective_after_xs = st.objective;
            rec.consensus = consensus_count(inst, st.x);
            result.trace.push_back(rec);
            break;
        }

        const SocpSolution sol = x_s_step(shrunk, st.assignment, st.x, limits.socp);
        rec.objective_after_xs = sol.objective;
        rec.status = sol.status;
        rec.kkt_residual = sol.kkt_residual;
        result.iterations = cycle;

        const bool failed = sol.status != SolveStatus::optimal;
        if (sol.objective <= st.objective) {
            st.x = sol.x;
            st.slacks = sol.slacks;
            st.objective = sol.objective;
        } else {
            rec.accepted = false;
        }
        rec.consensus = consensus_count(inst, st.x);
        result.trace.push_back(rec);

        if (failed) {
            result.solver_failure = true;
            break;
        }
        if (!rec.accepted || st.objective <= limits.zero_tolerance)
            break;
        if (cycle_start - st.objective < limits.relative_decrease * cycle_start)
            break;
        cycle_start = st.objective;
    }

    result.converged_to_zero = st.objective <= limits.zero_tolerance;
    return result;
}

}  // namespace maxcon
