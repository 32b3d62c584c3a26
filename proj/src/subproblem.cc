#include "maxcon/subproblem.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace maxcon {

Eigen::VectorXd init_slacks(const ConsensusInstance &inst, const Eigen::VectorXd &x0) {
    return shifted_residuals(inst, x0).cwiseMax(0.0);
}

Eigen::VectorXd y_step(const Eigen::VectorXd &slacks, std::size_t delta) {
    const auto n = static_cast<std::size_t>(slacks.size());
    if (delta < 1 || delta > n)
        throw std::invalid_argument("invalid target consensus for assignment step");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return slacks(static_cast<Eigen::Index>(a)) < slacks(static_cast<Eigen::Index>(b));
    });
    Eigen::VectorXd y = Eigen::VectorXd::Zero(slacks.size());
    for (std::size_t k = 0; k < delta; ++k)
        y(static_cast<Eigen::Index>(order[k])) = 1.0;
    return y;
}

double assignment_objective(const Eigen::VectorXd &assignment, const Eigen::VectorXd &slacks) {
    return assignment.dot(slacks);
}

XsProgram build_xs_program(const ConsensusInstance &inst, const Eigen::VectorXd &assignment,
                           const Eigen::VectorXd &x_warm, const SubproblemOptions &options) {
    const int d = inst.dimension();
    const double eps = inst.epsilon();
    if (assignment.size() != static_cast<Eigen::Index>(inst.size()))
        throw std::invalid_argument("assignment length differs from instance size");

    XsProgram out;
    for (std::size_t i = 0; i < inst.size(); ++i)
        if (assignment(static_cast<Eigen::Index>(i)) > 0.5)
            out.active.push_back(i);

    ConeProgram &p = out.program;
    p.shared_dim = d;
    p.local_dim = static_cast<int>(out.active.size());
    p.shared_cost = Eigen::VectorXd::Zero(d);
    p.local_cost = Eigen::VectorXd::Ones(p.local_dim);

    for (int k = 0; k < p.local_dim; ++k) {
        const std::size_t i = out.active[static_cast<std::size_t>(k)];
        const auto num = inst.numerator_block(i);
        const auto den = inst.denominator_row(i);
        const int m = inst.rows(i);

        if (m == 1) {
            // |n x~| <= eps p(x) + s  as two half-spaces, plus s >= 0.
            ConeBlock b;
            b.kind = ConeKind::nonnegative;
            b.local = k;
            b.shared_coeffs.resize(3, d);
            b.shared_coeffs.row(0) = -(eps * den.head(d) - num.row(0).head(d));
            b.shared_coeffs.row(1) = -(eps * den.head(d) + num.row(0).head(d));
            b.shared_coeffs.row(2).setZero();
            b.local_coeffs = -Eigen::VectorXd::Ones(3);
            b.offset.resize(3);
            b.offset << eps * den(d) - num(0, d), eps * den(d) + num(0, d), 0.0;
            p.blocks.push_back(std::move(b));
            continue;
        }

        // (eps p(x) + s, M x~) in the second-order cone.
        ConeBlock soc;
        soc.kind = ConeKind::second_order;
        soc.local = k;
        soc.shared_coeffs.resize(m + 1, d);
        soc.shared_coeffs.row(0) = -eps * den.head(d);
        soc.shared_coeffs.bottomRows(m) = -num.leftCols(d);
        soc.local_coeffs = Eigen::VectorXd::Zero(m + 1);
        soc.local_coeffs(0) = -1.0;
        soc.offset.resize(m + 1);
        soc.offset(0) = eps * den(d);
        soc.offset.tail(m) = num.col(d);
        p.blocks.push_back(std::move(soc));

        ConeBlock nonneg;
        nonneg.kind = ConeKind::nonnegative;
        nonneg.local = k;
        nonneg.shared_coeffs = Eigen::MatrixXd::Zero(1, d);
        nonneg.local_coeffs = -Eigen::VectorXd::Ones(1);
        nonneg.offset = Eigen::VectorXd::Zero(1);
        p.blocks.push_back(std::move(nonneg));
    }

    // Domain p_j(x) >= margin for every datum whose denominator depends on x.
    std::vector<std::size_t> domain_rows;
    for (std::size_t j = 0; j < inst.size(); ++j)
        if (!inst.denominator_row(j).head(d).isZero(0.0))
            domain_rows.push_back(j);
    if (!domain_rows.empty()) {
        ConeBlock b;
        b.kind = ConeKind::nonnegative;
        const auto rows = static_cast<Eigen::Index>(domain_rows.size());
        b.shared_coeffs.resize(rows, d);
        b.offset.resize(rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const auto den = inst.denominator_row(domain_rows[static_cast<std::size_t>(r)]);
            b.shared_coeffs.row(r) = -den.head(d);
            b.offset(r) = den(d) - inst.domain_margin();
        }
        p.blocks.push_back(std::move(b));
    }

    ConeBlock ball;
    ball.kind = ConeKind::second_order;
    ball.shared_coeffs = Eigen::MatrixXd::Zero(d + 1, d);
    ball.shared_coeffs.bottomRows(d) = -Eigen::MatrixXd::Identity(d, d);
    ball.offset.resize(d + 1);
    ball.offset(0) = options.trust_radius_factor * (1.0 + x_warm.norm());
    ball.offset.tail(d) = -x_warm;
    p.blocks.push_back(std::move(ball));

    return out;
}

SocpSolution x_s_step(const ConsensusInstance &inst, const Eigen::VectorXd &assignment,
                      const Eigen::VectorXd &x_warm, const SubproblemOptions &options) {
    const XsProgram xs = build_xs_program(inst, assignment, x_warm, options);

    SocpSolution out;
    if (xs.active.empty()) {
        out.x = x_warm;
        out.slacks = init_slacks(inst, x_warm);
        out.status = SolveStatus::optimal;
        return out;
    }

    // Warm start: x from the previous iterate, slacks from the shifted
    // residuals there, nudged off the cone boundary.
    const Eigen::VectorXd r = shifted_residuals(inst, x_warm);
    Eigen::VectorXd t0(static_cast<Eigen::Index>(xs.active.size()));
    for (std::size_t k = 0; k < xs.active.size(); ++k) {
        const double rk = r(static_cast<Eigen::Index>(xs.active[k]));
        t0(static_cast<Eigen::Index>(k)) = std::max(0.0, rk) + 1e-3 * (1.0 + std::abs(rk));
    }

    ConeSolverOptions solver;
    solver.tolerance = options.tolerance;
    solver.max_iterations = options.max_iterations;
    const ConeSolution sol = solve_cone_program(xs.program, x_warm, t0, solver);

    out.x = sol.x;
    out.status = sol.status;
    out.kkt_residual = sol.kkt_residual;
    out.iterations = sol.iterations;
    // For fixed x the optimal slack of every datum is max(0, r'_i(x)).
    out.slacks = init_slacks(inst, out.x);
    out.objective = assignment_objective(assignment, out.slacks);
    return out;
}

}  // namespace maxcon
