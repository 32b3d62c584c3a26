#include "maxcon/cone_program.h"

#include <gtest/gtest.h>

#include <random>

using namespace maxcon;

TEST(ConeProgram, Smoke) {
    // minimize t s.t. |x - 3| <= t  ->  t = 0 at x = 3
    ConeProgram p;
    p.shared_dim = 1;
    p.local_dim = 1;
    p.shared_cost = Eigen::VectorXd::Zero(1);
    p.local_cost = Eigen::VectorXd::Ones(1);
    ConeBlock b;
    b.kind = ConeKind::second_order;
    b.shared_coeffs = Eigen::MatrixXd::Zero(2, 1);
    b.shared_coeffs(1, 0) = -1;
    b.local = 0;
    b.local_coeffs = Eigen::VectorXd::Zero(2);
    b.local_coeffs(0) = -1;
    b.offset = Eigen::VectorXd::Zero(2);
    b.offset(1) = -3;
    p.blocks.push_back(b);
    ConeBlock nn;
    nn.shared_coeffs = Eigen::MatrixXd::Zero(1, 1);
    nn.local = 0;
    nn.local_coeffs = -Eigen::VectorXd::Ones(1);
    nn.offset = Eigen::VectorXd::Zero(1);
    p.blocks.push_back(nn);
    auto sol = solve_cone_program(p, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1) * 5);
    EXPECT_EQ(sol.status, SolveStatus::optimal);
    EXPECT_NEAR(sol.x(0), 3.0, 1e-6);
    EXPECT_NEAR(sol.t(0), 0.0, 1e-6);
}

namespace {

using cone::Scaling;

Eigen::VectorXd random_interior(ConeKind kind, int rows, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Eigen::VectorXd u = Eigen::VectorXd::NullaryExpr(rows, [&] { return g(rng); });
    if (kind == ConeKind::nonnegative)
        return u.cwiseAbs().array() + 0.1;
    u(0) = u.tail(rows - 1).norm() + 0.1 + std::abs(g(rng));
    return u;
}

bool in_cone(ConeKind kind, const Eigen::VectorXd &u, double slack = 0.0) {
    if (kind == ConeKind::nonnegative)
        return u.minCoeff() >= -slack;
    return u(0) - u.tail(u.size() - 1).norm() >= -slack;
}

// Independent KKT evaluation from the returned iterates: rebuild G and h
// from the blocks and check primal feasibility, stationarity, cone
// membership and complementarity.
double kkt_violation(const ConeProgram &p, const ConeSolution &sol) {
    Eigen::VectorXd grad_x = p.shared_cost;
    Eigen::VectorXd grad_t = p.local_cost;
    double worst = 0.0;
    double gap = 0.0;
    for (std::size_t k = 0; k < p.blocks.size(); ++k) {
        const ConeBlock &b = p.blocks[k];
        Eigen::VectorXd gz = b.shared_coeffs * sol.x;
        if (b.local >= 0)
            gz += b.local_coeffs * sol.t(b.local);
        const Eigen::VectorXd s = b.offset - gz;
        const Eigen::VectorXd &lam = sol.dual[k];
        worst = std::max(worst, (s - sol.slack[k]).norm() / (1 + b.offset.norm()));
        // membership up to the primal and dual feasibility tolerance
        worst = std::max(worst, in_cone(b.kind, s, 1e-8 * (1 + b.offset.norm())) ? 0.0 : 1.0);
        worst = std::max(worst, in_cone(b.kind, lam, 1e-8 * (1 + lam.norm())) ? 0.0 : 1.0);
        grad_x += b.shared_coeffs.transpose() * lam;
        if (b.local >= 0)
            grad_t(b.local) += b.local_coeffs.dot(lam);
        gap += s.dot(lam);
    }
    const double scale = 1 + std::abs(sol.primal_objective);
    worst = std::max(worst, grad_x.norm() / (1 + p.shared_cost.norm()));
    worst = std::max(worst, grad_t.norm() / (1 + p.local_cost.norm()));
    worst = std::max(worst, std::abs(gap) / scale);
    return worst;
}

}  // namespace

TEST(ConeAlgebra, NesterovToddScaling) {
    std::mt19937_64 rng(1);
    for (ConeKind kind : {ConeKind::nonnegative, ConeKind::second_order})
        for (int t = 0; t < 50; ++t) {
            const int rows = 2 + t % 4;
            const Eigen::VectorXd s = random_interior(kind, rows, rng);
            const Eigen::VectorXd z = random_interior(kind, rows, rng);
            const Scaling w = cone::nt_scaling(kind, s, z);
            EXPECT_LE((w.w * z - w.lambda).norm(), 1e-10 * (1 + w.lambda.norm()));
            EXPECT_LE((w.w_inv * s - w.lambda).norm(), 1e-10 * (1 + w.lambda.norm()));
            EXPECT_LE((w.w * w.w_inv - Eigen::MatrixXd::Identity(rows, rows)).norm(), 1e-10);
            EXPECT_TRUE(in_cone(kind, w.lambda));
        }
}

TEST(ConeAlgebra, JordanDivideInvertsProduct) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (ConeKind kind : {ConeKind::nonnegative, ConeKind::second_order})
        for (int t = 0; t < 50; ++t) {
            const Eigen::VectorXd lambda = random_interior(kind, 4, rng);
            const Eigen::VectorXd r = Eigen::VectorXd::NullaryExpr(4, [&] { return g(rng); });
            const Eigen::VectorXd x = cone::jordan_divide(kind, lambda, r);
            EXPECT_LE((cone::jordan_product(kind, lambda, x) - r).norm(), 1e-9 * (1 + r.norm()));
            const Eigen::VectorXd e = cone::identity(kind, 4);
            EXPECT_LE((cone::jordan_product(kind, e, r) - r).norm(), 1e-14 * (1 + r.norm()));
        }
}

TEST(ConeAlgebra, MaxStepMatchesBisection) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (ConeKind kind : {ConeKind::nonnegative, ConeKind::second_order})
        for (int t = 0; t < 100; ++t) {
            const Eigen::VectorXd u = random_interior(kind, 5, rng);
            const Eigen::VectorXd du = Eigen::VectorXd::NullaryExpr(5, [&] { return 3 * g(rng); });
            const double alpha = cone::max_step(kind, u, du);
            // bisection oracle on membership
            double lo = 0.0, hi = 1e6;
            if (in_cone(kind, u + hi * du)) {
                EXPECT_TRUE(std::isinf(alpha) || alpha > 1e5);
                continue;
            }
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                (in_cone(kind, u + mid * du) ? lo : hi) = mid;
            }
            EXPECT_NEAR(alpha, lo, 1e-8 * (1 + lo));
        }
}

TEST(ConeAlgebra, InteriorDepth) {
    EXPECT_LT(cone::interior_depth(ConeKind::second_order, Eigen::Vector3d(2, 0, 1)), 0.0);
    EXPECT_GT(cone::interior_depth(ConeKind::second_order, Eigen::Vector3d(0, 0, 1)), 0.0);
    EXPECT_NEAR(cone::interior_depth(ConeKind::nonnegative, Eigen::Vector2d(-3, 5)), 3.0, 1e-15);
}

TEST(ConeProgram, LeastNormResidualMatchesLeastSquares) {
    // minimize t s.t. ||A x - b|| <= t
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 8, d = 3;
        const Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(m, d, [&] { return g(rng); });
        const Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(m, [&] { return g(rng); });
        ConeProgram p;
        p.shared_dim = d;
        p.local_dim = 1;
        p.shared_cost = Eigen::VectorXd::Zero(d);
        p.local_cost = Eigen::VectorXd::Ones(1);
        ConeBlock soc;
        soc.kind = ConeKind::second_order;
        soc.shared_coeffs = Eigen::MatrixXd::Zero(m + 1, d);
        soc.shared_coeffs.bottomRows(m) = a;
        soc.local = 0;
        soc.local_coeffs = Eigen::VectorXd::Zero(m + 1);
        soc.local_coeffs(0) = -1;
        soc.offset = Eigen::VectorXd::Zero(m + 1);
        soc.offset.tail(m) = b;
        p.blocks.push_back(soc);

        const ConeSolution sol = solve_cone_program(p, Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(1));
        ASSERT_EQ(sol.status, SolveStatus::optimal);
        const Eigen::VectorXd x_ls = a.colPivHouseholderQr().solve(b);
        EXPECT_NEAR(sol.t(0), (a * x_ls - b).norm(), 1e-7);
        EXPECT_LE((sol.x - x_ls).norm(), 1e-5);
        EXPECT_LE(sol.kkt_residual, 1e-8);
        EXPECT_LE(kkt_violation(p, sol), 1e-7);
    }
}

TEST(ConeProgram, TwoDimensionalLpMatchesVertexEnumeration) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 30; ++trial) {
        // random half-planes around the origin plus a box keep it bounded
        const int m = 6;
        Eigen::MatrixXd a(m + 4, 2);
        Eigen::VectorXd b(m + 4);
        for (int i = 0; i < m; ++i) {
            a.row(i) << g(rng), g(rng);
            b(i) = 1.0 + std::abs(g(rng));
        }
        a.bottomRows(4) << 1, 0, -1, 0, 0, 1, 0, -1;
        b.tail(4).setConstant(5.0);
        const Eigen::Vector2d c(g(rng), g(rng));

        ConeProgram p;
        p.shared_dim = 2;
        p.shared_cost = c;
        p.local_cost = Eigen::VectorXd(0);
        ConeBlock lin;
        lin.shared_coeffs = a;
        lin.offset = b;
        p.blocks.push_back(lin);
        const ConeSolution sol = solve_cone_program(p, Eigen::VectorXd::Zero(2), Eigen::VectorXd(0));
        ASSERT_EQ(sol.status, SolveStatus::optimal);

        double best = 1e300;
        for (int i = 0; i < m + 4; ++i)
            for (int j = i + 1; j < m + 4; ++j) {
                Eigen::Matrix2d v;
                v << a.row(i), a.row(j);
                if (std::abs(v.determinant()) < 1e-12)
                    continue;
                const Eigen::Vector2d x = v.partialPivLu().solve(Eigen::Vector2d(b(i), b(j)));
                if (((a * x - b).array() <= 1e-9).all())
                    best = std::min(best, c.dot(x));
            }
        EXPECT_NEAR(sol.primal_objective, best, 1e-6 * (1 + std::abs(best)));
        EXPECT_LE(kkt_violation(p, sol), 1e-7);
    }
}

TEST(ConeProgram, InfeasibleStartIsShifted) {
    // minimize t s.t. |x - 3| <= t, t >= 0, started far outside the cone
    ConeProgram p;
    p.shared_dim = 1;
    p.local_dim = 1;
    p.shared_cost = Eigen::VectorXd::Zero(1);
    p.local_cost = Eigen::VectorXd::Ones(1);
    ConeBlock b;
    b.kind = ConeKind::second_order;
    b.shared_coeffs = Eigen::MatrixXd::Zero(2, 1);
    b.shared_coeffs(1, 0) = -1;
    b.local = 0;
    b.local_coeffs = Eigen::Vector2d(-1, 0);
    b.offset = Eigen::Vector2d(0, -3);
    p.blocks.push_back(b);
    const ConeSolution sol = solve_cone_program(p, Eigen::VectorXd::Constant(1, 100.0), Eigen::VectorXd::Constant(1, -7.0));
    EXPECT_EQ(sol.status, SolveStatus::optimal);
    EXPECT_NEAR(sol.x(0), 3.0, 1e-6);
    EXPECT_LE(kkt_violation(p, sol), 1e-7);
}

TEST(ConeProgram, MalformedProgramsThrow) {
    ConeProgram p;
    p.shared_dim = 1;
    p.local_dim = 1;
    p.shared_cost = Eigen::VectorXd::Zero(1);
    p.local_cost = Eigen::VectorXd::Ones(1);
    // private variable without any constraint
    EXPECT_THROW(solve_cone_program(p, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)), std::invalid_argument);
    ConeBlock b;
    b.kind = ConeKind::second_order;
    b.shared_coeffs = Eigen::MatrixXd::Zero(1, 1);
    b.local = 0;
    b.local_coeffs = Eigen::VectorXd::Ones(1);
    b.offset = Eigen::VectorXd::Zero(1);
    p.blocks.push_back(b);
    EXPECT_THROW(solve_cone_program(p, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)), std::invalid_argument);
}
