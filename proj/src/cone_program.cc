#include "maxcon/cone_program.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace maxcon {

int ConeProgram::degree() const {
    int deg = 0;
    for (const auto &b : blocks)
        deg += b.kind == ConeKind::nonnegative ? b.rows() : 1;
    return deg;
}

const char *to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::optimal:
        return "optimal";
    case SolveStatus::max_iterations:
        return "max-iterations";
    case SolveStatus::numerical_failure:
        return "numerical-failure";
    }
    return "unknown";
}

namespace cone {

namespace {

// u' J u computed as a product of factors to limit cancellation.
double lorentz_norm2(const Eigen::VectorXd &u) {
    const double tail = u.tail(u.size() - 1).norm();
    return (u(0) - tail) * (u(0) + tail);
}

Eigen::VectorXd reflect(const Eigen::VectorXd &u) {
    Eigen::VectorXd r = -u;
    r(0) = u(0);
    return r;
}

}  // namespace

Scaling nt_scaling(ConeKind kind, const Eigen::VectorXd &s, const Eigen::VectorXd &z) {
    Scaling sc;
    sc.kind = kind;
    const auto m = s.size();
    if (kind == ConeKind::nonnegative) {
        const Eigen::ArrayXd d = (s.array() / z.array()).sqrt();
        sc.w = d.matrix().asDiagonal();
        sc.w_inv = d.inverse().matrix().asDiagonal();
        sc.lambda = (s.array() * z.array()).sqrt().matrix();
        return sc;
    }

    const double s_norm = std::sqrt(lorentz_norm2(s));
    const double z_norm = std::sqrt(lorentz_norm2(z));
    const Eigen::VectorXd sb = s / s_norm;
    const Eigen::VectorXd zb = z / z_norm;
    const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
    const Eigen::VectorXd wb = (sb + reflect(zb)) / (2.0 * gamma);
    const double beta = std::sqrt(s_norm / z_norm);

    Eigen::VectorXd v = wb;
    v(0) += 1.0;
    v /= std::sqrt(2.0 * (wb(0) + 1.0));
    const Eigen::VectorXd jv = reflect(v);

    Eigen::MatrixXd j = -Eigen::MatrixXd::Identity(m, m);
    j(0, 0) = 1.0;
    sc.w = beta * (2.0 * v * v.transpose() - j);
    sc.w_inv = (2.0 * jv * jv.transpose() - j) / beta;
    // lambda = W z from the normalized vectors; forming the product with W
    // directly cancels badly near the cone boundary.
    const double scale = std::sqrt(s_norm * z_norm);
    const double denom = 2.0 * gamma + sb(0) + zb(0);
    sc.lambda.resize(m);
    sc.lambda(0) = gamma * scale;
    sc.lambda.tail(m - 1) = ((gamma + zb(0)) * sb.tail(m - 1) + (gamma + sb(0)) * zb.tail(m - 1)) *
                            (scale / denom);
    return sc;
}

Eigen::VectorXd jordan_product(ConeKind kind, const Eigen::VectorXd &u, const Eigen::VectorXd &v) {
    if (kind == ConeKind::nonnegative)
        return u.cwiseProduct(v);
    Eigen::VectorXd r(u.size());
    r(0) = u.dot(v);
    r.tail(u.size() - 1) = u(0) * v.tail(v.size() - 1) + v(0) * u.tail(u.size() - 1);
    return r;
}

Eigen::VectorXd jordan_divide(ConeKind kind, const Eigen::VectorXd &lambda,
                              const Eigen::VectorXd &r) {
    if (kind == ConeKind::nonnegative)
        return r.cwiseQuotient(lambda);
    const auto n = lambda.size() - 1;
    const double det = lorentz_norm2(lambda);
    Eigen::VectorXd x(lambda.size());
    x(0) = (lambda(0) * r(0) - lambda.tail(n).dot(r.tail(n))) / det;
    x.tail(n) = (r.tail(n) - x(0) * lambda.tail(n)) / lambda(0);
    return x;
}

Eigen::VectorXd identity(ConeKind kind, int rows) {
    if (kind == ConeKind::nonnegative)
        return Eigen::VectorXd::Ones(rows);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(rows);
    e(0) = 1.0;
    return e;
}

double max_step(ConeKind kind, const Eigen::VectorXd &u, const Eigen::VectorXd &du) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (kind == ConeKind::nonnegative) {
        double alpha = inf;
        for (Eigen::Index i = 0; i < u.size(); ++i)
            if (du(i) < 0.0)
                alpha = std::min(alpha, -u(i) / du(i));
        return alpha;
    }

    // f(alpha) = (u0 + alpha du0)^2 - ||u1 + alpha du1||^2 = a alpha^2 + b alpha + c,
    // c > 0. The first positive root of f bounds the step.
    const auto n = u.size() - 1;
    const double a = du(0) * du(0) - du.tail(n).squaredNorm();
    const double b = 2.0 * (u(0) * du(0) - u.tail(n).dot(du.tail(n)));
    const double c = lorentz_norm2(u);
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    if (scale == 0.0)
        return inf;

    double alpha = inf;
    if (std::abs(a) <= 1e-14 * scale) {
        if (b < 0.0)
            alpha = -c / b;
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
            const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
            for (double root : {q / a, q != 0.0 ? c / q : inf})
                if (root > 0.0)
                    alpha = std::min(alpha, root);
        }
    }
    // Guard the branch u0 + alpha du0 >= 0 of the double cone.
    if (du(0) < 0.0)
        alpha = std::min(alpha, -u(0) / du(0));
    return alpha;
}

double interior_depth(ConeKind kind, const Eigen::VectorXd &u) {
    if (kind == ConeKind::nonnegative)
        return -u.minCoeff();
    return u.tail(u.size() - 1).norm() - u(0);
}

}  // namespace cone

namespace {

using BlockVectors = std::vector<Eigen::VectorXd>;

double dot(const BlockVectors &a, const BlockVectors &b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        sum += a[k].dot(b[k]);
    return sum;
}

double norm(const BlockVectors &a) { return std::sqrt(dot(a, a)); }

// Stacked variable z = [x; t].
struct Point {
    Eigen::VectorXd x;
    Eigen::VectorXd t;
};

class KktSolver {
  public:
    explicit KktSolver(const ConeProgram &p) : p_(p), by_local_(static_cast<std::size_t>(p.local_dim)) {
        for (std::size_t k = 0; k < p.blocks.size(); ++k) {
            if (p.blocks[k].local >= 0)
                by_local_[static_cast<std::size_t>(p.blocks[k].local)].push_back(k);
            else
                shared_only_.push_back(k);
        }
    }

    // G z, per block.
    BlockVectors apply(const Point &z) const {
        BlockVectors out(p_.blocks.size());
        for (std::size_t k = 0; k < p_.blocks.size(); ++k) {
            const auto &b = p_.blocks[k];
            out[k] = b.shared_coeffs * z.x;
            if (b.local >= 0)
                out[k] += b.local_coeffs * z.t(b.local);
        }
        return out;
    }

    // G' v.
    Point apply_transpose(const BlockVectors &v) const {
        Point out{Eigen::VectorXd::Zero(p_.shared_dim), Eigen::VectorXd::Zero(p_.local_dim)};
        for (std::size_t k = 0; k < p_.blocks.size(); ++k) {
            const auto &b = p_.blocks[k];
            out.x.noalias() += b.shared_coeffs.transpose() * v[k];
            if (b.local >= 0)
                out.t(b.local) += b.local_coeffs.dot(v[k]);
        }
        return out;
    }

    // Assemble and factor H = G' Q G with Q_k = R_k' R_k (R_k = W_k^{-1}).
    // The private variables are eliminated block by block from the stacked
    // square-root factors, which avoids subtracting nearly equal large
    // matrices once the scalings become ill-conditioned.
    bool factor(const std::vector<Eigen::MatrixXd> &roots) {
        const int d = p_.shared_dim;
        hxx_.setZero(d, d);
        hxt_.setZero(d, p_.local_dim);
        htt_.setZero(p_.local_dim);
        Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(d, d);

        for (std::size_t k : shared_only_) {
            const Eigen::MatrixXd rb = roots[k] * p_.blocks[k].shared_coeffs;
            hxx_.noalias() += rb.transpose() * rb;
        }
        schur = hxx_;
        for (int j = 0; j < p_.local_dim; ++j) {
            const auto &members = by_local_[static_cast<std::size_t>(j)];
            Eigen::Index rows = 0;
            for (std::size_t k : members)
                rows += p_.blocks[k].rows();
            Eigen::MatrixXd b(rows, d);
            Eigen::VectorXd c(rows);
            Eigen::Index r = 0;
            for (std::size_t k : members) {
                const auto &blk = p_.blocks[k];
                b.middleRows(r, blk.rows()) = roots[k] * blk.shared_coeffs;
                c.segment(r, blk.rows()) = roots[k] * blk.local_coeffs;
                r += blk.rows();
            }
            const double cc = c.squaredNorm();
            if (!(cc > 0.0) || !std::isfinite(cc))
                return false;
            const Eigen::VectorXd u = c / std::sqrt(cc);
            const Eigen::RowVectorXd ub = u.transpose() * b;
            const Eigen::MatrixXd perp = b - u * ub;
            hxx_.noalias() += b.transpose() * b;
            hxt_.col(j).noalias() = b.transpose() * c;
            htt_(j) = cc;
            schur.noalias() += perp.transpose() * perp;
        }
        if (!hxx_.allFinite() || !schur.allFinite())
            return false;

        schur = 0.5 * (schur + schur.transpose());
        const double reg = 1e-13 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
        schur.diagonal().array() += reg;
        ldlt_.compute(schur);
        return ldlt_.info() == Eigen::Success && ldlt_.isPositive();
    }

    Point solve(const Point &rhs, int refinement_steps) const {
        Point sol = solve_once(rhs);
        for (int it = 0; it < refinement_steps; ++it) {
            const Point hs = multiply(sol);
            const Point res{rhs.x - hs.x, rhs.t - hs.t};
            const Point corr = solve_once(res);
            sol.x += corr.x;
            sol.t += corr.t;
        }
        return sol;
    }

  private:
    Point solve_once(const Point &rhs) const {
        const Eigen::VectorXd ratio = rhs.t.cwiseQuotient(htt_);
        Point sol;
        sol.x = ldlt_.solve(rhs.x - hxt_ * ratio);
        sol.t = (rhs.t - hxt_.transpose() * sol.x).cwiseQuotient(htt_);
        return sol;
    }

    Point multiply(const Point &z) const {
        return {hxx_ * z.x + hxt_ * z.t, hxt_.transpose() * z.x + htt_.cwiseProduct(z.t)};
    }

    const ConeProgram &p_;
    std::vector<std::vector<std::size_t>> by_local_;
    std::vector<std::size_t> shared_only_;
    Eigen::MatrixXd hxx_;
    Eigen::MatrixXd hxt_;
    Eigen::VectorXd htt_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

void validate(const ConeProgram &p, const Eigen::VectorXd &x0, const Eigen::VectorXd &t0) {
    if (p.shared_cost.size() != p.shared_dim || p.local_cost.size() != p.local_dim ||
        x0.size() != p.shared_dim || t0.size() != p.local_dim)
        throw std::invalid_argument("cone program: inconsistent variable dimensions");
    std::vector<bool> touched(static_cast<std::size_t>(p.local_dim), false);
    for (const auto &b : p.blocks) {
        if (b.rows() < 1 || b.shared_coeffs.rows() != b.rows() ||
            b.shared_coeffs.cols() != p.shared_dim)
            throw std::invalid_argument("cone program: malformed block");
        if (b.kind == ConeKind::second_order && b.rows() < 2)
            throw std::invalid_argument("cone program: second-order block needs two rows");
        if (b.local >= 0) {
            if (b.local >= p.local_dim || b.local_coeffs.size() != b.rows())
                throw std::invalid_argument("cone program: bad private variable reference");
            if (!b.local_coeffs.isZero(0.0))
                touched[static_cast<std::size_t>(b.local)] = true;
        }
    }
    if (std::find(touched.begin(), touched.end(), false) != touched.end())
        throw std::invalid_argument("cone program: private variable without constraints");
}

// Shift every block into the strict interior along the cone identity.
void shift_interior(const ConeProgram &p, BlockVectors &v) {
    for (std::size_t k = 0; k < v.size(); ++k) {
        const auto kind = p.blocks[k].kind;
        const double depth = cone::interior_depth(kind, v[k]);
        if (depth >= -1e-8 * std::max(1.0, v[k].norm()))
            v[k] += (1.0 + depth) * cone::identity(kind, p.blocks[k].rows());
    }
}

}  // namespace

ConeSolution solve_cone_program(const ConeProgram &program, const Eigen::VectorXd &x0,
                                const Eigen::VectorXd &t0, const ConeSolverOptions &options) {
    validate(program, x0, t0);
    const auto nblocks = program.blocks.size();
    const double tol = options.tolerance;
    KktSolver kkt(program);

    BlockVectors h(nblocks);
    for (std::size_t k = 0; k < nblocks; ++k)
        h[k] = program.blocks[k].offset;
    const double h_scale = std::max(1.0, norm(h));
    const double c_scale = std::max(
        1.0, std::sqrt(program.shared_cost.squaredNorm() + program.local_cost.squaredNorm()));
    const double degree = program.degree();

    // Primal start from the caller's point, dual start as the least-norm
    // solution of G' lambda = -c; both pushed into the cone interior.
    Point z{x0, t0};
    BlockVectors s(nblocks), lam(nblocks);
    {
        const BlockVectors gz = kkt.apply(z);
        for (std::size_t k = 0; k < nblocks; ++k)
            s[k] = h[k] - gz[k];
        shift_interior(program, s);

        std::vector<Eigen::MatrixXd> eye(nblocks);
        for (std::size_t k = 0; k < nblocks; ++k)
            eye[k] = Eigen::MatrixXd::Identity(program.blocks[k].rows(), program.blocks[k].rows());
        Point w{Eigen::VectorXd::Zero(program.shared_dim), Eigen::VectorXd::Zero(program.local_dim)};
        if (kkt.factor(eye))
            w = kkt.solve({-program.shared_cost, -program.local_cost}, options.refinement_steps);
        lam = kkt.apply(w);
        shift_interior(program, lam);
    }

    ConeSolution sol;
    auto record = [&](SolveStatus status, int iterations) {
        const BlockVectors gz = kkt.apply(z);
        BlockVectors rp(nblocks);
        for (std::size_t k = 0; k < nblocks; ++k)
            rp[k] = gz[k] + s[k] - h[k];
        const Point gt = kkt.apply_transpose(lam);
        const double dres2 = (gt.x + program.shared_cost).squaredNorm() +
                             (gt.t + program.local_cost).squaredNorm();
        sol.x = z.x;
        sol.t = z.t;
        sol.slack = s;
        sol.dual = lam;
        sol.iterations = iterations;
        sol.gap = dot(s, lam);
        sol.primal_objective = program.shared_cost.dot(z.x) + program.local_cost.dot(z.t);
        sol.dual_objective = sol.primal_objective + dot(lam, rp) - sol.gap;
        sol.primal_residual = norm(rp) / h_scale;
        sol.dual_residual = std::sqrt(dres2) / c_scale;
        sol.kkt_residual =
            std::max({sol.primal_residual, sol.dual_residual,
                      sol.gap / std::max(1.0, std::abs(sol.primal_objective))});
        sol.status = status;
    };

    Point best_z = z;
    BlockVectors best_s = s, best_lam = lam;
    double best_kkt = std::numeric_limits<double>::infinity();

    for (int iter = 0;; ++iter) {
        record(SolveStatus::max_iterations, iter);
        if (!std::isfinite(sol.kkt_residual)) {
            z = best_z, s = best_s, lam = best_lam;
            record(SolveStatus::numerical_failure, iter);
            return sol;
        }
        if (sol.kkt_residual < best_kkt) {
            best_kkt = sol.kkt_residual;
            best_z = z, best_s = s, best_lam = lam;
        }
        if (sol.kkt_residual <= tol) {
            sol.status = SolveStatus::optimal;
            return sol;
        }
        if (iter >= options.max_iterations) {
            z = best_z, s = best_s, lam = best_lam;
            record(SolveStatus::max_iterations, iter);
            return sol;
        }

        // Residuals at the current iterate.
        const BlockVectors gz = kkt.apply(z);
        BlockVectors rp(nblocks);
        for (std::size_t k = 0; k < nblocks; ++k)
            rp[k] = gz[k] + s[k] - h[k];
        const Point gt = kkt.apply_transpose(lam);
        const Point rd{gt.x + program.shared_cost, gt.t + program.local_cost};
        const double gap = dot(s, lam);
        const double mu = gap / degree;

        std::vector<cone::Scaling> scal(nblocks);
        std::vector<Eigen::MatrixXd> weights(nblocks);
        for (std::size_t k = 0; k < nblocks; ++k) {
            scal[k] = cone::nt_scaling(program.blocks[k].kind, s[k], lam[k]);
            weights[k] = scal[k].w_inv * scal[k].w_inv;
        }
        std::vector<Eigen::MatrixXd> roots(nblocks);
        for (std::size_t k = 0; k < nblocks; ++k)
            roots[k] = scal[k].w_inv;
        if (!kkt.factor(roots)) {
            z = best_z, s = best_s, lam = best_lam;
            record(SolveStatus::numerical_failure, iter);
            return sol;
        }

        // Newton step for right-hand sides (bx, bz, bs):
        //   G' dlam = bx,  G dz + ds = bz,  lambda o (W dlam + W^{-1} ds) = bs.
        struct Direction {
            Point dz;
            BlockVectors ds, dlam;
        };
        auto eliminate = [&](const Point &bx, const BlockVectors &bz, const BlockVectors &bs) {
            BlockVectors u(nblocks), v(nblocks);
            for (std::size_t k = 0; k < nblocks; ++k) {
                u[k] = cone::jordan_divide(scal[k].kind, scal[k].lambda, bs[k]);
                v[k] = scal[k].w * u[k] - bz[k];
            }
            BlockVectors qv(nblocks);
            for (std::size_t k = 0; k < nblocks; ++k)
                qv[k] = weights[k] * v[k];
            const Point gqv = kkt.apply_transpose(qv);
            Direction dir;
            dir.dz = kkt.solve({bx.x - gqv.x, bx.t - gqv.t}, options.refinement_steps);
            const BlockVectors gdz = kkt.apply(dir.dz);
            dir.ds.resize(nblocks);
            dir.dlam.resize(nblocks);
            // ds from the linear equation and dlam through the scaled
            // variables; going through W twice amplifies rounding by W^2.
            for (std::size_t k = 0; k < nblocks; ++k) {
                dir.ds[k] = bz[k] - gdz[k];
                dir.dlam[k] = scal[k].w_inv * (u[k] - scal[k].w_inv * dir.ds[k]);
            }
            return dir;
        };
        // The reduced system loses accuracy when the scalings are badly
        // conditioned; refine against the unreduced equations.
        auto newton = [&](const Point &bx, const BlockVectors &bz, const BlockVectors &bs) {
            Direction dir = eliminate(bx, bz, bs);
            for (int it = 0; it < options.refinement_steps; ++it) {
                const Point gl = kkt.apply_transpose(dir.dlam);
                const BlockVectors gdz = kkt.apply(dir.dz);
                BlockVectors rz(nblocks), rs(nblocks);
                for (std::size_t k = 0; k < nblocks; ++k) {
                    rz[k] = bz[k] - gdz[k] - dir.ds[k];
                    rs[k] = bs[k] - cone::jordan_product(scal[k].kind, scal[k].lambda,
                                                         scal[k].w * dir.dlam[k] + scal[k].w_inv * dir.ds[k]);
                }
                const Direction corr = eliminate({bx.x - gl.x, bx.t - gl.t}, rz, rs);
                dir.dz.x += corr.dz.x;
                dir.dz.t += corr.dz.t;
                for (std::size_t k = 0; k < nblocks; ++k) {
                    dir.ds[k] += corr.ds[k];
                    dir.dlam[k] += corr.dlam[k];
                }
            }
            return dir;
        };
        auto step_to_boundary = [&](const Direction &dir) {
            double alpha = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < nblocks; ++k) {
                const auto kind = program.blocks[k].kind;
                alpha = std::min(alpha, cone::max_step(kind, s[k], dir.ds[k]));
                alpha = std::min(alpha, cone::max_step(kind, lam[k], dir.dlam[k]));
            }
            return alpha;
        };

        // Predictor.
        BlockVectors bz(nblocks), bs(nblocks);
        for (std::size_t k = 0; k < nblocks; ++k) {
            bz[k] = -rp[k];
            bs[k] = -cone::jordan_product(scal[k].kind, scal[k].lambda, scal[k].lambda);
        }
        const Direction aff = newton({-rd.x, -rd.t}, bz, bs);
        const double alpha_aff = std::min(1.0, step_to_boundary(aff));
        double gap_aff = 0.0;
        for (std::size_t k = 0; k < nblocks; ++k)
            gap_aff += (s[k] + alpha_aff * aff.ds[k]).dot(lam[k] + alpha_aff * aff.dlam[k]);
        const double sigma = std::clamp(std::pow(std::max(gap_aff, 0.0) / gap, 3.0), 0.0, 1.0);

        // Corrector with second-order term and centering.
        for (std::size_t k = 0; k < nblocks; ++k) {
            const auto kind = scal[k].kind;
            const Eigen::VectorXd ds_scaled = scal[k].w_inv * aff.ds[k];
            const Eigen::VectorXd dl_scaled = scal[k].w * aff.dlam[k];
            bz[k] = -(1.0 - sigma) * rp[k];
            bs[k] = -cone::jordan_product(kind, scal[k].lambda, scal[k].lambda) -
                    cone::jordan_product(kind, ds_scaled, dl_scaled) +
                    sigma * mu * cone::identity(kind, program.blocks[k].rows());
        }
        const Direction dir = newton({-(1.0 - sigma) * rd.x, -(1.0 - sigma) * rd.t}, bz, bs);
        const double alpha = std::min(1.0, 0.99 * step_to_boundary(dir));
        if (!(alpha > 1e-12)) {
            z = best_z, s = best_s, lam = best_lam;
            record(SolveStatus::numerical_failure, iter);
            return sol;
        }

        z.x += alpha * dir.dz.x;
        z.t += alpha * dir.dz.t;
        for (std::size_t k = 0; k < nblocks; ++k) {
            s[k] += alpha * dir.ds[k];
            lam[k] += alpha * dir.dlam[k];
        }
    }
}

}  // namespace maxcon
