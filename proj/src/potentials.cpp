#include "ztot/potentials.hpp"

#include "ztot/errors.hpp"

#include <cmath>
#include <sstream>

namespace ztot {

namespace {

constexpr std::size_t kStepHistory = 16;

void push_step(SolveReport& report, double step) {
    if (report.lastSteps.size() == kStepHistory) report.lastSteps.erase(report.lastSteps.begin());
    report.lastSteps.push_back(step);
}

void check_beta(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ArgumentError("beta must be positive and finite");
}

}  // namespace

double log_sum_exp(const Eigen::Ref<const Vector>& v) {
    const double top = v.maxCoeff();
    if (!std::isfinite(top)) return top;
    return top + std::log((v.array() - top).exp().sum());
}

Vector t_mu(const TransportProblem& prob, double s, const Vector& f, double beta) {
    if (f.size() != prob.rows()) throw DimensionError("t_mu: f must live on X");
    const Matrix& a = prob.cost.payoff();
    const Vector shifted = s * f + prob.logMu;
    Vector g(prob.cols());
    Vector work(prob.rows());
    for (Eigen::Index j = 0; j < prob.cols(); ++j) {
        work = beta * a.col(j) + shifted;
        g[j] = -log_sum_exp(work);
    }
    return g;
}

Vector t_nu(const TransportProblem& prob, double s, const Vector& g, double beta) {
    if (g.size() != prob.cols()) throw DimensionError("t_nu: g must live on Y");
    const Matrix& a = prob.cost.payoff();
    const Eigen::RowVectorXd shifted = (s * g + prob.logNu).transpose();
    Vector f(prob.rows());
    Vector work(prob.cols());
    for (Eigen::Index i = 0; i < prob.rows(); ++i) {
        work = (beta * a.row(i) + shifted).transpose();
        f[i] = -log_sum_exp(work);
    }
    return f;
}

FixedPointResult fixed_point_s(const TransportProblem& prob, double s, double beta, double tol,
                               long maxIter) {
    if (!(s > 0.0 && s < 1.0)) throw ArgumentError("fixed_point_s: s must lie in (0, 1)");
    if (!(tol > 0.0)) throw ArgumentError("fixed_point_s: tol must be positive");
    check_beta(beta);

    const double q = s * s;
    const double bound = q / (1.0 - q);
    FixedPointResult out;
    out.report.sWeight = s;
    Vector phi = Vector::Zero(prob.rows());
    for (long k = 1; k <= maxIter; ++k) {
        const Vector next = t_nu(prob, s, t_mu(prob, s, phi, beta), beta);
        const double step = (next - phi).cwiseAbs().maxCoeff();
        phi = next;
        push_step(out.report, step);
        out.report.iterations = k;
        out.report.residual = q * step;
        if (bound * step <= tol) {
            out.phi = std::move(phi);
            out.psi = t_mu(prob, s, out.phi, beta);
            return out;
        }
    }
    throw ConvergenceError("fixed_point_s: no convergence within the sweep cap", out.report.residual, beta);
}

double schrodinger_residual(const TransportProblem& prob, const PotentialPair& pair) {
    // t_mu(1, phi) is the psi that closes the column family exactly, so the
    // log-deviation of each column integral is psi - t_mu(phi); rows alike.
    const Vector colDev = pair.psi - t_mu(prob, 1.0, pair.phi, pair.beta);
    const Vector rowDev = pair.phi - t_nu(prob, 1.0, pair.psi, pair.beta);
    return std::max(colDev.cwiseAbs().maxCoeff(), rowDev.cwiseAbs().maxCoeff());
}

PotentialPair apply_gauge(PotentialPair pair) {
    const double top = pair.phi.maxCoeff();
    pair.phi.array() -= top;
    pair.psi.array() += top;
    pair.gauge = Gauge::MaxPhiZero;
    pair.l = pair.psi.maxCoeff();
    return pair;
}

GaugeBounds gauge_bounds(const TransportProblem& prob, double beta) {
    const Matrix& a = prob.cost.payoff();
    return {-beta * a.maxCoeff(),
            beta * (prob.cost.lip_payoff() * prob.x.diameter() - a.minCoeff())};
}

namespace {

// State of one iterate: phi, the psi closing the columns for it, the row
// update t_nu(psi) and the per-row log deviation phi - t_nu(psi).
struct Iterate {
    Vector phi;
    Vector psi;
    Vector next;
    double residual = 0.0;
};

Iterate evaluate(const TransportProblem& prob, Vector phi, double beta) {
    Iterate it;
    it.psi = t_mu(prob, 1.0, phi, beta);
    it.next = t_nu(prob, 1.0, it.psi, beta);
    it.residual = (phi - it.next).cwiseAbs().maxCoeff();
    it.phi = std::move(phi);
    return it;
}

// Semi-dual objective G(phi) = <mu, phi> + <nu, t_mu(phi)>: concave, with
// gradient mu - r where r are the row sums of the plan built from
// (phi, t_mu(phi)); stationary exactly at the Schroedinger potentials.
double semi_dual(const TransportProblem& prob, const Iterate& it) {
    return prob.mu.weights().dot(it.phi) + prob.nu.weights().dot(it.psi);
}

Vector row_sums(const TransportProblem& prob, const Iterate& it) {
    return prob.mu.weights().array() * (it.phi - it.next).array().exp();
}

// Newton ascent direction for G. The negative Hessian is
// M = diag(r) - sum_j p(:,j) p(:,j)^T / nu_j, PSD with kernel span(1);
// the kernel is closed off with a rank-one term.
std::optional<Vector> newton_direction(const TransportProblem& prob, const Iterate& it,
                                       const Vector& grad, double beta) {
    const PotentialPair pair{it.phi, it.psi, beta, Gauge::MaxPhiZero, 0.0};
    const Matrix p = gibbs_log_plan(prob, pair).array().exp().matrix();
    const Matrix scaled = p * prob.nu.weights().cwiseInverse().cwiseSqrt().asDiagonal();
    const Vector r = row_sums(prob, it);
    Matrix m = -scaled * scaled.transpose();
    m.diagonal() += r;
    m.array() += r.mean() / static_cast<double>(prob.rows());
    Eigen::LDLT<Matrix> ldlt(m);
    if (ldlt.info() != Eigen::Success) return std::nullopt;
    Vector step = ldlt.solve(grad);
    if (!step.allFinite()) return std::nullopt;
    return step;
}

// Damped Newton ascent on G. Returns false when no step length improves.
bool newton_step(const TransportProblem& prob, Iterate& cur, double beta, bool residualOnly) {
    const Vector grad = prob.mu.weights() - row_sums(prob, cur);
    const auto step = newton_direction(prob, cur, grad, beta);
    if (!step) return false;
    // Armijo on G while its increments are resolvable in double precision,
    // then plain residual decrease.
    const double g0 = semi_dual(prob, cur);
    const double slope = grad.dot(*step);
    if (!(slope > 0.0)) return false;
    const double noise = 1e-12 * (std::abs(g0) + 1.0);
    double t = 1.0;
    for (int halving = 0; halving < 30; ++halving, t *= 0.5) {
        Iterate trial = evaluate(prob, cur.phi + t * *step, beta);
        const bool ok = (t * slope > noise && !residualOnly)
                            ? semi_dual(prob, trial) >= g0 + 1e-4 * t * slope
                            : trial.residual < (1.0 - 1e-4 * t) * cur.residual;
        if (ok) {
            cur = std::move(trial);
            return true;
        }
    }
    return false;
}

Iterate solve_from(const TransportProblem& prob, double beta, const SolveOptions& opts, Vector phi0,
                   SolveReport& report, long maxIter) {
    // Every iterate closes the columns exactly (psi <- t_mu(phi)); the row
    // family's deviation for (phi, psi) is then |t_nu(psi) - phi|, which is
    // also the plain alternating update of phi.
    Iterate cur = evaluate(prob, std::move(phi0), beta);
    const bool newton = opts.method == SolveMethod::NewtonAlternating;
    for (long k = 1;; ++k) {
        push_step(report, cur.residual);
        ++report.iterations;
        if (cur.residual <= opts.tol) break;
        if (k >= maxIter) {
            std::ostringstream msg;
            msg << "schrodinger_solve: no convergence at beta=" << beta << " after " << k
                << " sweeps (residual " << cur.residual << ")";
            throw ConvergenceError(msg.str(), cur.residual, beta);
        }
        if (newton && newton_step(prob, cur, beta, false)) {
            ++report.newtonSteps;
        } else {
            cur = evaluate(prob, std::move(cur.next), beta);
        }
    }
    // A few extra Newton steps push the residual toward the rounding floor;
    // only strict decreases are kept.
    for (int polish = 0; newton && polish < 3 && cur.residual > 0.0; ++polish) {
        if (!newton_step(prob, cur, beta, true)) break;
        ++report.newtonSteps;
    }
    return cur;
}

// Largest beta solved directly from zero by the Newton method; larger
// cold solves climb a geometric ladder of warm starts.
constexpr double kColdBeta = 1.0;
constexpr double kLadderFactor = 4.0;
// Sweeps a warm start gets before it is abandoned for the ladder.
constexpr long kWarmBudget = 200;

Vector ladder_start(const TransportProblem& prob, double beta, const SolveOptions& opts, SolveReport& report) {
    std::vector<double> ladder;
    for (double b = beta / kLadderFactor; b > kColdBeta / kLadderFactor; b /= kLadderFactor) ladder.push_back(b);
    Vector phi0 = Vector::Zero(prob.rows());
    double prev = 0.0;
    for (auto it = ladder.rbegin(); it != ladder.rend(); ++it) {
        if (prev > 0.0) phi0 *= *it / prev;
        phi0 = solve_from(prob, *it, opts, std::move(phi0), report, opts.maxIter).phi;
        prev = *it;
    }
    if (prev > 0.0) phi0 *= beta / prev;
    return phi0;
}

}  // namespace

SolveResult schrodinger_solve(const TransportProblem& prob, double beta, const SolveOptions& opts,
                              const std::optional<PotentialPair>& warmStart) {
    check_beta(beta);
    if (!(opts.tol > 0.0)) throw ArgumentError("schrodinger_solve: tol must be positive");

    SolveResult out;
    out.report.warmStarted = warmStart.has_value();
    const bool newton = opts.method == SolveMethod::NewtonAlternating;
    std::optional<Iterate> cur;
    if (warmStart) {
        if (warmStart->phi.size() != prob.rows() || warmStart->psi.size() != prob.cols()) {
            throw DimensionError("schrodinger_solve: warm start has the wrong shape");
        }
        if (newton && beta > kColdBeta) {
            // A poor warm start at large beta can be far slower than the
            // ladder; give it a bounded number of sweeps.
            try {
                cur = solve_from(prob, beta, opts, warmStart->phi, out.report, std::min(kWarmBudget, opts.maxIter));
            } catch (const ConvergenceError&) {
                if (opts.maxIter <= kWarmBudget) throw;
                out.report.warmStartAbandoned = true;
            }
        } else {
            cur = solve_from(prob, beta, opts, warmStart->phi, out.report, opts.maxIter);
        }
    }
    if (!cur) {
        Vector phi0 = newton && beta > kColdBeta ? ladder_start(prob, beta, opts, out.report)
                                                 : Vector(Vector::Zero(prob.rows()));
        cur = solve_from(prob, beta, opts, std::move(phi0), out.report, opts.maxIter);
    }

    PotentialPair pair;
    pair.phi = std::move(cur->phi);
    pair.psi = std::move(cur->psi);
    pair.beta = beta;
    out.pair = apply_gauge(std::move(pair));
    out.report.residual = schrodinger_residual(prob, out.pair);

    const GaugeBounds bounds = gauge_bounds(prob, beta);
    const double slack = 1e-9 * std::max(1.0, std::abs(bounds.upper));
    if (out.pair.l < bounds.lower - slack || out.pair.l > bounds.upper + slack) {
        throw InvariantError("schrodinger_solve: gauge constant outside its a-priori bounds");
    }
    return out;
}

Matrix gibbs_log_plan(const TransportProblem& prob, const PotentialPair& pair) {
    if (pair.phi.size() != prob.rows() || pair.psi.size() != prob.cols()) {
        throw DimensionError("gibbs_log_plan: potentials have the wrong shape");
    }
    Matrix out = pair.beta * prob.cost.payoff();
    out.colwise() += pair.phi + prob.logMu;
    out.rowwise() += (pair.psi + prob.logNu).transpose();
    return out;
}

TransportPlan gibbs_plan(const TransportProblem& prob, const PotentialPair& pair) {
    const double residual = schrodinger_residual(prob, pair);
    if (!(residual <= 1e-8)) {
        std::ostringstream msg;
        msg << "gibbs_plan: potentials are not converged (residual " << residual << ")";
        throw FeasibilityError(msg.str());
    }
    const Matrix logPlan = gibbs_log_plan(prob, pair);
    const double top = logPlan.maxCoeff();
    Matrix p = (logPlan.array() - top).exp() * std::exp(top);
    TransportPlan plan(std::move(p), prob.mu, prob.nu);
    if (!plan.feasible()) throw FeasibilityError("gibbs_plan: marginals out of tolerance");
    return plan;
}

double pressure(const TransportProblem& prob, const PotentialPair& pair) {
    return -pair.phi.dot(prob.mu.weights()) - pair.psi.dot(prob.nu.weights());
}

double free_energy(const TransportProblem& prob, const TransportPlan& pi, double beta) {
    return beta * linear_cost(pi, prob.cost.payoff()) + relative_entropy(pi, prob.mu, prob.nu).value();
}

double pressure_identity_gap(const TransportProblem& prob, const PotentialPair& pair) {
    return std::abs(pressure(prob, pair) - free_energy(prob, gibbs_plan(prob, pair), pair.beta));
}

}  // namespace ztot
