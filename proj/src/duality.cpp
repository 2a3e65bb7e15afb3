#include "ztot/duality.hpp"

#include "ztot/annealing.hpp"
#include "ztot/errors.hpp"

#include <cmath>

namespace ztot {

DualPair::DualPair(Vector phi_, Vector psi_, const Matrix& cost) : phi(std::move(phi_)), psi(std::move(psi_)) {
    if (phi.size() != cost.rows() || psi.size() != cost.cols()) {
        throw DimensionError("DualPair: potentials do not match the cost shape");
    }
    slack = cost;
    slack.colwise() -= phi;
    slack.rowwise() -= psi.transpose();
    feasible = slack.minCoeff() >= -kDualFeasibilityTol;
}

Vector c_transform_to_y(const Vector& phi, const Matrix& cost) {
    if (phi.size() != cost.rows()) throw DimensionError("c_transform_to_y: phi must live on X");
    return (cost.colwise() - phi).colwise().minCoeff().transpose();
}

Vector c_transform_to_x(const Vector& psi, const Matrix& cost) {
    if (psi.size() != cost.cols()) throw DimensionError("c_transform_to_x: psi must live on Y");
    return (cost.rowwise() - psi.transpose()).rowwise().minCoeff();
}

double dual_value(const TransportProblem& prob, const Vector& phi, const Vector& psi) {
    return phi.dot(prob.mu.weights()) + psi.dot(prob.nu.weights());
}

double duality_gap(const TransportProblem& prob, const TransportPlan& plan, const DualPair& pair) {
    if (!pair.feasible) throw FeasibilityError("duality_gap: dual pair violates phi + psi <= c");
    const TransportPlan checked(plan.p(), prob.mu, prob.nu);
    if (!checked.feasible()) throw FeasibilityError("duality_gap: plan is not a coupling of (mu, nu)");
    const double gap = linear_cost(plan, prob.cost) - dual_value(prob, pair.phi, pair.psi);
    if (gap < -kDualFeasibilityTol) throw InvariantError("duality_gap: negative gap violates weak duality");
    return gap;
}

double conjugacy_error(const Vector& phi, const Vector& psi, const Matrix& cost) {
    const double ey = (psi - c_transform_to_y(phi, cost)).cwiseAbs().maxCoeff();
    const double ex = (phi - c_transform_to_x(psi, cost)).cwiseAbs().maxCoeff();
    return std::max(ex, ey);
}

double kr_value(const TransportProblem& prob, const Vector& phi) {
    if (!prob.sameSpace) throw InvariantError("kr_value: requires Y declared as the same space as X");
    if (phi.size() != prob.x.size()) throw DimensionError("kr_value: phi must live on X");
    const double lip = lipschitz_constant(phi, prob.x.dist());
    if (lip > 1.0 + 1e-9) {
        throw InvariantError("kr_value: phi is not 1-Lipschitz (lip = " + std::to_string(lip) + ")");
    }
    return phi.dot(prob.mu.weights() - prob.nu.weights());
}

bool kr_antisymmetry_check(const Vector& phi, const Vector& psi, double tol) {
    if (phi.size() != psi.size()) throw DimensionError("kr_antisymmetry_check: phi and psi differ in size");
    return (phi + psi).cwiseAbs().maxCoeff() <= tol;
}

Certificate certify(const TransportProblem& prob, const TransportPlan& plan, const DualPair& pair) {
    Certificate cert;
    cert.primalValue = linear_cost(plan, prob.cost);
    cert.dualValue = dual_value(prob, pair.phi, pair.psi);
    cert.gap = cert.primalValue - cert.dualValue;
    const TransportPlan checked(plan.p(), prob.mu, prob.nu);
    cert.feasible = pair.feasible && checked.feasible();
    cert.conjugacyError = conjugacy_error(pair.phi, pair.psi, prob.cost.c());
    cert.conjugate = cert.conjugacyError <= kConjugacyTol;
    return cert;
}

Certificate certify(const TransportProblem& prob, const ZeroTempResult& limit) {
    return certify(prob, limit.plan, DualPair(limit.phi, limit.psi, prob.cost.c()));
}

}  // namespace ztot
