#pragma once

// Kantorovich dual side: admissible pairs phi(x) + psi(y) <= c(x, y),
// c-transforms, duality gaps and the Kantorovich-Rubinstein special case
// c = d on X = Y.

#include "ztot/measure.hpp"
#include "ztot/problem.hpp"

namespace ztot {

struct ZeroTempResult;

/// Admissibility tolerance on the slack table.
inline constexpr double kDualFeasibilityTol = 1e-9;

struct DualPair {
    DualPair(Vector phi, Vector psi, const Matrix& cost);

    Vector phi;
    Vector psi;
    /// c(i, j) - phi(i) - psi(j).
    Matrix slack;
    /// min slack >= -1e-9.
    bool feasible = false;
};

/// psi(j) = min_i [c(i, j) - phi(i)].
Vector c_transform_to_y(const Vector& phi, const Matrix& cost);
/// phi(i) = min_j [c(i, j) - psi(j)].
Vector c_transform_to_x(const Vector& psi, const Matrix& cost);

/// <phi, mu> + <psi, nu>.
double dual_value(const TransportProblem& prob, const Vector& phi, const Vector& psi);

/// <c, plan> - dual value. Throws FeasibilityError when the pair is not
/// admissible or the plan is not a coupling of (mu, nu).
double duality_gap(const TransportProblem& prob, const TransportPlan& plan, const DualPair& pair);

/// Largest violation of the conjugacy equations
///   psi(j) = min_i [c - phi],  phi(i) = min_j [c - psi].
double conjugacy_error(const Vector& phi, const Vector& psi, const Matrix& cost);

/// Sum phi(i) (mu_i - nu_i). Requires X = Y declared and lip(phi) <= 1 + 1e-9
/// against d; throws InvariantError otherwise.
double kr_value(const TransportProblem& prob, const Vector& phi);

/// ||phi + psi||_inf <= tol.
bool kr_antisymmetry_check(const Vector& phi, const Vector& psi, double tol);

/// Third-party checkable summary of a primal/dual pair.
struct Certificate {
    double primalValue = 0.0;
    double dualValue = 0.0;
    double gap = 0.0;
    bool feasible = false;
    /// Conjugacy equations hold within conjugacyTol.
    bool conjugate = false;
    double conjugacyError = 0.0;
};

inline constexpr double kConjugacyTol = 1e-3;

/// Certificate for a zero-temperature limit (plan, phi, c-transform of phi).
Certificate certify(const TransportProblem& prob, const ZeroTempResult& limit);
Certificate certify(const TransportProblem& prob, const TransportPlan& plan, const DualPair& pair);

}  // namespace ztot
