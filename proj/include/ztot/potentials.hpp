#pragma once

// Schroedinger potentials at inverse temperature beta: the pair (phi, psi)
// with
//     sum_i exp(beta A(i,j) + phi(i) + psi(j)) mu_i = 1   for every j,
//     sum_j exp(beta A(i,j) + phi(i) + psi(j)) nu_j = 1   for every i,
// the Gibbs coupling they define, and its pressure.

#include "ztot/measure.hpp"
#include "ztot/problem.hpp"

#include <optional>
#include <vector>

namespace ztot {

enum class Gauge { MaxPhiZero };

struct PotentialPair {
    Vector phi;
    Vector psi;
    double beta = 1.0;
    Gauge gauge = Gauge::MaxPhiZero;
    /// max(psi) once max(phi) = 0; the additive constant that closes both
    /// normalizations.
    double l = 0.0;
};

struct SolveReport {
    long iterations = 0;
    long newtonSteps = 0;
    double residual = 0.0;
    double sWeight = 1.0;
    bool warmStarted = false;
    /// The warm start did not converge within its sweep budget and the solve
    /// was restarted cold.
    bool warmStartAbandoned = false;
    /// Sup-norm step sizes of the last sweeps, oldest first (bounded history).
    std::vector<double> lastSteps;
};

enum class SolveMethod {
    /// Plain alternating updates phi <- t_nu(1, psi), psi <- t_mu(1, phi).
    Alternating,
    /// Alternating updates interleaved with damped Newton steps on the
    /// row family (psi kept exact); same fixed point, far fewer sweeps at
    /// large beta.
    NewtonAlternating,
};

struct SolveOptions {
    double tol = 1e-10;
    long maxIter = 1'000'000;
    SolveMethod method = SolveMethod::NewtonAlternating;
};

/// -logsumexp_i [beta A(i,j) + s f(i) + log mu_i], one value per j.
Vector t_mu(const TransportProblem& prob, double s, const Vector& f, double beta);
/// -logsumexp_j [beta A(i,j) + s g(j) + log nu_j], one value per i.
Vector t_nu(const TransportProblem& prob, double s, const Vector& g, double beta);

/// Max-shifted log(sum exp(v)).
double log_sum_exp(const Eigen::Ref<const Vector>& v);

struct FixedPointResult {
    Vector phi;
    Vector psi;
    SolveReport report;
};

/// Banach iteration of phi <- t_nu(s, t_mu(s, phi)) from zero for 0 < s < 1.
/// Stops once the a-posteriori bound q/(1-q) * |step| (q = s^2) on the
/// distance to the fixed point is <= tol. Returns raw, ungauged potentials.
FixedPointResult fixed_point_s(const TransportProblem& prob, double s, double beta, double tol,
                               long maxIter = 10'000'000);

struct SolveResult {
    PotentialPair pair;
    SolveReport report;
};

/// Log-domain alternating normalization (s = 1) until schrodinger_residual
/// <= tol. Starts from zero or from `warmStart`; gauges to max(phi) = 0.
/// Throws ConvergenceError after opts.maxIter sweeps.
SolveResult schrodinger_solve(const TransportProblem& prob, double beta, const SolveOptions& opts = {},
                              const std::optional<PotentialPair>& warmStart = std::nullopt);

/// Max deviation from zero of the logs of both normalization families.
double schrodinger_residual(const TransportProblem& prob, const PotentialPair& pair);

/// Shifts phi by -max(phi) and psi by +max(phi); sets l = max(psi).
PotentialPair apply_gauge(PotentialPair pair);

/// Bounds on l: -beta max(A) <= l <= beta (lip(A) diam(X) - min(A)).
struct GaugeBounds {
    double lower;
    double upper;
};
GaugeBounds gauge_bounds(const TransportProblem& prob, double beta);

/// beta A(i,j) + phi(i) + psi(j) + log mu_i + log nu_j: the log of the Gibbs
/// plan, finite even where the plan itself underflows.
Matrix gibbs_log_plan(const TransportProblem& prob, const PotentialPair& pair);

/// The Gibbs coupling exp(beta A + phi + psi) mu nu. Throws FeasibilityError
/// when the pair's residual exceeds 1e-8.
TransportPlan gibbs_plan(const TransportProblem& prob, const PotentialPair& pair);

/// -<phi, mu> - <psi, nu>.
double pressure(const TransportProblem& prob, const PotentialPair& pair);

/// beta <A, pi> + H(pi) evaluated on a coupling: the functional the pressure
/// maximizes.
double free_energy(const TransportProblem& prob, const TransportPlan& pi, double beta);

/// |pressure(pair) - free_energy(gibbs_plan(pair))|.
double pressure_identity_gap(const TransportProblem& prob, const PotentialPair& pair);

}  // namespace ztot
