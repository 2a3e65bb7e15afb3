#pragma once

// Exact desk-scale ground truth for the Monge-Kantorovich problem: the
// optimal cost alpha(c), the optimal vertices of the transportation
// polytope, and the entropy-maximizing plan on the optimal face.

#include "ztot/measure.hpp"

#include <vector>

namespace ztot {

enum class OracleMethod { Permutation, VertexEnum };

const char* to_string(OracleMethod m);

struct OracleLimits {
    /// Permutation scan: n = m <= this, uniform marginals.
    Eigen::Index maxPermutationSize = 8;
    /// Spanning-tree vertex enumeration: n + m <= this.
    Eigen::Index maxVertexNodes = 10;
};

struct OracleResult {
    double alpha = 0.0;
    /// m(A) = sup <A, pi> = -alpha.
    double mA = 0.0;
    std::vector<TransportPlan> optimalVertices;
    OracleMethod method = OracleMethod::VertexEnum;
};

/// Cost-equality tolerance for collecting the argmin set, and entrywise
/// tolerance for identifying degenerate bases that give the same plan.
inline constexpr double kVertexTol = 1e-12;

bool permutation_applicable(const Marginal& mu, const Marginal& nu, const OracleLimits& limits = {});
bool vertex_enum_applicable(const Marginal& mu, const Marginal& nu, const OracleLimits& limits = {});
bool oracle_applicable(const Marginal& mu, const Marginal& nu, const OracleLimits& limits = {});

/// Dispatches to the permutation scan when it applies, otherwise to vertex
/// enumeration; throws CapacityError beyond both caps.
OracleResult exact_ot(const Marginal& mu, const Marginal& nu, const Matrix& cost,
                      const OracleLimits& limits = {});

/// Exhaustive minimum over the n! permutation plans (Birkhoff vertices).
OracleResult exact_ot_permutation(const Marginal& mu, const Marginal& nu, const Matrix& cost,
                                  const OracleLimits& limits = {});

/// Minimum over the basic feasible solutions of the transportation
/// polytope, one per spanning tree of K_{n,m} whose flows are nonnegative.
OracleResult exact_ot_vertices(const Marginal& mu, const Marginal& nu, const Matrix& cost,
                               const OracleLimits& limits = {});

/// All distinct vertices of Pi(mu, nu) (n + m within the vertex cap).
std::vector<TransportPlan> transport_vertices(const Marginal& mu, const Marginal& nu,
                                              const OracleLimits& limits = {});

/// Maximizer of H over the convex hull of the optimal vertices (at most 4).
/// Grid search over barycentric weights, then pairwise moves placed by
/// bisection on dH/dt until no pair moves by more than tol.
TransportPlan max_entropy_optimal(const OracleResult& result, const Marginal& mu, const Marginal& nu,
                                  double tol = 1e-10);

/// Feasible and <c, plan> <= alpha + tol.
bool is_optimal(const TransportPlan& plan, const Matrix& cost, const OracleResult& result, double tol);

}  // namespace ztot
