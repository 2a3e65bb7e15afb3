#pragma once

// Large-deviation view of the Gibbs family: as beta grows,
// pi_beta(i, j) ~ exp(-beta I(i, j)) with rate I = c - phi - psi at the
// zero-temperature dual pair.

#include "ztot/annealing.hpp"
#include "ztot/problem.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace ztot {

struct RateFunction {
    /// Nonnegative n x m table with at least one zero.
    Matrix I;
};

inline constexpr double kDefaultLdpTol = 5e-3;

/// I = c - phi - psi. Entries in [-1e-6, 0) are feasibility noise and are
/// clamped to 0; anything more negative is an InvariantError, as is a table
/// whose minimum exceeds 1e-6.
RateFunction rate_function(const Matrix& cost, const Vector& phi, const Vector& psi);

/// Rate function of a converged zero-temperature limit. Throws
/// ConvergenceError when limit.converged is false.
RateFunction rate_function(const TransportProblem& prob, const ZeroTempResult& limit);

struct RatePoint {
    double beta;
    double rate;
};

/// r_beta = -(1/beta) log pi_beta(i, j) along the trajectory, from the
/// log-domain plan (finite even where pi_beta underflows).
std::vector<RatePoint> empirical_rate(const Trajectory& trajectory, Eigen::Index i, Eigen::Index j);

using Cell = std::pair<Eigen::Index, Eigen::Index>;

struct SetRate {
    /// -(1/beta) log pi_beta(S) at the final beta.
    double estimate;
    /// min over S of I.
    double minRate;
    double beta;
};

/// Throws ArgumentError for an empty or out-of-range subset.
SetRate set_rate(const Trajectory& trajectory, const RateFunction& rate, const std::vector<Cell>& cells);

/// Gamma(f) = max over cells of (f - I).
double gamma(const RateFunction& rate, const Matrix& f);

/// max over cells of | -(1/beta) log pi + (1/beta) log(mu nu) + phi/beta + psi/beta + A |
/// for one record: the Gibbs density identity, independent of any limit.
double gibbs_identity_residual(const TransportProblem& prob, const TrajectoryRecord& record);

/// max over cells of |r_beta - I| at the given record.
double rate_error(const TrajectoryRecord& record, const RateFunction& rate);

/// CSV with header beta,cell,r_beta,I; cells are written "i:j".
void write_rate_csv(std::ostream& out, const Trajectory& trajectory, const RateFunction& rate);

}  // namespace ztot
