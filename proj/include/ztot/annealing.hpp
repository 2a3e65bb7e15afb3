#pragma once

// Zero-temperature continuation: solve the Schroedinger system along an
// increasing beta schedule, warm-starting each solve from the previous one,
// and read off the limiting transport plan and Kantorovich potentials.

#include "ztot/oracle.hpp"
#include "ztot/potentials.hpp"
#include "ztot/problem.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace ztot {

class Schedule {
public:
    /// Strictly increasing, first >= 1e-6, last <= 1e7.
    explicit Schedule(std::vector<double> betas);

    const std::vector<double>& betas() const { return betas_; }
    std::size_t size() const { return betas_.size(); }

private:
    std::vector<double> betas_;
};

/// 1, factor, factor^2, ... below betaMax, followed by betaMax itself.
Schedule default_schedule(double betaMax = 16384.0, double factor = 2.0);

struct TrajectoryRecord {
    double beta = 0.0;
    PotentialPair pair;
    Vector scaledPhi;
    Vector scaledPsi;
    TransportPlan plan;
    /// log of the plan entries, finite where the plan underflows.
    Matrix logPlan;
    double pressure = 0.0;
    double excess = 0.0;
    double entropy = 0.0;
    double cost = 0.0;
    /// Sup-norm change of scaledPhi from the previous record (0 for the first).
    double maxPhiDelta = 0.0;
    SolveReport report;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    /// m(A) used for the excess column.
    double mA = 0.0;
    /// False when m(A) came from a dual bound at the largest beta instead of
    /// the exact oracle.
    bool mAExact = true;
};

struct AnnealOptions {
    SolveOptions solve;
    OracleLimits oracle;
};

/// Solves at every beta of the schedule in order. Convergence failures are
/// rethrown as ConvergenceError naming the failing beta. Throws
/// InvariantError when the excess column is not non-increasing within 1e-9.
Trajectory anneal(const TransportProblem& prob, const Schedule& schedule, const AnnealOptions& opts = {});

struct ZeroTempResult {
    /// Limit of phi_beta / beta.
    Vector phi;
    /// c-transform of phi; (phi, psi) is admissible for the Kantorovich dual.
    Vector psi;
    /// Limit of psi_beta / beta as recorded (admissible only up to O(1/beta)).
    Vector rawPsi;
    TransportPlan plan;
    double hMaxEstimate = 0.0;
    /// relative_entropy(plan) agrees with hMaxEstimate within 1e-3.
    bool entropyConsistent = false;
    bool converged = false;
    double phiDelta = 0.0;
    double psiDelta = 0.0;
    double planDelta = 0.0;
    double beta = 0.0;
};

/// Default threshold on the successive sup-norm changes of the scaled
/// potentials and the plan between the last two records.
inline constexpr double kDefaultLimitTol = 1e-3;

/// Reads the limit off the last two records. Needs at least 3 records.
ZeroTempResult extract_limit(const TransportProblem& prob, const Trajectory& trajectory,
                             double limitTol = kDefaultLimitTol);

struct ExcessPoint {
    double beta;
    double excess;
};

/// The (beta, P(beta A) - beta m(A)) column; throws InvariantError when it
/// increases by more than 1e-9 anywhere.
std::vector<ExcessPoint> pressure_excess(const Trajectory& trajectory);

/// CSV with header beta,pressure,excess,entropy,cost,maxPhiDelta.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace ztot
