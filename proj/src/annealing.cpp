#include "ztot/annealing.hpp"

#include "ztot/duality.hpp"
#include "ztot/errors.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace ztot {

namespace {

constexpr double kMonotoneSlack = 1e-9;

}  // namespace

Schedule::Schedule(std::vector<double> betas) : betas_(std::move(betas)) {
    if (betas_.empty()) throw ArgumentError("schedule must contain at least one beta");
    if (!(betas_.front() >= 1e-6)) throw ArgumentError("schedule must start at beta >= 1e-6");
    if (!(betas_.back() <= 1e7)) throw ArgumentError("schedule must end at beta <= 1e7");
    for (std::size_t k = 1; k < betas_.size(); ++k) {
        if (!(betas_[k] > betas_[k - 1])) throw ArgumentError("schedule must be strictly increasing");
    }
}

Schedule default_schedule(double betaMax, double factor) {
    if (!(betaMax > 1.0) || !std::isfinite(betaMax)) throw ArgumentError("default_schedule: betaMax must exceed 1");
    if (!(factor > 1.0) || !std::isfinite(factor)) throw ArgumentError("default_schedule: factor must exceed 1");
    std::vector<double> betas;
    // Values within a relative 1e-12 of betaMax count as reaching it.
    for (double b = 1.0; b < betaMax * (1.0 - 1e-12); b *= factor) betas.push_back(b);
    betas.push_back(betaMax);
    return Schedule(std::move(betas));
}

Trajectory anneal(const TransportProblem& prob, const Schedule& schedule, const AnnealOptions& opts) {
    Trajectory traj;
    std::optional<PotentialPair> warm;
    double prevBeta = 0.0;
    for (double beta : schedule.betas()) {
        if (warm) {
            warm->phi *= beta / prevBeta;
            warm->psi *= beta / prevBeta;
        }
        SolveResult solved;
        try {
            solved = schrodinger_solve(prob, beta, opts.solve, warm);
        } catch (const ConvergenceError& e) {
            std::ostringstream msg;
            msg << "anneal: solve failed at beta=" << beta << ": " << e.what();
            throw ConvergenceError(msg.str(), e.last_residual(), beta);
        }
        const PotentialPair& pair = solved.pair;
        Vector scaledPhi = pair.phi / beta;
        const double delta =
            traj.records.empty() ? 0.0 : (scaledPhi - traj.records.back().scaledPhi).cwiseAbs().maxCoeff();
        TransportPlan plan = gibbs_plan(prob, pair);
        const double entropy = relative_entropy(plan, prob.mu, prob.nu).value();
        const double cost = linear_cost(plan, prob.cost);
        traj.records.push_back(TrajectoryRecord{
            .beta = beta,
            .pair = pair,
            .scaledPhi = std::move(scaledPhi),
            .scaledPsi = pair.psi / beta,
            .plan = std::move(plan),
            .logPlan = gibbs_log_plan(prob, pair),
            .pressure = pressure(prob, pair),
            .excess = 0.0,
            .entropy = entropy,
            .cost = cost,
            .maxPhiDelta = delta,
            .report = solved.report,
        });
        warm = pair;
        prevBeta = beta;
    }

    if (oracle_applicable(prob.mu, prob.nu, opts.oracle)) {
        traj.mA = exact_ot(prob.mu, prob.nu, prob.cost.c(), opts.oracle).mA;
        traj.mAExact = true;
    } else {
        // Weak duality: any admissible dual value bounds alpha from below, so
        // -dual is an upper bound on m(A) and keeps the excess monotone.
        const TrajectoryRecord& last = traj.records.back();
        const Vector psi = c_transform_to_y(last.scaledPhi, prob.cost.c());
        traj.mA = -dual_value(prob, last.scaledPhi, psi);
        traj.mAExact = false;
    }
    for (auto& rec : traj.records) rec.excess = rec.pressure - rec.beta * traj.mA;

    pressure_excess(traj);
    return traj;
}

std::vector<ExcessPoint> pressure_excess(const Trajectory& trajectory) {
    std::vector<ExcessPoint> out;
    out.reserve(trajectory.records.size());
    for (const auto& rec : trajectory.records) {
        if (!out.empty() && rec.excess > out.back().excess + kMonotoneSlack) {
            std::ostringstream msg;
            msg << "pressure excess increases from " << out.back().excess << " at beta=" << out.back().beta
                << " to " << rec.excess << " at beta=" << rec.beta << " (solver tolerance too loose?)";
            throw InvariantError(msg.str());
        }
        if (rec.excess > rec.entropy + kMonotoneSlack) {
            std::ostringstream msg;
            msg << "pressure excess " << rec.excess << " exceeds the plan entropy " << rec.entropy
                << " at beta=" << rec.beta;
            throw InvariantError(msg.str());
        }
        out.push_back({rec.beta, rec.excess});
    }
    return out;
}

ZeroTempResult extract_limit(const TransportProblem& prob, const Trajectory& trajectory, double limitTol) {
    const auto& recs = trajectory.records;
    if (recs.size() < 3) throw ArgumentError("extract_limit: needs a trajectory with at least 3 records");
    if (!(limitTol > 0.0)) throw ArgumentError("extract_limit: limitTol must be positive");
    const TrajectoryRecord& last = recs.back();
    const TrajectoryRecord& prev = recs[recs.size() - 2];

    const double phiDelta = (last.scaledPhi - prev.scaledPhi).cwiseAbs().maxCoeff();
    const double psiDelta = (last.scaledPsi - prev.scaledPsi).cwiseAbs().maxCoeff();
    const double planDelta = (last.plan.p() - prev.plan.p()).cwiseAbs().maxCoeff();
    const double entropy = relative_entropy(last.plan, prob.mu, prob.nu).value();

    return ZeroTempResult{
        .phi = last.scaledPhi,
        .psi = c_transform_to_y(last.scaledPhi, prob.cost.c()),
        .rawPsi = last.scaledPsi,
        .plan = last.plan,
        .hMaxEstimate = last.excess,
        .entropyConsistent = std::abs(last.excess - entropy) <= 1e-3,
        .converged = phiDelta <= limitTol && psiDelta <= limitTol && planDelta <= limitTol,
        .phiDelta = phiDelta,
        .psiDelta = psiDelta,
        .planDelta = planDelta,
        .beta = last.beta,
    };
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    out << "beta,pressure,excess,entropy,cost,maxPhiDelta\n";
    char buf[256];
    for (const auto& r : trajectory.records) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.beta, r.pressure, r.excess,
                      r.entropy, r.cost, r.maxPhiDelta);
        out << buf;
    }
}

}  // namespace ztot
