#include "ztot/deviations.hpp"

#include "ztot/errors.hpp"
#include "ztot/potentials.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace ztot {

RateFunction rate_function(const Matrix& cost, const Vector& phi, const Vector& psi) {
    if (phi.size() != cost.rows() || psi.size() != cost.cols()) {
        throw DimensionError("rate_function: potentials do not match the cost shape");
    }
    Matrix rate = cost;
    rate.colwise() -= phi;
    rate.rowwise() -= psi.transpose();
    const double low = rate.minCoeff();
    if (low < -1e-6) {
        throw InvariantError("rate_function: pair is not admissible (min slack " + std::to_string(low) + ")");
    }
    rate = rate.cwiseMax(0.0);
    if (rate.minCoeff() > 1e-6) {
        throw InvariantError("rate_function: rate has no zero; the pair is not a conjugate limit pair");
    }
    return RateFunction{std::move(rate)};
}

RateFunction rate_function(const TransportProblem& prob, const ZeroTempResult& limit) {
    if (!limit.converged) {
        throw ConvergenceError("rate_function: zero-temperature limit did not converge; refusing to guess a limit pair",
                               std::max({limit.phiDelta, limit.psiDelta, limit.planDelta}), limit.beta);
    }
    return rate_function(prob.cost.c(), limit.phi, limit.psi);
}

std::vector<RatePoint> empirical_rate(const Trajectory& trajectory, Eigen::Index i, Eigen::Index j) {
    std::vector<RatePoint> out;
    for (const auto& rec : trajectory.records) {
        if (i < 0 || j < 0 || i >= rec.logPlan.rows() || j >= rec.logPlan.cols()) {
            throw ArgumentError("empirical_rate: cell out of range");
        }
        out.push_back({rec.beta, -rec.logPlan(i, j) / rec.beta});
    }
    return out;
}

SetRate set_rate(const Trajectory& trajectory, const RateFunction& rate, const std::vector<Cell>& cells) {
    if (cells.empty()) throw ArgumentError("set_rate: subset must be nonempty");
    if (trajectory.records.empty()) throw ArgumentError("set_rate: empty trajectory");
    const TrajectoryRecord& last = trajectory.records.back();
    Vector logs(static_cast<Eigen::Index>(cells.size()));
    double minRate = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto [i, j] = cells[k];
        if (i < 0 || j < 0 || i >= rate.I.rows() || j >= rate.I.cols()) {
            throw ArgumentError("set_rate: cell out of range");
        }
        logs[static_cast<Eigen::Index>(k)] = last.logPlan(i, j);
        minRate = std::min(minRate, rate.I(i, j));
    }
    return {-log_sum_exp(logs) / last.beta, minRate, last.beta};
}

double gamma(const RateFunction& rate, const Matrix& f) {
    if (f.rows() != rate.I.rows() || f.cols() != rate.I.cols()) {
        throw DimensionError("gamma: test function does not match the rate table");
    }
    return (f - rate.I).maxCoeff();
}

double gibbs_identity_residual(const TransportProblem& prob, const TrajectoryRecord& record) {
    const double beta = record.beta;
    Matrix id = -record.logPlan / beta + prob.cost.payoff();
    id.colwise() += prob.logMu / beta + record.scaledPhi;
    id.rowwise() += (prob.logNu / beta + record.scaledPsi).transpose();
    return id.cwiseAbs().maxCoeff();
}

double rate_error(const TrajectoryRecord& record, const RateFunction& rate) {
    return (-record.logPlan / record.beta - rate.I).cwiseAbs().maxCoeff();
}

void write_rate_csv(std::ostream& out, const Trajectory& trajectory, const RateFunction& rate) {
    out << "beta,cell,r_beta,I\n";
    char buf[256];
    for (const auto& rec : trajectory.records) {
        for (Eigen::Index i = 0; i < rate.I.rows(); ++i) {
            for (Eigen::Index j = 0; j < rate.I.cols(); ++j) {
                std::snprintf(buf, sizeof buf, "%.17g,%ld:%ld,%.17g,%.17g\n", rec.beta, static_cast<long>(i),
                              static_cast<long>(j), -rec.logPlan(i, j) / rec.beta, rate.I(i, j));
                out << buf;
            }
        }
    }
}

}  // namespace ztot
