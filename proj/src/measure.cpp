#include "ztot/measure.hpp"

#include "ztot/errors.hpp"

#include <cmath>
#include <sstream>

namespace ztot {

double ExtendedReal::value() const {
    if (!is_finite()) {
        throw InvariantError(is_pos_inf() ? "value is +inf" : "value is -inf");
    }
    return value_;
}

// ---------------------------------------------------------------------------
// MetricSample

MetricSample::MetricSample(std::vector<std::string> points, Matrix dist, bool checkTriangle)
    : points_(std::move(points)), dist_(std::move(dist)) {
    const Eigen::Index n = dist_.rows();
    if (n == 0 || dist_.cols() != n) {
        throw DimensionError("distance table must be square and non-empty");
    }
    if (static_cast<Eigen::Index>(points_.size()) != n) {
        throw DimensionError("point list and distance table differ in size");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (dist_(i, i) != 0.0) {
            throw InvariantError("distance table has a nonzero diagonal entry at " + std::to_string(i));
        }
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (!std::isfinite(dist_(i, j)) || dist_(i, j) <= 0.0) {
                throw InvariantError("distance between distinct points must be positive and finite");
            }
            if (std::abs(dist_(i, j) - dist_(j, i)) > kConstructionTol) {
                throw InvariantError("distance table is not symmetric");
            }
        }
    }
    if (!checkTriangle) return;
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (dist_(i, j) > dist_(i, k) + dist_(k, j) + kConstructionTol) {
                    std::ostringstream msg;
                    msg << "triangle inequality fails for (" << i << ", " << k << ", " << j << ")";
                    throw InvariantError(msg.str());
                }
            }
        }
    }
}

MetricSample MetricSample::from_table(Matrix dist, bool checkTriangle) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(dist.rows()));
    for (Eigen::Index i = 0; i < dist.rows(); ++i) names.push_back(std::to_string(i));
    return MetricSample(std::move(names), std::move(dist), checkTriangle);
}

MetricSample MetricSample::on_line(const std::vector<double>& coords) {
    const auto n = static_cast<Eigen::Index>(coords.size());
    Matrix d(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::abs(coords[i] - coords[j]);
    return from_table(std::move(d));
}

// ---------------------------------------------------------------------------
// Marginal

Marginal::Marginal(Vector weights) : weights_(std::move(weights)) {
    if (weights_.size() == 0) throw DimensionError("marginal must have at least one point");
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
        if (!std::isfinite(weights_[i]) || weights_[i] <= 0.0) {
            throw InvariantError("marginal weight " + std::to_string(i) + " is not strictly positive");
        }
    }
    if (std::abs(weights_.sum() - 1.0) > kConstructionTol) {
        throw InvariantError("marginal weights do not sum to 1");
    }
}

Marginal Marginal::uniform(Eigen::Index n) {
    return Marginal(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

bool Marginal::is_uniform() const {
    const double w = 1.0 / static_cast<double>(weights_.size());
    return ((weights_.array() - w).abs() <= kConstructionTol).all();
}

// ---------------------------------------------------------------------------
// CostModel

CostModel::CostModel(Matrix c, const MetricSample& x, const MetricSample& y)
    : c_(std::move(c)) {
    if (c_.rows() != x.size() || c_.cols() != y.size()) {
        throw DimensionError("cost table shape does not match the metric samples");
    }
    if (!c_.allFinite()) throw InvariantError("cost table has non-finite entries");
    a_ = -c_;

    const Matrix& dx = x.dist();
    const Matrix& dy = y.dist();
    const Eigen::Index n = c_.rows();
    const Eigen::Index m = c_.cols();
    double lip = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            for (Eigen::Index j = 0; j < m; ++j) {
                for (Eigen::Index l = 0; l < m; ++l) {
                    if (i == k && j == l) continue;
                    lip = std::max(lip, std::abs(a_(i, j) - a_(k, l)) / (dx(i, k) + dy(j, l)));
                }
            }
        }
    }
    lipA_ = lip;
}

// ---------------------------------------------------------------------------
// TransportPlan

namespace {

void check_table(const Matrix& p) {
    if (p.size() == 0) throw DimensionError("plan must be non-empty");
    if (!p.allFinite() || (p.array() < 0.0).any()) {
        throw InvariantError("plan entries must be finite and nonnegative");
    }
    if (std::abs(p.sum() - 1.0) > kConstructionTol) {
        throw InvariantError("plan total mass differs from 1");
    }
}

}  // namespace

TransportPlan::TransportPlan(Matrix p) : p_(std::move(p)) { check_table(p_); }

TransportPlan::TransportPlan(Matrix p, const Marginal& mu, const Marginal& nu)
    : p_(std::move(p)) {
    if (p_.rows() != mu.size() || p_.cols() != nu.size()) {
        throw DimensionError("plan shape does not match the marginals");
    }
    check_table(p_);
    rowResidual_ = (p_.rowwise().sum() - mu.weights()).cwiseAbs().maxCoeff();
    colResidual_ = (p_.colwise().sum().transpose() - nu.weights()).cwiseAbs().maxCoeff();
}

TransportPlan TransportPlan::unchecked(Matrix p) { return TransportPlan(std::move(p)); }

// ---------------------------------------------------------------------------
// Functionals

ExtendedReal kl_divergence(const TransportPlan& eta, const TransportPlan& rho) {
    if (eta.rows() != rho.rows() || eta.cols() != rho.cols()) {
        throw DimensionError("kl_divergence: plans differ in shape");
    }
    double sum = 0.0;
    for (Eigen::Index j = 0; j < eta.cols(); ++j) {
        for (Eigen::Index i = 0; i < eta.rows(); ++i) {
            const double e = eta(i, j);
            if (e == 0.0) continue;
            const double r = rho(i, j);
            if (r == 0.0) return ExtendedReal::pos_inf();
            sum += e * std::log(e / r);
        }
    }
    // Mass-one inputs make the sum nonnegative; clip rounding below zero.
    return ExtendedReal(std::max(sum, 0.0));
}

ExtendedReal relative_entropy(const TransportPlan& pi, const Marginal& mu, const Marginal& nu) {
    if (pi.rows() != mu.size() || pi.cols() != nu.size()) {
        throw DimensionError("relative_entropy: plan shape does not match the marginals");
    }
    const TransportPlan checked(pi.p(), mu, nu);
    if (!checked.feasible()) {
        throw FeasibilityError("relative_entropy: plan is not a coupling of the given marginals");
    }
    return -kl_divergence(pi, product_plan(mu, nu));
}

TransportPlan product_plan(const Marginal& mu, const Marginal& nu) {
    return TransportPlan(mu.weights() * nu.weights().transpose(), mu, nu);
}

double linear_cost(const TransportPlan& pi, const Matrix& table) {
    if (pi.rows() != table.rows() || pi.cols() != table.cols()) {
        throw DimensionError("linear_cost: plan and cost differ in shape");
    }
    return pi.p().cwiseProduct(table).sum();
}

double linear_cost(const TransportPlan& pi, const CostModel& cost) {
    return linear_cost(pi, cost.c());
}

double lipschitz_constant(const Vector& f, const Matrix& dist) {
    if (dist.rows() != f.size() || dist.cols() != f.size()) {
        throw DimensionError("lipschitz_constant: vector and metric differ in size");
    }
    double lip = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i)
        for (Eigen::Index j = i + 1; j < f.size(); ++j)
            lip = std::max(lip, std::abs(f[i] - f[j]) / dist(i, j));
    return lip;
}

}  // namespace ztot
