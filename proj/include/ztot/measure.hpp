#pragma once

// Ground types for transport on finite metric spaces: metric samples,
// strictly positive marginals, cost tables, couplings, and the entropy /
// divergence functionals defined on them.

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ztot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Tolerance on metric axioms and on marginal normalization at construction.
inline constexpr double kConstructionTol = 1e-12;
/// Tolerance on plan marginals for a plan to count as feasible.
inline constexpr double kFeasibilityTol = 1e-9;

/// A real number or +/- infinity, with infinity carried as an explicit tag
/// instead of an overflowed double.
class ExtendedReal {
public:
    enum class Kind { Finite, PosInf, NegInf };

    constexpr ExtendedReal() = default;
    constexpr explicit ExtendedReal(double v) : value_(v) {}

    static constexpr ExtendedReal pos_inf() { return ExtendedReal(Kind::PosInf); }
    static constexpr ExtendedReal neg_inf() { return ExtendedReal(Kind::NegInf); }

    constexpr Kind kind() const { return kind_; }
    constexpr bool is_finite() const { return kind_ == Kind::Finite; }
    constexpr bool is_pos_inf() const { return kind_ == Kind::PosInf; }
    constexpr bool is_neg_inf() const { return kind_ == Kind::NegInf; }

    /// Finite value; throws InvariantError on an infinite value.
    double value() const;

    constexpr ExtendedReal operator-() const {
        switch (kind_) {
            case Kind::PosInf: return neg_inf();
            case Kind::NegInf: return pos_inf();
            default: return ExtendedReal(-value_);
        }
    }

private:
    constexpr explicit ExtendedReal(Kind k) : kind_(k) {}

    Kind kind_ = Kind::Finite;
    double value_ = 0.0;
};

/// A finite metric space: opaque point identifiers plus a distance table.
class MetricSample {
public:
    /// Validates symmetry, zero diagonal, positivity off the diagonal and,
    /// unless `checkTriangle` is false, the triangle inequality (O(n^3)).
    MetricSample(std::vector<std::string> points, Matrix dist, bool checkTriangle = true);

    /// Points named "0", "1", ... for the given table.
    static MetricSample from_table(Matrix dist, bool checkTriangle = true);

    /// Points on the real line with |a - b| distances.
    static MetricSample on_line(const std::vector<double>& coords);

    Eigen::Index size() const { return dist_.rows(); }
    const std::vector<std::string>& points() const { return points_; }
    const Matrix& dist() const { return dist_; }
    double diameter() const { return dist_.maxCoeff(); }

private:
    std::vector<std::string> points_;
    Matrix dist_;
};

/// Probability weights with full support.
class Marginal {
public:
    explicit Marginal(Vector weights);
    static Marginal uniform(Eigen::Index n);

    Eigen::Index size() const { return weights_.size(); }
    const Vector& weights() const { return weights_; }
    double operator[](Eigen::Index i) const { return weights_[i]; }
    bool is_uniform() const;

private:
    Vector weights_;
};

/// Cost table c on X x Y with payoff A = -c and the Lipschitz constant of
/// A against the product metric d_X + d_Y.
class CostModel {
public:
    CostModel(Matrix c, const MetricSample& x, const MetricSample& y);

    Eigen::Index rows() const { return c_.rows(); }
    Eigen::Index cols() const { return c_.cols(); }
    const Matrix& c() const { return c_; }
    const Matrix& payoff() const { return a_; }
    double lip_payoff() const { return lipA_; }

private:
    Matrix c_;
    Matrix a_;
    double lipA_ = 0.0;
};

/// A nonnegative unit-mass table together with its marginal residuals
/// against the (mu, nu) it was built for.
class TransportPlan {
public:
    TransportPlan(Matrix p, const Marginal& mu, const Marginal& nu);

    /// A unit-mass table without reference marginals; residuals are zero and
    /// the plan is only usable where marginals do not matter.
    static TransportPlan unchecked(Matrix p);

    Eigen::Index rows() const { return p_.rows(); }
    Eigen::Index cols() const { return p_.cols(); }
    const Matrix& p() const { return p_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return p_(i, j); }
    double row_residual() const { return rowResidual_; }
    double col_residual() const { return colResidual_; }
    double max_residual() const { return std::max(rowResidual_, colResidual_); }
    bool feasible() const {
        return rowResidual_ <= kFeasibilityTol && colResidual_ <= kFeasibilityTol;
    }

private:
    explicit TransportPlan(Matrix p);

    Matrix p_;
    double rowResidual_ = 0.0;
    double colResidual_ = 0.0;
};

/// Sum of eta * log(eta / rho) with 0 log 0 = 0; +inf when eta charges a
/// cell where rho vanishes.
ExtendedReal kl_divergence(const TransportPlan& eta, const TransportPlan& rho);

/// H(pi) = -KL(pi | mu x nu). Throws FeasibilityError for plans outside
/// Pi(mu, nu).
ExtendedReal relative_entropy(const TransportPlan& pi, const Marginal& mu, const Marginal& nu);

TransportPlan product_plan(const Marginal& mu, const Marginal& nu);

double linear_cost(const TransportPlan& pi, const CostModel& cost);
double linear_cost(const TransportPlan& pi, const Matrix& table);

/// max_{i != j} |f(i) - f(j)| / dist(i, j).
double lipschitz_constant(const Vector& f, const Matrix& dist);

}  // namespace ztot
