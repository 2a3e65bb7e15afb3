#pragma once

#include "ztot/measure.hpp"

#include <iosfwd>
#include <string>

namespace ztot {

/// Everything a transport run needs: the two spaces, their marginals and
/// the cost between them.
struct TransportProblem {
    TransportProblem(MetricSample x, MetricSample y, Marginal mu, Marginal nu, Matrix c,
                     bool sameSpace = false);

    /// X = Y with c = d.
    static TransportProblem kantorovich_rubinstein(MetricSample x, Marginal mu, Marginal nu);

    Eigen::Index rows() const { return cost.rows(); }
    Eigen::Index cols() const { return cost.cols(); }

    /// True when Y was declared to be X and c equals d entrywise within 1e-12.
    bool is_distance_cost() const;

    MetricSample x;
    MetricSample y;
    Marginal mu;
    Marginal nu;
    CostModel cost;
    bool sameSpace = false;
    Vector logMu;
    Vector logNu;
};

struct LoadOptions {
    bool checkTriangle = true;
};

/// Reads the JSON problem format
///   { "X": {"points": [...], "dist": [[...]]}, "Y": {...} | "same",
///     "mu": [...], "nu": [...], "cost": [[...]] }
/// Throws ParseError with the offending field path on malformed input and
/// InvariantError/DimensionError when the data break a type invariant.
TransportProblem parse_problem(std::istream& in, const LoadOptions& opts = {});
TransportProblem load_problem(const std::string& path, const LoadOptions& opts = {});

}  // namespace ztot
