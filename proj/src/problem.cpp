#include "ztot/problem.hpp"

#include "ztot/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <istream>

namespace ztot {

TransportProblem::TransportProblem(MetricSample x_, MetricSample y_, Marginal mu_, Marginal nu_,
                                   Matrix c, bool sameSpace_)
    : x(std::move(x_)),
      y(std::move(y_)),
      mu(std::move(mu_)),
      nu(std::move(nu_)),
      cost(std::move(c), x, y),
      sameSpace(sameSpace_),
      logMu(mu.weights().array().log()),
      logNu(nu.weights().array().log()) {
    if (mu.size() != x.size()) throw DimensionError("mu and X differ in size");
    if (nu.size() != y.size()) throw DimensionError("nu and Y differ in size");
    if (sameSpace && x.size() != y.size()) throw DimensionError("Y declared same as X but sizes differ");
}

TransportProblem TransportProblem::kantorovich_rubinstein(MetricSample x, Marginal mu, Marginal nu) {
    Matrix d = x.dist();
    MetricSample y = x;
    return TransportProblem(std::move(x), std::move(y), std::move(mu), std::move(nu), std::move(d), true);
}

bool TransportProblem::is_distance_cost() const {
    if (!sameSpace) return false;
    return ((cost.c() - x.dist()).cwiseAbs().array() <= kConstructionTol).all();
}

// ---------------------------------------------------------------------------
// JSON loading

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw ParseError(path + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(path + "." + key + ": missing field");
    return *it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ParseError(path + ": expected a number");
    return v.get<double>();
}

Vector read_vector(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ParseError(path + ": expected a non-empty array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = number(v[i], path + "[" + std::to_string(i) + "]");
    }
    return out;
}

Matrix read_matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ParseError(path + ": expected a non-empty array of rows");
    const std::size_t rows = v.size();
    std::size_t cols = 0;
    Matrix out;
    for (std::size_t i = 0; i < rows; ++i) {
        const std::string rowPath = path + "[" + std::to_string(i) + "]";
        const json& row = v[i];
        if (!row.is_array() || row.empty()) throw ParseError(rowPath + ": expected a non-empty array");
        if (i == 0) {
            cols = row.size();
            out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (row.size() != cols) {
            throw ParseError(rowPath + ": ragged row (expected " + std::to_string(cols) + " entries)");
        }
        for (std::size_t j = 0; j < cols; ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                number(row[j], rowPath + "[" + std::to_string(j) + "]");
        }
    }
    return out;
}

MetricSample read_space(const json& v, const std::string& path, const LoadOptions& opts) {
    Matrix dist = read_matrix(field(v, "dist", path), path + ".dist");
    std::vector<std::string> names;
    if (auto it = v.find("points"); it != v.end()) {
        if (!it->is_array()) throw ParseError(path + ".points: expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const json& p = (*it)[i];
            names.push_back(p.is_string() ? p.get<std::string>() : p.dump());
        }
    } else {
        for (Eigen::Index i = 0; i < dist.rows(); ++i) names.push_back(std::to_string(i));
    }
    return MetricSample(std::move(names), std::move(dist), opts.checkTriangle);
}

}  // namespace

TransportProblem parse_problem(std::istream& in, const LoadOptions& opts) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("problem file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("$: expected a JSON object");

    MetricSample x = read_space(field(doc, "X", "$"), "$.X", opts);
    const json& yNode = field(doc, "Y", "$");
    bool same = false;
    if (yNode.is_string()) {
        if (yNode.get<std::string>() != "same") throw ParseError("$.Y: only the string \"same\" is accepted");
        same = true;
    }
    MetricSample y = same ? x : read_space(yNode, "$.Y", opts);
    Marginal mu(read_vector(field(doc, "mu", "$"), "$.mu"));
    Marginal nu(read_vector(field(doc, "nu", "$"), "$.nu"));
    Matrix cost = read_matrix(field(doc, "cost", "$"), "$.cost");
    return TransportProblem(std::move(x), std::move(y), std::move(mu), std::move(nu), std::move(cost), same);
}

TransportProblem load_problem(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open problem file '" + path + "'");
    return parse_problem(in, opts);
}

}  // namespace ztot
