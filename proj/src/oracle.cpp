#include "ztot/oracle.hpp"

#include "ztot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace ztot {

const char* to_string(OracleMethod m) {
    return m == OracleMethod::Permutation ? "Permutation" : "VertexEnum";
}

bool permutation_applicable(const Marginal& mu, const Marginal& nu, const OracleLimits& limits) {
    return mu.size() == nu.size() && mu.size() <= limits.maxPermutationSize && mu.is_uniform() &&
           nu.is_uniform();
}

bool vertex_enum_applicable(const Marginal& mu, const Marginal& nu, const OracleLimits& limits) {
    return mu.size() + nu.size() <= limits.maxVertexNodes;
}

bool oracle_applicable(const Marginal& mu, const Marginal& nu, const OracleLimits& limits) {
    return permutation_applicable(mu, nu, limits) || vertex_enum_applicable(mu, nu, limits);
}

namespace {

void check_cost(const Marginal& mu, const Marginal& nu, const Matrix& cost) {
    if (cost.rows() != mu.size() || cost.cols() != nu.size()) {
        throw DimensionError("oracle: cost shape does not match the marginals");
    }
}

// Keeps the running argmin set under the absolute cost tolerance.
class ArgminSet {
public:
    void offer(double value, const Matrix& plan) {
        if (value < best_ - kVertexTol) {
            best_ = value;
            std::erase_if(entries_, [&](const auto& e) { return e.first > best_ + kVertexTol; });
        }
        if (value <= best_ + kVertexTol) entries_.emplace_back(value, plan);
    }

    double best() const { return best_; }

    std::vector<Matrix> plans() const {
        std::vector<Matrix> out;
        for (const auto& e : entries_)
            if (e.first <= best_ + kVertexTol) out.push_back(e.second);
        return out;
    }

private:
    double best_ = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, Matrix>> entries_;
};

OracleResult finish(const ArgminSet& set, const Marginal& mu, const Marginal& nu, OracleMethod method) {
    OracleResult out;
    out.alpha = set.best();
    out.mA = -out.alpha;
    out.method = method;
    for (const Matrix& p : set.plans()) out.optimalVertices.emplace_back(p, mu, nu);
    return out;
}

// Union-find with rollback (union by size, no path compression).
class RollbackDsu {
public:
    explicit RollbackDsu(int n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

    int find(int v) const {
        while (parent_[v] != v) v = parent_[v];
        return v;
    }

    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        history_.push_back(b);
        return true;
    }

    void rollback() {
        const int b = history_.back();
        history_.pop_back();
        size_[parent_[b]] -= size_[b];
        parent_[b] = b;
    }

private:
    std::vector<int> parent_;
    std::vector<int> size_;
    std::vector<int> history_;
};

// Flows on a spanning tree of K_{n,m} meeting the marginals, by peeling
// leaves. Returns false when some flow is negative (infeasible basis).
bool tree_flows(const std::vector<int>& edges, const Vector& mu, const Vector& nu, Matrix& plan) {
    const auto n = static_cast<int>(mu.size());
    const auto m = static_cast<int>(nu.size());
    const int nodes = n + m;
    std::vector<double> remaining(static_cast<std::size_t>(nodes));
    for (int i = 0; i < n; ++i) remaining[i] = mu[i];
    for (int j = 0; j < m; ++j) remaining[n + j] = nu[j];

    std::vector<std::vector<int>> incident(static_cast<std::size_t>(nodes));
    for (int e : edges) {
        incident[e / m].push_back(e);
        incident[n + e % m].push_back(e);
    }
    std::vector<int> degree(static_cast<std::size_t>(nodes));
    for (int v = 0; v < nodes; ++v) degree[v] = static_cast<int>(incident[v].size());
    std::vector<char> used(static_cast<std::size_t>(n * m), 0);
    std::vector<int> leaves;
    for (int v = 0; v < nodes; ++v)
        if (degree[v] == 1) leaves.push_back(v);

    plan.setZero(n, m);
    std::size_t assigned = 0;
    while (!leaves.empty() && assigned < edges.size()) {
        const int leaf = leaves.back();
        leaves.pop_back();
        if (degree[leaf] != 1) continue;
        int edge = -1;
        for (int e : incident[leaf])
            if (!used[e]) edge = e;
        const int row = edge / m;
        const int other = (leaf == row) ? n + edge % m : row;
        const double flow = remaining[leaf];
        if (flow < -kVertexTol) return false;
        plan(row, edge % m) = std::max(flow, 0.0);
        remaining[other] -= flow;
        remaining[leaf] = 0.0;
        used[edge] = 1;
        ++assigned;
        --degree[leaf];
        if (--degree[other] == 1) leaves.push_back(other);
    }
    return assigned == edges.size();
}

std::vector<long long> plan_key(const Matrix& p) {
    std::vector<long long> key(static_cast<std::size_t>(p.size()));
    for (Eigen::Index k = 0; k < p.size(); ++k) key[k] = std::llround(p.data()[k] / kVertexTol);
    return key;
}

// Calls visit(plan) once per distinct vertex of Pi(mu, nu).
template <typename Visit>
void for_each_vertex(const Marginal& mu, const Marginal& nu, Visit&& visit) {
    const auto n = static_cast<int>(mu.size());
    const auto m = static_cast<int>(nu.size());
    const int need = n + m - 1;
    const int total = n * m;
    RollbackDsu dsu(n + m);
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(need));
    std::map<std::vector<long long>, bool> seen;
    Matrix plan;

    auto recurse = [&](auto&& self, int next) -> void {
        if (static_cast<int>(chosen.size()) == need) {
            if (tree_flows(chosen, mu.weights(), nu.weights(), plan)) {
                if (seen.emplace(plan_key(plan), true).second) visit(plan);
            }
            return;
        }
        for (int e = next; e <= total - (need - static_cast<int>(chosen.size())); ++e) {
            if (!dsu.unite(e / m, n + e % m)) continue;
            chosen.push_back(e);
            self(self, e + 1);
            chosen.pop_back();
            dsu.rollback();
        }
    };
    recurse(recurse, 0);
}

}  // namespace

OracleResult exact_ot_permutation(const Marginal& mu, const Marginal& nu, const Matrix& cost,
                                  const OracleLimits& limits) {
    check_cost(mu, nu, cost);
    if (!permutation_applicable(mu, nu, limits)) {
        throw CapacityError("permutation oracle needs n = m <= " + std::to_string(limits.maxPermutationSize) +
                            " and uniform marginals; use a large-beta approximation instead");
    }
    const auto n = static_cast<int>(mu.size());
    const double w = 1.0 / n;
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    ArgminSet set;
    Matrix plan(n, n);
    do {
        double value = 0.0;
        for (int i = 0; i < n; ++i) value += cost(i, perm[i]);
        value *= w;
        if (value <= set.best() + kVertexTol) {
            plan.setZero();
            for (int i = 0; i < n; ++i) plan(i, perm[i]) = w;
            set.offer(value, plan);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return finish(set, mu, nu, OracleMethod::Permutation);
}

OracleResult exact_ot_vertices(const Marginal& mu, const Marginal& nu, const Matrix& cost,
                               const OracleLimits& limits) {
    check_cost(mu, nu, cost);
    if (!vertex_enum_applicable(mu, nu, limits)) {
        throw CapacityError("vertex enumeration needs n + m <= " + std::to_string(limits.maxVertexNodes) +
                            "; use a large-beta approximation instead");
    }
    ArgminSet set;
    for_each_vertex(mu, nu, [&](const Matrix& plan) { set.offer(plan.cwiseProduct(cost).sum(), plan); });
    return finish(set, mu, nu, OracleMethod::VertexEnum);
}

OracleResult exact_ot(const Marginal& mu, const Marginal& nu, const Matrix& cost, const OracleLimits& limits) {
    if (permutation_applicable(mu, nu, limits)) return exact_ot_permutation(mu, nu, cost, limits);
    if (vertex_enum_applicable(mu, nu, limits)) return exact_ot_vertices(mu, nu, cost, limits);
    throw CapacityError("instance of size " + std::to_string(mu.size()) + "x" + std::to_string(nu.size()) +
                        " exceeds the exact oracle's cap; use a large-beta approximation instead");
}

std::vector<TransportPlan> transport_vertices(const Marginal& mu, const Marginal& nu, const OracleLimits& limits) {
    if (!vertex_enum_applicable(mu, nu, limits)) {
        throw CapacityError("vertex enumeration needs n + m <= " + std::to_string(limits.maxVertexNodes));
    }
    std::vector<TransportPlan> out;
    for_each_vertex(mu, nu, [&](const Matrix& plan) { out.emplace_back(plan, mu, nu); });
    return out;
}

// ---------------------------------------------------------------------------
// Max-entropy plan on the optimal face

namespace {

// H of a feasible table, without re-validating it.
double entropy_of(const Matrix& p, const Matrix& logProduct) {
    double h = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        const double v = p.data()[k];
        if (v > 0.0) h -= v * (std::log(v) - logProduct.data()[k]);
    }
    return h;
}

Matrix mix(const std::vector<Matrix>& vertices, const std::vector<double>& weights) {
    Matrix p = Matrix::Zero(vertices.front().rows(), vertices.front().cols());
    for (std::size_t k = 0; k < vertices.size(); ++k) p += weights[k] * vertices[k];
    return p;
}

// Visits every point of the simplex grid with the given number of steps per
// unit.
template <typename Visit>
void simplex_grid(std::size_t dims, int steps, Visit&& visit) {
    std::vector<int> counts(dims, 0);
    std::vector<double> weights(dims, 0.0);
    auto recurse = [&](auto&& self, std::size_t k, int left) -> void {
        if (k + 1 == dims) {
            counts[k] = left;
            for (std::size_t d = 0; d < dims; ++d) weights[d] = static_cast<double>(counts[d]) / steps;
            visit(weights);
            return;
        }
        for (int c = 0; c <= left; ++c) {
            counts[k] = c;
            self(self, k + 1, left - c);
        }
    };
    recurse(recurse, 0, steps);
}

}  // namespace

TransportPlan max_entropy_optimal(const OracleResult& result, const Marginal& mu, const Marginal& nu, double tol) {
    const auto& verts = result.optimalVertices;
    if (verts.empty()) throw ArgumentError("max_entropy_optimal: oracle result lists no vertices");
    if (verts.size() > 4) {
        throw CapacityError("max_entropy_optimal: optimal face has " + std::to_string(verts.size()) +
                            " vertices (cap 4)");
    }
    if (!(tol > 0.0)) throw ArgumentError("max_entropy_optimal: tol must be positive");
    if (verts.size() == 1) return verts.front();

    std::vector<Matrix> tables;
    for (const auto& v : verts) tables.push_back(v.p());
    const Matrix logProduct = (mu.weights() * nu.weights().transpose()).array().log().matrix();
    auto objective = [&](const std::vector<double>& w) { return entropy_of(mix(tables, w), logProduct); };

    // Step 1e-3 per coordinate up to triangles; a 3-simplex at that
    // resolution is ~1.7e8 points, so tetrahedra start from a 1e-2 grid.
    const int steps = tables.size() <= 3 ? 1000 : 100;
    std::vector<double> best;
    double bestValue = -std::numeric_limits<double>::infinity();
    simplex_grid(tables.size(), steps, [&](const std::vector<double>& w) {
        const double v = objective(w);
        if (v > bestValue) {
            bestValue = v;
            best = w;
        }
    });

    // Pairwise ascent: move mass t from vertex b to vertex a, placing t by
    // bisection on the sign of dH/dt. H is flat at its maximum, so comparing
    // H values only locates it to ~sqrt(eps); the derivative is resolved to
    // rounding.
    auto slope = [&](const std::vector<double>& w, const Matrix& dir) {
        const Matrix p = mix(tables, w);
        double g = 0.0;
        for (Eigen::Index k = 0; k < p.size(); ++k) {
            const double d = dir.data()[k];
            if (d == 0.0) continue;
            const double v = p.data()[k];
            if (v <= 0.0) return d > 0.0 ? std::numeric_limits<double>::infinity()
                                         : -std::numeric_limits<double>::infinity();
            g -= d * (std::log(v) - logProduct.data()[k]);
        }
        return g;
    };
    for (int round = 0; round < 500; ++round) {
        double moved = 0.0;
        for (std::size_t a = 0; a < tables.size(); ++a) {
            for (std::size_t b = a + 1; b < tables.size(); ++b) {
                const Matrix dir = tables[a] - tables[b];
                auto slope_at = [&](double t) {
                    std::vector<double> w = best;
                    w[a] += t;
                    w[b] -= t;
                    return slope(w, dir);
                };
                double lo = -best[a];
                double hi = best[b];
                double t;
                if (slope_at(lo) <= 0.0) {
                    t = lo;
                } else if (slope_at(hi) >= 0.0) {
                    t = hi;
                } else {
                    for (int it = 0; it < 200; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        if (mid <= lo || mid >= hi) break;
                        (slope_at(mid) > 0.0 ? lo : hi) = mid;
                    }
                    t = 0.5 * (lo + hi);
                }
                best[a] = std::max(best[a] + t, 0.0);
                best[b] = std::max(best[b] - t, 0.0);
                moved = std::max(moved, std::abs(t));
            }
        }
        if (moved <= tol) break;
    }
    const double total = std::accumulate(best.begin(), best.end(), 0.0);
    for (double& w : best) w /= total;
    return TransportPlan(mix(tables, best), mu, nu);
}

bool is_optimal(const TransportPlan& plan, const Matrix& cost, const OracleResult& result, double tol) {
    if (plan.rows() != cost.rows() || plan.cols() != cost.cols()) {
        throw DimensionError("is_optimal: plan and cost differ in shape");
    }
    return plan.feasible() && linear_cost(plan, cost) <= result.alpha + tol;
}

}  // namespace ztot
