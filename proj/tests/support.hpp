#pragma once

// Shared fixtures for the test binaries: small named instances, random
// instance generators, and brute-force reference computations that do not
// go through the library's own code paths.

#include "ztot/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace ztot::testing {

inline MetricSample two_points(double d = 1.0) {
    Matrix dist(2, 2);
    dist << 0.0, d, d, 0.0;
    return MetricSample::from_table(dist);
}

inline Marginal weights(std::initializer_list<double> w) {
    Vector v(static_cast<Eigen::Index>(w.size()));
    Eigen::Index k = 0;
    for (double x : w) v[k++] = x;
    return Marginal(v);
}

/// mu = nu = (1/2, 1/2), c = [[0,1],[1,0]].
inline TransportProblem identity_cost_2x2() {
    Matrix c(2, 2);
    c << 0.0, 1.0, 1.0, 0.0;
    return TransportProblem(two_points(), two_points(), Marginal::uniform(2), Marginal::uniform(2), c);
}

/// mu = nu = (1/2, 1/2), c = 0.
inline TransportProblem zero_cost_2x2() {
    return TransportProblem(two_points(), two_points(), Marginal::uniform(2), Marginal::uniform(2),
                            Matrix::Zero(2, 2));
}

inline TransportProblem constant_cost(Eigen::Index n, Eigen::Index m, double k) {
    std::vector<double> xs(static_cast<std::size_t>(n)), ys(static_cast<std::size_t>(m));
    std::iota(xs.begin(), xs.end(), 0.0);
    std::iota(ys.begin(), ys.end(), 0.0);
    Vector mu = Vector::LinSpaced(n, 1.0, static_cast<double>(n));
    Vector nu = Vector::LinSpaced(m, 2.0, 1.0);
    return TransportProblem(MetricSample::on_line(xs), MetricSample::on_line(ys), Marginal(mu / mu.sum()),
                            Marginal(nu / nu.sum()), Matrix::Constant(n, m, k));
}

/// Two points at distance 1, mu = (0.9, 0.1), nu = (0.1, 0.9), c = d.
inline TransportProblem kr_two_point() {
    return TransportProblem::kantorovich_rubinstein(two_points(), weights({0.9, 0.1}), weights({0.1, 0.9}));
}

inline Vector random_weights(std::mt19937_64& rng, Eigen::Index n) {
    std::uniform_real_distribution<double> u(0.2, 1.2);
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = u(rng);
    return w / w.sum();
}

/// Points uniform in the unit square with Euclidean distances.
inline MetricSample random_plane_points(std::mt19937_64& rng, Eigen::Index n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::pair<double, double>> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) p = {u(rng), u(rng)};
    Matrix d(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            d(i, j) = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
    return MetricSample::from_table(d);
}

/// Random marginals and costs uniform in [0, 1].
inline TransportProblem random_problem(std::mt19937_64& rng, Eigen::Index n, Eigen::Index m) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix c(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) c(i, j) = u(rng);
    return TransportProblem(random_plane_points(rng, n), random_plane_points(rng, m), Marginal(random_weights(rng, n)),
                            Marginal(random_weights(rng, m)), c);
}

/// X = Y random plane points, c = d, random marginals.
inline TransportProblem random_kr_problem(std::mt19937_64& rng, Eigen::Index n) {
    return TransportProblem::kantorovich_rubinstein(random_plane_points(rng, n), Marginal(random_weights(rng, n)),
                                                    Marginal(random_weights(rng, n)));
}

/// A random coupling of (mu, nu): a random mixture of the product plan and
/// north-west-corner plans of randomly permuted marginals.
inline Matrix random_coupling(std::mt19937_64& rng, const Vector& mu, const Vector& nu) {
    const Eigen::Index n = mu.size();
    const Eigen::Index m = nu.size();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto corner = [&]() {
        std::vector<Eigen::Index> rows(static_cast<std::size_t>(n)), cols(static_cast<std::size_t>(m));
        std::iota(rows.begin(), rows.end(), 0);
        std::iota(cols.begin(), cols.end(), 0);
        std::shuffle(rows.begin(), rows.end(), rng);
        std::shuffle(cols.begin(), cols.end(), rng);
        Matrix p = Matrix::Zero(n, m);
        Vector a = mu;
        Vector b = nu;
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < rows.size() && j < cols.size()) {
            const double f = std::min(a[rows[i]], b[cols[j]]);
            p(rows[i], cols[j]) += f;
            a[rows[i]] -= f;
            b[cols[j]] -= f;
            if (a[rows[i]] <= b[cols[j]]) ++i;
            else ++j;
        }
        return p;
    };
    Matrix p = Matrix::Zero(n, m);
    double total = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double w = u(rng);
        p += w * corner();
        total += w;
    }
    const double w = u(rng);
    p += w * (mu * nu.transpose());
    total += w;
    p /= total;
    return p;
}

// --- reference computations ------------------------------------------------

/// -sum p log(p / (mu nu)) by a plain double loop.
inline double entropy_by_summation(const Matrix& p, const Vector& mu, const Vector& nu) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j)
            if (p(i, j) > 0.0) h -= p(i, j) * std::log(p(i, j) / (mu[i] * nu[j]));
    return h;
}

inline double cost_by_summation(const Matrix& p, const Matrix& c) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j) s += p(i, j) * c(i, j);
    return s;
}

/// -log sum_i exp(payoff(i, j) + s f(i)) mu_i with raw exponentials (small
/// payoffs only).
inline Vector t_mu_by_summation(const Matrix& payoff, const Vector& mu, double s, const Vector& f) {
    Vector g(payoff.cols());
    for (Eigen::Index j = 0; j < payoff.cols(); ++j) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < payoff.rows(); ++i) sum += std::exp(payoff(i, j) + s * f[i]) * mu[i];
        g[j] = -std::log(sum);
    }
    return g;
}

inline Vector t_nu_by_summation(const Matrix& payoff, const Vector& nu, double s, const Vector& g) {
    return t_mu_by_summation(payoff.transpose(), nu, s, g);
}

/// min over all n! permutations of (1/n) sum_i c(i, sigma(i)).
inline double permutation_scan(const Matrix& c) {
    const auto n = static_cast<int>(c.rows());
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += c(i, perm[i]);
        best = std::min(best, v / n);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Deviation of v from the nearest constant vector in sup norm.
inline double deviation_from_constant(const Vector& v) {
    return 0.5 * (v.maxCoeff() - v.minCoeff());
}

}  // namespace ztot::testing
