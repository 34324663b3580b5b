#pragma once
// Independent brute-force oracle for small optimal-transport problems: solves
// the coupling linear program min sum_ij g_ij |x_i - y_j|^q subject to the
// marginal constraints with a dense two-phase simplex (Bland's rule). Test
// code only; shares nothing with the quantile-formula implementation.

#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace oracle {

// Minimize c.x subject to A x = b, x >= 0. Assumes the problem is feasible
// and bounded (transportation polytopes are). Returns the optimal value and
// fills x_out with an optimal vertex.
inline double simplex_solve(const std::vector<std::vector<double>>& A,
                            const std::vector<double>& b, const std::vector<double>& c,
                            std::vector<double>& x_out) {
    const std::size_t m = A.size();
    const std::size_t n = c.size();
    const std::size_t total = n + m;  // structural + artificial
    constexpr double eps = 1e-10;

    // Tableau rows: [A | I | rhs], starting basis = artificials.
    std::vector<std::vector<double>> T(m, std::vector<double>(total + 1, 0.0));
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) T[i][j] = A[i][j];
        T[i][n + i] = 1.0;
        T[i][total] = b[i];
        basis[i] = n + i;
    }

    auto pivot = [&](std::size_t row, std::size_t col) {
        const double p = T[row][col];
        for (double& v : T[row]) v /= p;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row || T[i][col] == 0.0) continue;
            const double f = T[i][col];
            for (std::size_t j = 0; j <= total; ++j) T[i][j] -= f * T[row][j];
        }
        basis[row] = col;
    };

    // One simplex phase over the objective `obj` restricted to columns < limit.
    auto run_phase = [&](const std::vector<double>& obj, std::size_t limit) {
        while (true) {
            // Reduced costs: r_j = obj_j - obj_B . T_col_j  (Bland: first negative).
            std::size_t enter = total;
            for (std::size_t j = 0; j < limit; ++j) {
                double r = obj[j];
                for (std::size_t i = 0; i < m; ++i)
                    if (obj[basis[i]] != 0.0) r -= obj[basis[i]] * T[i][j];
                if (r < -eps) {
                    bool basic = false;
                    for (std::size_t i = 0; i < m; ++i) basic |= basis[i] == j;
                    if (!basic) {
                        enter = j;
                        break;
                    }
                }
            }
            if (enter == total) return;
            std::size_t leave = m;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m; ++i) {
                if (T[i][enter] > eps) {
                    const double ratio = T[i][total] / T[i][enter];
                    if (ratio < best - eps ||
                        (ratio < best + eps && (leave == m || basis[i] < basis[leave]))) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            assert(leave != m && "unbounded LP in transportation oracle");
            pivot(leave, enter);
        }
    };

    // Phase 1: minimize the sum of artificials.
    std::vector<double> phase1(total, 0.0);
    for (std::size_t j = n; j < total; ++j) phase1[j] = 1.0;
    run_phase(phase1, total);

    // Drive any leftover zero-level artificials out of the basis.
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < n) continue;
        bool swapped = false;
        for (std::size_t j = 0; j < n && !swapped; ++j) {
            if (std::abs(T[i][j]) > eps) {
                pivot(i, j);
                swapped = true;
            }
        }
        // A fully zero row is a redundant constraint; leave it.
    }

    // Phase 2 over the structural columns only.
    std::vector<double> phase2(total, 0.0);
    for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
    run_phase(phase2, n);

    x_out.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] < n) x_out[basis[i]] = T[i][total];
    double value = 0.0;
    for (std::size_t j = 0; j < n; ++j) value += c[j] * x_out[j];
    return value;
}

struct TransportSolution {
    double cost = 0.0;                     // optimal raw q-power cost
    std::vector<std::vector<double>> plan;  // gamma_ij
};

// Optimal coupling of two weighted atom lists under |x-y|^q.
inline TransportSolution transport_lp(const std::vector<double>& xs,
                                      const std::vector<double>& wx,
                                      const std::vector<double>& ys,
                                      const std::vector<double>& wy, int q) {
    const std::size_t m = xs.size();
    const std::size_t n = ys.size();
    const std::size_t vars = m * n;

    std::vector<double> cost(vars);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cost[i * n + j] = std::pow(std::abs(xs[i] - ys[j]), q);

    // Row-sum constraints for all sources, column sums for all sinks but the
    // last (redundant given equal total mass).
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> row(vars, 0.0);
        for (std::size_t j = 0; j < n; ++j) row[i * n + j] = 1.0;
        A.push_back(std::move(row));
        b.push_back(wx[i]);
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        std::vector<double> row(vars, 0.0);
        for (std::size_t i = 0; i < m; ++i) row[i * n + j] = 1.0;
        A.push_back(std::move(row));
        b.push_back(wy[j]);
    }

    std::vector<double> x;
    TransportSolution sol;
    sol.cost = simplex_solve(A, b, cost, x);
    sol.plan.assign(m, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) sol.plan[i][j] = x[i * n + j];
    return sol;
}

inline double wasserstein_lp(const std::vector<double>& xs, const std::vector<double>& wx,
                             const std::vector<double>& ys, const std::vector<double>& wy,
                             int q) {
    const double raw = transport_lp(xs, wx, ys, wy, q).cost;
    return q == 1 ? raw : std::pow(raw, 1.0 / q);
}

}  // namespace oracle
