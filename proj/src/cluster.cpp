#include "mvclab/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mvclab/errors.hpp"

namespace mvclab::cluster {

namespace {

double sq_dist(const Tensor& a, int64_t ra, const Tensor& b, int64_t rb) {
    double s = 0.0;
    for (int64_t j = 0; j < a.cols(); ++j) {
        const double d = a.at(ra, j) - b.at(rb, j);
        s += d * d;
    }
    return s;
}

// Weighted index draw by cumulative scan; avoids std::discrete_distribution
// so the consumed random sequence is fully pinned down.
int64_t draw_weighted(const std::vector<double>& w, std::mt19937_64& rng) {
    double total = 0.0;
    for (double x : w) total += x;
    if (total <= 0.0) {
        std::uniform_int_distribution<int64_t> uni(0, static_cast<int64_t>(w.size()) - 1);
        return uni(rng);
    }
    std::uniform_real_distribution<double> uni(0.0, total);
    const double r = uni(rng);
    double acc = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        if (r < acc) return static_cast<int64_t>(i);
    }
    return static_cast<int64_t>(w.size()) - 1;
}

// O(n^3) minimum-cost assignment with row/column potentials.
std::pair<std::vector<int>, double> assignment_core(const std::vector<std::vector<double>>& a) {
    const int n = static_cast<int>(a.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<size_t>(n) + 1), v(static_cast<size_t>(n) + 1);
    std::vector<int> p(static_cast<size_t>(n) + 1, 0), way(static_cast<size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<size_t>(n) + 1, 0);
        do {
            used[static_cast<size_t>(j0)] = 1;
            const int i0 = p[static_cast<size_t>(j0)];
            double delta = inf;
            int j1 = -1;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const double cur = a[static_cast<size_t>(i0 - 1)][static_cast<size_t>(j - 1)] -
                                   u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<size_t>(j0)];
            p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> perm(static_cast<size_t>(n), -1);
    double cost = 0.0;
    for (int j = 1; j <= n; ++j) {
        if (p[static_cast<size_t>(j)] > 0) {
            perm[static_cast<size_t>(p[static_cast<size_t>(j)] - 1)] = j - 1;
            cost += a[static_cast<size_t>(p[static_cast<size_t>(j)] - 1)][static_cast<size_t>(j - 1)];
        }
    }
    return {std::move(perm), cost};
}

}  // namespace

KMeansResult kmeans(const Tensor& features, int k, uint64_t seed, int max_iter, double tol) {
    const int64_t m = features.rows();
    const int64_t h = features.cols();
    if (k < 1) throw ContractError("kmeans: k must be >= 1");
    if (m < k) throw ContractError("kmeans: need at least k samples");
    if (max_iter < 1) throw ContractError("kmeans: max_iter must be >= 1");

    std::mt19937_64 rng(seed);
    Tensor centroids({static_cast<int64_t>(k), h});

    // k-means++ seeding.
    std::uniform_int_distribution<int64_t> uni(0, m - 1);
    const int64_t first = uni(rng);
    for (int64_t j = 0; j < h; ++j) centroids.at(0, j) = features.at(first, j);
    std::vector<double> min_d(static_cast<size_t>(m), std::numeric_limits<double>::infinity());
    for (int c = 1; c < k; ++c) {
        for (int64_t i = 0; i < m; ++i)
            min_d[static_cast<size_t>(i)] =
                std::min(min_d[static_cast<size_t>(i)], sq_dist(features, i, centroids, c - 1));
        const int64_t pick = draw_weighted(min_d, rng);
        for (int64_t j = 0; j < h; ++j) centroids.at(c, j) = features.at(pick, j);
    }

    KMeansResult res;
    res.assignments.assign(static_cast<size_t>(m), 0);
    std::vector<int64_t> counts(static_cast<size_t>(k), 0);
    for (int it = 0; it < max_iter; ++it) {
        // Assignment step.
        double objective = 0.0;
        for (int64_t i = 0; i < m; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                const double d = sq_dist(features, i, centroids, c);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            res.assignments[static_cast<size_t>(i)] = best_c;
            objective += best;
        }
        res.objective_history.push_back(objective);
        res.objective = objective;
        res.iterations = it + 1;

        // Update step.
        Tensor next({static_cast<int64_t>(k), h});
        std::fill(counts.begin(), counts.end(), 0);
        for (int64_t i = 0; i < m; ++i) {
            const int c = res.assignments[static_cast<size_t>(i)];
            ++counts[static_cast<size_t>(c)];
            for (int64_t j = 0; j < h; ++j) next.at(c, j) += features.at(i, j);
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] > 0) {
                for (int64_t j = 0; j < h; ++j) next.at(c, j) /= static_cast<double>(counts[static_cast<size_t>(c)]);
            } else {
                // Re-seed at the point farthest from its assigned centroid.
                double worst = -1.0;
                int64_t pick = 0;
                for (int64_t i = 0; i < m; ++i) {
                    const double d = sq_dist(features, i, centroids, res.assignments[static_cast<size_t>(i)]);
                    if (d > worst) {
                        worst = d;
                        pick = i;
                    }
                }
                for (int64_t j = 0; j < h; ++j) next.at(c, j) = features.at(pick, j);
            }
        }

        double shift = 0.0;
        for (int c = 0; c < k; ++c) shift = std::max(shift, sq_dist(next, c, centroids, c));
        centroids = next;
        if (std::sqrt(shift) < tol) break;
    }

    // Final assignment against the last centroid update.
    double objective = 0.0;
    for (int64_t i = 0; i < m; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (int c = 0; c < k; ++c) {
            const double d = sq_dist(features, i, centroids, c);
            if (d < best) {
                best = d;
                best_c = c;
            }
        }
        res.assignments[static_cast<size_t>(i)] = best_c;
        objective += best;
    }
    if (res.objective_history.empty() || objective <= res.objective_history.back()) {
        res.objective_history.push_back(objective);
        res.objective = objective;
    }
    res.centroids = std::move(centroids);
    return res;
}

KMeansResult kmeans_best_of(const Tensor& features, int k, uint64_t seed, int n_init, int max_iter, double tol) {
    if (n_init < 1) throw ContractError("kmeans_best_of: n_init must be >= 1");
    KMeansResult best;
    for (int i = 0; i < n_init; ++i) {
        KMeansResult run = kmeans(features, k, seed + static_cast<uint64_t>(i), max_iter, tol);
        if (i == 0 || run.objective < best.objective) best = std::move(run);
    }
    return best;
}

Assignment hungarian(const Tensor& cost) {
    if (cost.rank() != 2 || cost.rows() != cost.cols()) throw ContractError("hungarian: cost matrix must be square");
    if (!cost.all_finite()) throw ContractError("hungarian: cost matrix must be finite");
    const int n = static_cast<int>(cost.rows());
    if (n == 0) return {};

    std::vector<std::vector<double>> a(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[static_cast<size_t>(i)][static_cast<size_t>(j)] = cost.at(i, j);

    const double best = assignment_core(a).second;
    // Absolute-scale tolerance for "still optimal" while fixing entries.
    double scale = 1.0;
    for (const auto& row : a)
        for (double x : row) scale = std::max(scale, std::abs(x));
    const double eps = scale * static_cast<double>(n) * 1e-9;

    // Lexicographic refinement: greedily pin each row to the smallest column
    // that keeps the optimum attainable.
    std::vector<int> perm(static_cast<size_t>(n), -1);
    std::vector<char> used(static_cast<size_t>(n), 0);
    std::vector<int> free_rows(static_cast<size_t>(n)), free_cols;
    double fixed_cost = 0.0;
    for (int i = 0; i < n; ++i) {
        free_cols.clear();
        for (int j = 0; j < n; ++j)
            if (!used[static_cast<size_t>(j)]) free_cols.push_back(j);
        for (int j : free_cols) {
            const double cand = fixed_cost + cost.at(i, j);
            if (i == n - 1) {
                if (cand <= best + eps) {
                    perm[static_cast<size_t>(i)] = j;
                    used[static_cast<size_t>(j)] = 1;
                    fixed_cost = cand;
                    break;
                }
                continue;
            }
            // Residual problem over remaining rows/columns.
            std::vector<int> rest_cols;
            for (int c : free_cols)
                if (c != j) rest_cols.push_back(c);
            const int r = n - i - 1;
            std::vector<std::vector<double>> sub(static_cast<size_t>(r), std::vector<double>(static_cast<size_t>(r)));
            for (int ri = 0; ri < r; ++ri)
                for (int ci = 0; ci < r; ++ci)
                    sub[static_cast<size_t>(ri)][static_cast<size_t>(ci)] =
                        cost.at(i + 1 + ri, rest_cols[static_cast<size_t>(ci)]);
            if (cand + assignment_core(sub).second <= best + eps) {
                perm[static_cast<size_t>(i)] = j;
                used[static_cast<size_t>(j)] = 1;
                fixed_cost = cand;
                break;
            }
        }
        if (perm[static_cast<size_t>(i)] < 0) throw ContractError("hungarian: refinement failed");
    }

    Assignment out;
    out.perm = std::move(perm);
    out.cost = 0.0;
    for (int i = 0; i < n; ++i) out.cost += cost.at(i, out.perm[static_cast<size_t>(i)]);
    return out;
}

Correspondence match_assignments(const std::vector<int>& l, const std::vector<int>& p, int k) {
    if (l.size() != p.size()) throw ContractError("match_assignments: label length mismatch");
    if (k < 1) throw ContractError("match_assignments: k must be >= 1");
    Tensor contingency({static_cast<int64_t>(k), static_cast<int64_t>(k)});
    for (size_t t = 0; t < l.size(); ++t) {
        if (l[t] < 0 || l[t] >= k || p[t] < 0 || p[t] >= k)
            throw ContractError("match_assignments: label out of range at sample " + std::to_string(t));
        contingency.at(l[t], p[t]) += 1.0;
    }
    double mx = 0.0;
    for (int64_t i = 0; i < contingency.numel(); ++i) mx = std::max(mx, contingency[i]);
    Tensor cost({static_cast<int64_t>(k), static_cast<int64_t>(k)});
    for (int64_t i = 0; i < cost.numel(); ++i) cost[i] = mx - contingency[i];

    Assignment a = hungarian(cost);
    Correspondence corr;
    corr.perm = a.perm;
    corr.cost = std::move(cost);
    corr.agreement = 0;
    for (int i = 0; i < k; ++i)
        corr.agreement += static_cast<int64_t>(contingency.at(i, corr.perm[static_cast<size_t>(i)]));
    corr.contingency = std::move(contingency);
    return corr;
}

Tensor enhancement_target(const Correspondence& corr, const std::vector<int>& p, int k) {
    if (static_cast<int>(corr.perm.size()) != k) throw ContractError("enhancement_target: correspondence size mismatch");
    std::vector<int> inv(static_cast<size_t>(k), -1);
    for (int i = 0; i < k; ++i) {
        const int j = corr.perm[static_cast<size_t>(i)];
        if (j < 0 || j >= k || inv[static_cast<size_t>(j)] != -1)
            throw ContractError("enhancement_target: correspondence is not a permutation");
        inv[static_cast<size_t>(j)] = i;
    }
    Tensor target({static_cast<int64_t>(p.size()), static_cast<int64_t>(k)});
    for (size_t t = 0; t < p.size(); ++t) {
        if (p[t] < 0 || p[t] >= k) throw ContractError("enhancement_target: label out of range");
        target.at(static_cast<int64_t>(t), inv[static_cast<size_t>(p[t])]) = 1.0;
    }
    return target;
}

std::vector<int> fuse_assignments(const std::vector<Tensor>& q_views) {
    if (q_views.empty()) throw ContractError("fuse_assignments: no views");
    const int64_t m = q_views[0].rows();
    const int64_t k = q_views[0].cols();
    for (const Tensor& q : q_views)
        if (q.rows() != m || q.cols() != k) throw DimensionError("fuse_assignments: shape mismatch across views");

    std::vector<int> labels(static_cast<size_t>(m));
    for (int64_t i = 0; i < m; ++i) {
        int best = 0;
        double best_v = -std::numeric_limits<double>::infinity();
        for (int64_t j = 0; j < k; ++j) {
            double s = 0.0;
            for (const Tensor& q : q_views) s += q.at(i, j);
            s /= static_cast<double>(q_views.size());
            if (s > best_v) {  // strict: ties keep the lowest index
                best_v = s;
                best = static_cast<int>(j);
            }
        }
        labels[static_cast<size_t>(i)] = best;
    }
    return labels;
}

std::vector<int> final_clustering_biview(const Tensor& z1, const Tensor& z2, int k, uint64_t seed) {
    return kmeans_best_of(hcat(z1, z2), k, seed).assignments;
}

}  // namespace mvclab::cluster
