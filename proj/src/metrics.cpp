#include "mvclab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "mvclab/cluster.hpp"
#include "mvclab/errors.hpp"
#include "mvclab/tensor.hpp"

namespace mvclab::metrics {

namespace {

void check_pair(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.empty()) throw ContractError("metrics: empty label vectors");
    if (pred.size() != truth.size()) throw ContractError("metrics: label length mismatch");
    for (int x : pred)
        if (x < 0) throw ContractError("metrics: negative predicted label");
    for (int x : truth)
        if (x < 0) throw ContractError("metrics: negative true label");
}

std::vector<int> compact(const std::vector<int>& labels, int& k_out) {
    std::map<int, int> remap;
    for (int x : labels) remap.emplace(x, 0);
    int next = 0;
    for (auto& [key, id] : remap) id = next++;
    std::vector<int> out(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) out[i] = remap[labels[i]];
    k_out = next;
    return out;
}

std::vector<std::vector<int64_t>> contingency(const std::vector<int>& a, int ka, const std::vector<int>& b, int kb) {
    std::vector<std::vector<int64_t>> c(static_cast<size_t>(ka), std::vector<int64_t>(static_cast<size_t>(kb), 0));
    for (size_t i = 0; i < a.size(); ++i) ++c[static_cast<size_t>(a[i])][static_cast<size_t>(b[i])];
    return c;
}

double comb2(int64_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

}  // namespace

double acc(const std::vector<int>& pred, const std::vector<int>& truth) {
    check_pair(pred, truth);
    int kp = 0, kt = 0;
    const std::vector<int> p = compact(pred, kp);
    const std::vector<int> t = compact(truth, kt);
    const int k = std::max(kp, kt);

    // Pad to square with zero counts so unmatched clusters cost nothing extra.
    Tensor counts({static_cast<int64_t>(k), static_cast<int64_t>(k)});
    for (size_t i = 0; i < p.size(); ++i) counts.at(p[i], t[i]) += 1.0;
    double mx = 0.0;
    for (int64_t i = 0; i < counts.numel(); ++i) mx = std::max(mx, counts[i]);
    Tensor cost({static_cast<int64_t>(k), static_cast<int64_t>(k)});
    for (int64_t i = 0; i < cost.numel(); ++i) cost[i] = mx - counts[i];

    const cluster::Assignment a = cluster::hungarian(cost);
    double matched = 0.0;
    for (int i = 0; i < k; ++i) matched += counts.at(i, a.perm[static_cast<size_t>(i)]);
    return matched / static_cast<double>(p.size());
}

double nmi(const std::vector<int>& pred, const std::vector<int>& truth, NmiNorm norm) {
    check_pair(pred, truth);
    int kp = 0, kt = 0;
    const std::vector<int> p = compact(pred, kp);
    const std::vector<int> t = compact(truth, kt);
    const double m = static_cast<double>(p.size());
    const auto c = contingency(p, kp, t, kt);

    std::vector<double> pa(static_cast<size_t>(kp), 0.0), pb(static_cast<size_t>(kt), 0.0);
    for (int i = 0; i < kp; ++i)
        for (int j = 0; j < kt; ++j) {
            pa[static_cast<size_t>(i)] += static_cast<double>(c[static_cast<size_t>(i)][static_cast<size_t>(j)]) / m;
            pb[static_cast<size_t>(j)] += static_cast<double>(c[static_cast<size_t>(i)][static_cast<size_t>(j)]) / m;
        }

    double hi = 0.0, hj = 0.0, mi = 0.0;
    for (double x : pa)
        if (x > 0.0) hi -= x * std::log(x);
    for (double x : pb)
        if (x > 0.0) hj -= x * std::log(x);
    for (int i = 0; i < kp; ++i)
        for (int j = 0; j < kt; ++j) {
            const double pij = static_cast<double>(c[static_cast<size_t>(i)][static_cast<size_t>(j)]) / m;
            if (pij > 0.0) mi += pij * std::log(pij / (pa[static_cast<size_t>(i)] * pb[static_cast<size_t>(j)]));
        }

    const double denom = norm == NmiNorm::Geometric ? std::sqrt(hi * hj) : 0.5 * (hi + hj);
    if (denom <= 0.0) return 0.0;
    return std::min(1.0, std::max(0.0, mi / denom));
}

double ari(const std::vector<int>& pred, const std::vector<int>& truth) {
    check_pair(pred, truth);
    int kp = 0, kt = 0;
    const std::vector<int> p = compact(pred, kp);
    const std::vector<int> t = compact(truth, kt);
    const auto c = contingency(p, kp, t, kt);
    const int64_t m = static_cast<int64_t>(p.size());

    double index = 0.0, sum_a = 0.0, sum_b = 0.0;
    std::vector<int64_t> a(static_cast<size_t>(kp), 0), b(static_cast<size_t>(kt), 0);
    for (int i = 0; i < kp; ++i)
        for (int j = 0; j < kt; ++j) {
            const int64_t nij = c[static_cast<size_t>(i)][static_cast<size_t>(j)];
            index += comb2(nij);
            a[static_cast<size_t>(i)] += nij;
            b[static_cast<size_t>(j)] += nij;
        }
    for (int64_t x : a) sum_a += comb2(x);
    for (int64_t x : b) sum_b += comb2(x);

    const double total = comb2(m);
    const double expected = sum_a * sum_b / total;
    const double max_index = 0.5 * (sum_a + sum_b);
    // Degenerate partitions (both trivial) are identical: perfect agreement.
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

double pur(const std::vector<int>& pred, const std::vector<int>& truth) {
    check_pair(pred, truth);
    int kp = 0, kt = 0;
    const std::vector<int> p = compact(pred, kp);
    const std::vector<int> t = compact(truth, kt);
    const auto c = contingency(p, kp, t, kt);
    int64_t matched = 0;
    for (int i = 0; i < kp; ++i) matched += *std::max_element(c[static_cast<size_t>(i)].begin(), c[static_cast<size_t>(i)].end());
    return static_cast<double>(matched) / static_cast<double>(p.size());
}

std::string MetricsReport::to_json() const {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "{\"acc\":%.6f,\"nmi\":%.6f,\"ari\":%.6f,\"pur\":%.6f}", acc, nmi, ari, pur);
    return buf;
}

MetricsReport evaluate(const std::vector<int>& pred, const std::vector<int>& truth, NmiNorm norm) {
    MetricsReport r;
    r.acc = acc(pred, truth);
    r.nmi = nmi(pred, truth, norm);
    r.ari = ari(pred, truth);
    r.pur = pur(pred, truth);
    return r;
}

}  // namespace mvclab::metrics
