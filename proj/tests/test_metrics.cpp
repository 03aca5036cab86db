#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mvclab/errors.hpp"
#include "mvclab/metrics.hpp"

using namespace mvclab;

namespace {

// Exhaustive-matching accuracy oracle (padded label spaces, K <= 8).
double acc_oracle(const std::vector<int>& pred, const std::vector<int>& truth) {
    const int kp = *std::max_element(pred.begin(), pred.end()) + 1;
    const int kt = *std::max_element(truth.begin(), truth.end()) + 1;
    const int k = std::max(kp, kt);
    std::vector<int> perm(static_cast<size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    int best = 0;
    do {
        int agree = 0;
        for (size_t i = 0; i < pred.size(); ++i)
            if (perm[static_cast<size_t>(pred[i])] == truth[i]) ++agree;
        best = std::max(best, agree);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(pred.size());
}

// O(m^2) pair-counting ARI oracle.
double ari_oracle(const std::vector<int>& pred, const std::vector<int>& truth) {
    const size_t m = pred.size();
    double a = 0, b = 0, c = 0, d = 0;  // same-same, same-diff, diff-same, diff-diff
    for (size_t i = 0; i < m; ++i)
        for (size_t j = i + 1; j < m; ++j) {
            const bool sp = pred[i] == pred[j];
            const bool st = truth[i] == truth[j];
            if (sp && st)
                a += 1;
            else if (sp && !st)
                b += 1;
            else if (!sp && st)
                c += 1;
            else
                d += 1;
        }
    const double total = a + b + c + d;
    const double expected = (a + b) * (a + c) / total;
    const double max_index = 0.5 * ((a + b) + (a + c));
    if (max_index == expected) return 1.0;
    return (a - expected) / (max_index - expected);
}

std::vector<int> random_labels(size_t m, int k, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> lab(0, k - 1);
    std::vector<int> out(m);
    for (size_t i = 0; i < m; ++i) out[i] = lab(rng);
    return out;
}

}  // namespace

TEST_CASE("identity partitions score perfectly") {
    std::vector<int> l = {0, 0, 1, 1, 2, 2};
    CHECK(metrics::acc(l, l) == 1.0);
    CHECK(metrics::nmi(l, l) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(metrics::ari(l, l) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(metrics::pur(l, l) == 1.0);
}

TEST_CASE("acc: permutation relabeling still scores 1, frozen 5/6 case") {
    std::vector<int> truth = {0, 0, 1, 1, 2, 2};
    std::vector<int> permuted = {2, 2, 0, 0, 1, 1};
    CHECK(metrics::acc(permuted, truth) == 1.0);

    std::vector<int> pred = {0, 0, 1, 2, 2, 2};
    CHECK(metrics::acc(pred, truth) == doctest::Approx(5.0 / 6.0));
    CHECK(metrics::acc(pred, truth) == doctest::Approx(acc_oracle(pred, truth)));
}

TEST_CASE("nmi conventions") {
    std::vector<int> truth = {0, 0, 1, 1};
    CHECK(metrics::nmi({0, 0, 0, 0}, truth) == 0.0);          // zero predicted entropy
    CHECK(metrics::nmi({0, 1, 0, 1}, truth) == doctest::Approx(0.0).epsilon(1e-12));  // independent
}

TEST_CASE("nmi arithmetic-mean normalization switch") {
    std::vector<int> truth = {0, 0, 1, 1, 2, 2};
    std::vector<int> pred = {0, 0, 1, 1, 1, 2};
    const double geo = metrics::nmi(pred, truth, metrics::NmiNorm::Geometric);
    const double ari_norm = metrics::nmi(pred, truth, metrics::NmiNorm::Arithmetic);
    CHECK(geo > 0.0);
    CHECK(ari_norm > 0.0);
    CHECK(geo >= ari_norm - 1e-12);  // geometric mean <= arithmetic mean of entropies
}

TEST_CASE("ari: single-cluster prediction scores 0 against structured truth") {
    std::vector<int> truth = {0, 0, 1, 1, 2, 2};
    CHECK(metrics::ari({0, 0, 0, 0, 0, 0}, truth) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pur: frozen 3/4 case and singleton degeneracy") {
    CHECK(metrics::pur({0, 0, 0, 1}, {0, 0, 1, 1}) == doctest::Approx(0.75));
    CHECK(metrics::pur({0, 1, 2, 3}, {0, 0, 1, 1}) == 1.0);
}

TEST_CASE("all four metrics agree with brute-force oracles on random pairs") {
    std::mt19937_64 rng(20240810);
    for (int trial = 0; trial < 100; ++trial) {
        const size_t m = 5 + static_cast<size_t>(rng() % 56);  // up to 60
        const int k = 2 + static_cast<int>(rng() % 5);         // up to 6 clusters
        std::vector<int> pred = random_labels(m, k, rng);
        std::vector<int> truth = random_labels(m, k, rng);
        CHECK(std::abs(metrics::acc(pred, truth) - acc_oracle(pred, truth)) < 1e-10);
        CHECK(std::abs(metrics::ari(pred, truth) - ari_oracle(pred, truth)) < 1e-10);
    }
}

TEST_CASE("metrics are invariant under bijective relabelings") {
    std::mt19937_64 rng(17);
    std::vector<int> relabel_p = {3, 0, 2, 1};
    std::vector<int> relabel_t = {1, 3, 0, 2};
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<int> pred = random_labels(40, 4, rng);
        std::vector<int> truth = random_labels(40, 4, rng);
        std::vector<int> pred2(pred.size()), truth2(truth.size());
        for (size_t i = 0; i < pred.size(); ++i) {
            pred2[i] = relabel_p[static_cast<size_t>(pred[i])];
            truth2[i] = relabel_t[static_cast<size_t>(truth[i])];
        }
        CHECK(metrics::acc(pred, truth) == doctest::Approx(metrics::acc(pred2, truth2)).epsilon(1e-12));
        CHECK(metrics::nmi(pred, truth) == doctest::Approx(metrics::nmi(pred2, truth2)).epsilon(1e-12));
        CHECK(metrics::ari(pred, truth) == doctest::Approx(metrics::ari(pred2, truth2)).epsilon(1e-12));
        CHECK(metrics::pur(pred, truth) == doctest::Approx(metrics::pur(pred2, truth2)).epsilon(1e-12));
    }
}

TEST_CASE("ari of independent random partitions averages near zero") {
    std::mt19937_64 rng(5);
    double mean = 0.0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        std::vector<int> pred = random_labels(60, 3, rng);
        std::vector<int> truth = random_labels(60, 3, rng);
        mean += metrics::ari(pred, truth);
    }
    mean /= trials;
    CHECK(std::abs(mean) < 0.02);
}

TEST_CASE("metric report serializes to fixed six decimals") {
    metrics::MetricsReport r{0.5, 0.25, -0.125, 1.0};
    CHECK(r.to_json() == "{\"acc\":0.500000,\"nmi\":0.250000,\"ari\":-0.125000,\"pur\":1.000000}");
}

TEST_CASE("length mismatches and empty inputs are contract errors") {
    CHECK_THROWS_AS(metrics::acc({0, 1}, {0}), ContractError);
    CHECK_THROWS_AS(metrics::nmi({}, {}), ContractError);
    CHECK_THROWS_AS(metrics::ari({0}, {0, 1}), ContractError);
    CHECK_THROWS_AS(metrics::pur({-1, 0}, {0, 0}), ContractError);
}

TEST_CASE("acc handles unequal cluster and class counts by padding") {
    // 4 predicted clusters vs 2 classes and vice versa.
    CHECK(metrics::acc({0, 1, 2, 3}, {0, 0, 1, 1}) == doctest::Approx(0.5));
    CHECK(metrics::acc({0, 0, 1, 1}, {0, 1, 2, 3}) == doctest::Approx(0.5));
}
