#include <doctest.h>

#include "reference.hpp"

#include "gwrkit/cluster.hpp"
#include "gwrkit/stats.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

using namespace gwrkit;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = g(rng);
    return m;
}

struct Blobs {
    Eigen::MatrixXd X;
    std::vector<int> labels;
};

Blobs planted_blobs(std::uint64_t seed, int per_blob) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.6);
    const double centres[5][2] = {{0, 0}, {10, 0}, {0, 10}, {10, 10}, {5, 20}};
    Blobs b{Eigen::MatrixXd(5 * per_blob, 2), {}};
    for (int c = 0; c < 5; ++c)
        for (int i = 0; i < per_blob; ++i) {
            b.X.row(c * per_blob + i) << centres[c][0] + g(rng), centres[c][1] + g(rng);
            b.labels.push_back(c);
        }
    return b;
}

double total_ss(const Eigen::MatrixXd& X) {
    return (X.rowwise() - X.colwise().mean()).squaredNorm();
}

bool same_partition(std::span<const int> a, std::span<const int> b) {
    std::map<int, int> ab, ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto [x, fresh_x] = ab.emplace(a[i], b[i]);
        auto [y, fresh_y] = ba.emplace(b[i], a[i]);
        if (x->second != b[i] || y->second != a[i]) return false;
    }
    return true;
}

Dataset dataset_from(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Dataset ds;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        ds.areas.push_back("a" + std::to_string(i));
        ds.boroughs.push_back("b");
    }
    for (Eigen::Index j = 0; j < X.cols(); ++j) ds.feature_names.push_back("f" + std::to_string(j));
    ds.features = X;
    ds.target_name = "y";
    ds.target = y;
    return ds;
}

} // namespace

TEST_CASE("standardize examples") {
    Eigen::MatrixXd X(3, 2);
    X << 1, 4, 2, 4, 3, 4;
    const auto s = standardize(X);
    REQUIRE(s.values.cols() == 1);
    CHECK(s.kept == std::vector<std::size_t>{0});
    CHECK(s.dropped == std::vector<std::size_t>{1});
    CHECK(s.values(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-14));
    CHECK(s.values(1, 0) == 0.0);
    CHECK(s.values(2, 0) == doctest::Approx(1.224744871391589).epsilon(1e-14));
    CHECK_THROWS_AS(standardize(Eigen::MatrixXd::Ones(4, 2)), DataError);

    std::mt19937_64 rng(1);
    const auto R = random_matrix(rng, 50, 4) * 7.0;
    const auto once = standardize(R);
    for (int j = 0; j < 4; ++j) {
        CHECK(std::abs(once.values.col(j).mean()) <= 1e-10);
        CHECK(std::abs(std::sqrt(once.values.col(j).squaredNorm() / 50) - 1.0) <= 1e-10);
    }
    CHECK((standardize(once.values).values - once.values).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("kmeans k = 1 and k = n") {
    std::mt19937_64 rng(2);
    const auto X = random_matrix(rng, 12, 3);
    const auto one = kmeans(X, 1);
    CHECK((one.centroids.row(0) - X.colwise().mean()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(one.inertia == doctest::Approx(total_ss(X)).epsilon(1e-12));
    const auto all = kmeans(X, 12);
    CHECK(all.inertia == 0.0);
    CHECK(std::set<int>(all.assignments.begin(), all.assignments.end()).size() == 12);
    CHECK_THROWS_AS(kmeans(X, 13), Error);
    CHECK_THROWS_AS(kmeans(X, 0), Error);
}

TEST_CASE("kmeans two tight pairs") {
    Eigen::MatrixXd X(4, 2);
    X << 0, 0, 0, 1, 100, 0, 100, 1;
    const auto model = kmeans(X, 2);
    CHECK(model.assignments[0] == model.assignments[1]);
    CHECK(model.assignments[2] == model.assignments[3]);
    CHECK(model.assignments[0] != model.assignments[2]);
    CHECK(model.inertia == doctest::Approx(reference::kmeans_exhaustive_inertia(X, 2)).epsilon(1e-12));
}

TEST_CASE("kmeans matches exhaustive enumeration on small data") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto X = random_matrix(rng, 8, 2);
        for (int k = 2; k <= 3; ++k) {
            const double oracle = reference::kmeans_exhaustive_inertia(X, k);
            // Lloyd is a local method: the exhaustive optimum bounds every run and
            // enough restarts reach it.
            const auto quick = kmeans(X, k, {.seed = static_cast<std::uint64_t>(trial)});
            CHECK(quick.inertia >= oracle - 1e-12);
            const auto model = kmeans(X, k, {.seed = static_cast<std::uint64_t>(trial), .max_iters = 300, .restarts = 200});
            CHECK(model.inertia <= oracle * (1 + 1e-9) + 1e-12);
        }
    }
}

TEST_CASE("kmeans invariants") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const auto X = random_matrix(rng, 60, 3);
        const int k = 2 + trial % 5;
        const auto model = kmeans(X, k, {.seed = static_cast<std::uint64_t>(trial)});
        const auto sizes = cluster_sizes(model.assignments, k);
        for (auto s : sizes) CHECK(s > 0);
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double own = (X.row(i) - model.centroids.row(model.assignments[static_cast<std::size_t>(i)])).squaredNorm();
            for (int c = 0; c < k; ++c) CHECK(own <= (X.row(i) - model.centroids.row(c)).squaredNorm() + 1e-9);
        }
        REQUIRE(model.inertia_trace.size() == 10);
        for (const auto& trace : model.inertia_trace)
            for (std::size_t t = 1; t < trace.size(); ++t) CHECK(trace[t] <= trace[t - 1]);
        CHECK(model.inertia == model.inertia_trace[static_cast<std::size_t>(model.best_restart)].back());
    }
}

TEST_CASE("kmeans is deterministic across runs and thread counts") {
    std::mt19937_64 rng(5);
    const auto X = random_matrix(rng, 200, 4);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto a = kmeans(X, 6, {.seed = 9});
    omp_set_num_threads(4);
    const auto b = kmeans(X, 6, {.seed = 9});
    omp_set_num_threads(saved);
    CHECK(a.assignments == b.assignments);
    CHECK(a.centroids == b.centroids);
    CHECK(a.inertia == b.inertia);
}

TEST_CASE("kmeans ignores the order of feature columns") {
    const auto blobs = planted_blobs(6, 30);
    Eigen::MatrixXd swapped(blobs.X.rows(), 2);
    swapped.col(0) = blobs.X.col(1);
    swapped.col(1) = blobs.X.col(0);
    const auto a = kmeans(blobs.X, 5);
    const auto b = kmeans(swapped, 5);
    CHECK(same_partition(a.assignments, b.assignments));
}

TEST_CASE("agglomerative small examples") {
    Eigen::MatrixXd two(2, 2);
    two << 0, 0, 3, 4;
    for (auto linkage : {Linkage::ward, Linkage::complete, Linkage::average}) {
        const auto r = agglomerative(two, 1, linkage);
        REQUIRE(r.dendrogram.merges.size() == 1);
        CHECK(r.dendrogram.merges[0].height == doctest::Approx(5.0).epsilon(1e-15));
        CHECK(r.dendrogram.merges[0].size == 2);
    }
    Eigen::MatrixXd line(3, 1);
    line << 0, 1, 10;
    const auto r = agglomerative(line, 2, Linkage::complete);
    CHECK(r.dendrogram.merges[0].a == 0);
    CHECK(r.dendrogram.merges[0].b == 1);
    CHECK(r.dendrogram.merges[0].height == 1.0);
    CHECK(r.dendrogram.merges[1].height == 10.0);
    CHECK(r.assignments == std::vector<int>{0, 0, 1});
    CHECK_THROWS_AS(agglomerative(line, 4), Error);
}

TEST_CASE("agglomerative merge sequences match the naive reference") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> size(2, 30);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = trial == 0 ? 8 : size(rng);
        const auto X = random_matrix(rng, n, 3);
        for (auto linkage : {Linkage::ward, Linkage::complete, Linkage::average}) {
            const auto fast = agglomerative(X, 1, linkage).dendrogram;
            const auto slow = reference::agglomerative(X, linkage);
            REQUIRE(fast.merges.size() == slow.size());
            REQUIRE(fast.merges.size() == static_cast<std::size_t>(n - 1));
            for (std::size_t s = 0; s < slow.size(); ++s) {
                CHECK(fast.merges[s].a == slow[s].a);
                CHECK(fast.merges[s].b == slow[s].b);
                CHECK(fast.merges[s].size == slow[s].size);
                CHECK(fast.merges[s].height == doctest::Approx(slow[s].height).epsilon(1e-10));
                if (s > 0 && linkage != Linkage::average)
                    CHECK(fast.merges[s].height >= fast.merges[s - 1].height);
            }
            CHECK(fast.merges.back().size == static_cast<std::size_t>(n));
            const auto whole = cut_dendrogram(fast, 1);
            CHECK(std::all_of(whole.begin(), whole.end(), [](int l) { return l == 0; }));
        }
    }
}

TEST_CASE("cut_dendrogram numbers clusters by smallest member") {
    Eigen::MatrixXd X(5, 1);
    X << 50, 0, 51, 1, 100;
    const auto r = agglomerative(X, 3);
    CHECK(r.assignments == std::vector<int>{0, 1, 0, 1, 2});
    CHECK(cut_dendrogram(r.dendrogram, 5) == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("silhouette examples") {
    Eigen::MatrixXd pairs(4, 1);
    pairs << 0, 0.1, 100, 100.1;
    const std::vector<int> labels{0, 0, 1, 1};
    CHECK(silhouette(pairs, labels).mean > 0.9);

    Eigen::MatrixXd mid(3, 1);
    mid << 0, 1, 2;
    const std::vector<int> split{0, 0, 1};
    // point 1: a = 1 to its cluster mate, b = 1 to the other cluster
    CHECK(silhouette(mid, split).values[1] == 0.0);
    CHECK(silhouette(mid, split).values[2] == 0.0);

    const Eigen::MatrixXd same = Eigen::MatrixXd::Ones(4, 2);
    const std::vector<int> two{0, 1, 0, 1};
    for (double v : silhouette(same, two).values) CHECK(v == 0.0);

    const std::vector<int> single{0, 0, 0, 0};
    CHECK_THROWS_AS(silhouette(pairs, single), Error);
}

TEST_CASE("silhouette matches brute force and ignores relabeling") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> size(3, 50);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = size(rng);
        const int k = std::min(n - 1, 2 + trial % 4);
        const auto X = random_matrix(rng, n, 2);
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i < k ? i : static_cast<int>(rng() % k);
        const auto report = silhouette(X, labels);
        const auto oracle = reference::silhouette(X, labels);
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            CHECK(std::abs(report.values[i] - oracle[i]) <= 1e-10);
            CHECK(report.values[i] >= -1.0);
            CHECK(report.values[i] <= 1.0);
        }
        std::vector<int> perm(static_cast<std::size_t>(k));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        auto relabeled = labels;
        for (auto& l : relabeled) l = perm[static_cast<std::size_t>(l)];
        CHECK(silhouette(X, relabeled).values == report.values);
    }
}

TEST_CASE("sweep over planted blobs") {
    const auto blobs = planted_blobs(9, 40);
    const auto sweep = sweep_k(blobs.X, 1, 10, ClusterMethod::kmeans);
    REQUIRE(sweep.rows.size() == 10);
    CHECK_FALSE(sweep.rows[0].mean_silhouette.has_value());
    CHECK(sweep.rows[0].status != "ok");
    REQUIRE(sweep.recommended.has_value());
    CHECK(*sweep.recommended == 5);
    const auto model = kmeans(blobs.X, 5);
    CHECK(adjusted_rand_index(model.assignments, blobs.labels) >= 0.9);
    const auto ward = sweep_k(blobs.X, 2, 8, ClusterMethod::agglomerative);
    CHECK(*ward.recommended == 5);
    CHECK_THROWS_AS(sweep_k(blobs.X, 5, 4, ClusterMethod::kmeans), Error);
}

TEST_CASE("adjusted rand index") {
    const std::vector<int> a{0, 0, 1, 1, 2, 2};
    const std::vector<int> b{5, 5, 3, 3, 1, 1};
    CHECK(adjusted_rand_index(a, b) == doctest::Approx(1.0).epsilon(1e-15));
    const std::vector<int> c{0, 1, 0, 1, 0, 1};
    CHECK(adjusted_rand_index(a, c) < 0.1);
}

TEST_CASE("per-cluster regression") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 40;
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd y(n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = u(rng);
        labels[static_cast<std::size_t>(i)] = i % 2;
        y[i] = i % 2 == 0 ? 0.2 + X(i, 0) * 0.5 : 0.7 - X(i, 0) * 0.5;
    }
    const auto ds = dataset_from(X, y);
    const auto fits = per_cluster_regression(ds, labels, "f0");
    REQUIRE(fits.size() == 2);
    CHECK(std::abs(fits[0].fit->coefficients[1] - 0.5) <= 1e-8);
    CHECK(std::abs(fits[1].fit->coefficients[1] + 0.5) <= 1e-8);

    const std::vector<int> one(n, 0);
    const auto global = per_cluster_regression(ds, one, "f0");
    const auto oracle = ols_fit(X, y);
    CHECK((global[0].fit->coefficients - oracle.coefficients).cwiseAbs().maxCoeff() <= 1e-12);

    auto small = labels;
    small[0] = 2;
    small[2] = 2;
    const auto with_small = per_cluster_regression(ds, small, "f0");
    REQUIRE(with_small.size() == 3);
    CHECK_FALSE(with_small[2].fit.has_value());
    CHECK(with_small[2].members == 2);
    CHECK(with_small[2].status != "ok");

    std::vector<int> tiny(n);
    for (int i = 0; i < n; ++i) tiny[static_cast<std::size_t>(i)] = i / 2;
    CHECK_THROWS_AS(per_cluster_regression(ds, tiny, "f0"), Error);
}
