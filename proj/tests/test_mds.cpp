#include <doctest.h>

#include "reference.hpp"

#include "gwrkit/distance.hpp"
#include "gwrkit/mds.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace gwrkit;

namespace {

double max_distance_error(const Eigen::MatrixXd& D, const MDSEmbedding& e) {
    return (pairwise_euclidean(e.coordinates) - D).cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("square corners are recovered exactly") {
    Eigen::MatrixXd P(4, 2);
    P << 0, 0, 1, 0, 1, 1, 0, 1;
    const auto D = pairwise_euclidean(P);
    const auto e = classical_mds(D);
    CHECK(max_distance_error(D, e) <= 1e-9);
    CHECK(e.stress <= 1e-9);
    CHECK(e.coordinates.colwise().mean().cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(e.eigenvalues[0] >= e.eigenvalues[1]);
    CHECK(e.eigenvalues.minCoeff() >= 0.0);
}

TEST_CASE("collinear points embed in one dimension") {
    Eigen::MatrixXd P(3, 1);
    P << 0, 1, 2;
    const auto e = classical_mds(pairwise_euclidean(P));
    CHECK(std::abs(e.eigenvalues[1]) <= 1e-12);
    CHECK(e.coordinates.col(1).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(max_distance_error(pairwise_euclidean(P), e) <= 1e-9);
}

TEST_CASE("regular tetrahedron has positive stress") {
    Eigen::MatrixXd D = Eigen::MatrixXd::Ones(4, 4);
    D.diagonal().setZero();
    const auto e = classical_mds(D);
    CHECK(e.stress > 0.1);
}

TEST_CASE("planar configurations have zero stress") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + trial * 3;
        Eigen::MatrixXd P(n, 2);
        for (int i = 0; i < n; ++i) P.row(i) << g(rng), g(rng);
        const auto D = pairwise_euclidean(P);
        const auto e = classical_mds(D);
        CHECK(max_distance_error(D, e) <= 1e-9);
        CHECK(e.stress <= 1e-9);
    }
}

TEST_CASE("stress agrees with the power-iteration oracle") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd P(6, 5);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 5; ++j) P(i, j) = g(rng);
        const auto D = pairwise_euclidean(P);
        CHECK(std::abs(classical_mds(D).stress - reference::mds_stress(D, 2)) <= 1e-8);
    }
}

TEST_CASE("row permutation permutes the embedding") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Eigen::MatrixXd P(12, 4);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 4; ++j) P(i, j) = g(rng);
    std::vector<int> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd Q(12, 4);
    for (int i = 0; i < 12; ++i) Q.row(i) = P.row(perm[static_cast<std::size_t>(i)]);
    const auto a = classical_mds(pairwise_euclidean(P));
    const auto b = classical_mds(pairwise_euclidean(Q));
    CHECK(std::abs(a.stress - b.stress) <= 1e-10);
    // axes may flip sign, distances may not change
    const auto da = pairwise_euclidean(a.coordinates);
    const auto db = pairwise_euclidean(b.coordinates);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j)
            CHECK(std::abs(db(i, j) - da(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)])) <= 1e-9);
    for (int c = 0; c < 2; ++c) {
        double aligned = 0.0, flipped = 0.0;
        for (int i = 0; i < 12; ++i) {
            aligned = std::max(aligned, std::abs(b.coordinates(i, c) - a.coordinates(perm[static_cast<std::size_t>(i)], c)));
            flipped = std::max(flipped, std::abs(b.coordinates(i, c) + a.coordinates(perm[static_cast<std::size_t>(i)], c)));
        }
        CHECK(std::min(aligned, flipped) <= 1e-9);
    }
}

TEST_CASE("sign convention makes the first clearly nonzero entry positive") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    Eigen::MatrixXd P(10, 3);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 3; ++j) P(i, j) = g(rng);
    const auto e = classical_mds(pairwise_euclidean(P));
    for (int c = 0; c < 2; ++c) {
        const auto col = e.coordinates.col(c);
        const double cut = 1e-10 * col.cwiseAbs().maxCoeff();
        for (int i = 0; i < 10; ++i)
            if (std::abs(col[i]) > cut) {
                CHECK(col[i] > 0.0);
                break;
            }
    }
    CHECK(classical_mds(pairwise_euclidean(P)).coordinates == e.coordinates);
}

TEST_CASE("non-euclidean input is clamped with a warning") {
    Eigen::MatrixXd D(4, 4);
    D << 0, 1, 1, 5, 1, 0, 1, 1, 1, 1, 0, 1, 5, 1, 1, 0;
    const auto e = classical_mds(D, 3);
    CHECK(e.eigenvalues.minCoeff() >= 0.0);
    CHECK_FALSE(e.warnings.empty());
}

TEST_CASE("invalid distance matrices") {
    Eigen::MatrixXd asym(3, 3);
    asym << 0, 1, 2, 1.5, 0, 1, 2, 1, 0;
    CHECK_THROWS_AS(classical_mds(asym), DataError);
    Eigen::MatrixXd negative(3, 3);
    negative << 0, -1, 2, -1, 0, 1, 2, 1, 0;
    CHECK_THROWS_AS(classical_mds(negative), DataError);
    Eigen::MatrixXd diag(3, 3);
    diag << 1, 1, 2, 1, 0, 1, 2, 1, 0;
    CHECK_THROWS_AS(classical_mds(diag), DataError);
    CHECK_THROWS_AS(classical_mds(Eigen::MatrixXd::Zero(2, 2)), DataError);
}
