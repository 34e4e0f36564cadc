// Times the OpenMP kernels against their serial references on synthetic
// inputs. Usage: gwrkit_bench [n] [threads]

#include "reference.hpp"

#include "gwrkit/cluster.hpp"
#include "gwrkit/distance.hpp"
#include "gwrkit/gwr.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

namespace {

template <typename Fn>
double seconds(Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void line(const char* name, double parallel, double serial) {
    std::printf("%-24s parallel %9.4f s   reference %9.4f s   speedup %6.2fx\n", name, parallel, serial,
                serial / parallel);
}

} // namespace

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 400;
    if (argc > 2) omp_set_num_threads(std::atoi(argv[2]));
    std::printf("n = %d, threads = %d\n", n, omp_get_max_threads());

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    Eigen::MatrixXd coords(n, 2), X(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        coords(i, 0) = u(rng);
        coords(i, 1) = u(rng);
        for (int c = 0; c < 3; ++c) X(i, c) = u(rng) / 100.0;
        y[i] = 0.3 + (coords(i, 0) > 50 ? 1.0 : -1.0) * X(i, 0) + 0.2 * X(i, 1) + u(rng) / 1000.0;
    }

    Eigen::MatrixXd D;
    const double t_dist = seconds([&] { D = gwrkit::pairwise_euclidean(coords); });
    const double t_dist_ref = seconds([&] { gwrkit::reference::distance_matrix(coords); });
    line("distance matrix", t_dist, t_dist_ref);

    const gwrkit::DistanceMatrix dm(D);
    const gwrkit::KernelSpec spec{gwrkit::KernelKind::bisquare, gwrkit::BandwidthMode::fixed, 30.0};
    const double t_gwr = seconds([&] { gwrkit::gwr_fit(X, y, dm, spec); });
    const double t_gwr_ref = seconds([&] { gwrkit::reference::gwr_fit(X, y, D, spec); });
    line("gwr fit (+ loo cv)", t_gwr, t_gwr_ref);

    const auto labels = gwrkit::kmeans(X, 5).assignments;
    const double t_sil = seconds([&] { gwrkit::silhouette(X, labels); });
    const double t_sil_ref = seconds([&] { gwrkit::reference::silhouette(X, labels); });
    line("silhouette", t_sil, t_sil_ref);

    const int m = std::min(n, 120);
    const Eigen::MatrixXd head = X.topRows(m);
    const double t_ward = seconds([&] { gwrkit::agglomerative(head, 2); });
    const double t_ward_ref = seconds([&] { gwrkit::reference::agglomerative(head, gwrkit::Linkage::ward); });
    line("ward linkage (n<=120)", t_ward, t_ward_ref);
    return 0;
}
