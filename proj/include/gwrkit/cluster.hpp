#pragma once

#include "gwrkit/ingest.hpp"
#include "gwrkit/stats.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gwrkit {

struct Standardized {
    Eigen::MatrixXd values;          ///< kept columns, z-scored
    std::vector<std::size_t> kept;   ///< original column indices
    std::vector<std::size_t> dropped; ///< zero-variance columns
    Eigen::VectorXd means;           ///< per kept column
    Eigen::VectorXd stds;            ///< population std per kept column
};

/// Z-scores every column with the population standard deviation.
Standardized standardize(const Eigen::MatrixXd& X);

enum class ClusterMethod { kmeans, agglomerative };
enum class Linkage { ward, complete, average };

const char* to_string(ClusterMethod m);
const char* to_string(Linkage l);
ClusterMethod parse_cluster_method(const std::string& text);
Linkage parse_linkage(const std::string& text);

struct KMeansOptions {
    std::uint64_t seed = 0;
    int max_iters = 300;
    int restarts = 10;
};

struct ClusterModel {
    ClusterMethod method = ClusterMethod::kmeans;
    int k = 1;
    std::vector<int> assignments;
    Eigen::MatrixXd centroids; ///< k x d (kmeans)
    double inertia = 0.0;
    std::uint64_t seed = 0;
    int iterations = 0;
    /// Inertia after every assignment step of every restart.
    std::vector<std::vector<double>> inertia_trace;
    int best_restart = 0;
};

/// Lloyd iterations from k-means++ seeding, best of `restarts` by inertia
/// (ties: lowest restart). Restart r draws from its own generator derived
/// from (seed, r), so restarts run in parallel with thread-independent output.
ClusterModel kmeans(const Eigen::MatrixXd& X, int k, const KMeansOptions& options = {});

struct Merge {
    std::size_t a = 0; ///< smaller cluster id
    std::size_t b = 0;
    double height = 0.0;
    std::size_t size = 0;
};

/// Leaves are 0..n-1; the cluster created by merge s has id n + s.
struct Dendrogram {
    std::size_t leaves = 0;
    std::vector<Merge> merges;
};

struct AgglomerativeResult {
    std::vector<int> assignments;
    Dendrogram dendrogram;
};

/// Bottom-up merging with Lance-Williams updates. Ward heights follow the
/// convention sqrt(2 n_a n_b / (n_a + n_b)) * |c_a - c_b|, so two singletons
/// merge at their Euclidean distance. Ties go to the smallest (height,
/// lower id, higher id).
AgglomerativeResult agglomerative(const Eigen::MatrixXd& X, int k, Linkage linkage = Linkage::ward);

/// Labels from applying the first n - k merges. Clusters are numbered by
/// their smallest member index.
std::vector<int> cut_dendrogram(const Dendrogram& dendrogram, int k);

struct SilhouetteReport {
    std::vector<double> values;
    double mean = 0.0;
    std::vector<double> cluster_means; ///< indexed by label; NaN for unused labels
};

/// s(i) = (b - a) / max(a, b); singleton members and a = b = 0 score 0.
/// Rows are scored in parallel.
SilhouetteReport silhouette(const Eigen::MatrixXd& X, std::span<const int> assignments);

struct SweepRow {
    int k = 0;
    std::optional<double> mean_silhouette;
    std::vector<std::size_t> sizes;
    std::string status;
};

struct SweepResult {
    ClusterMethod method = ClusterMethod::kmeans;
    std::vector<SweepRow> rows;
    std::optional<int> recommended; ///< argmax mean silhouette, ties: smaller k
};

struct SweepOptions {
    KMeansOptions kmeans;
    Linkage linkage = Linkage::ward;
};

SweepResult sweep_k(const Eigen::MatrixXd& X, int k_min, int k_max, ClusterMethod method,
                    const SweepOptions& options = {});

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

std::vector<std::size_t> cluster_sizes(std::span<const int> assignments, int k);

struct ClusterRegression {
    int cluster = 0;
    std::size_t members = 0;
    std::optional<OLSFit> fit;
    std::string status;
};

/// Univariate OLS of the target on `predictor` inside every cluster.
/// Clusters with fewer than three members are skipped and reported.
std::vector<ClusterRegression> per_cluster_regression(const Dataset& ds, std::span<const int> assignments,
                                                      const std::string& predictor);

void write_assignments_csv(std::ostream& out, std::span<const std::string> areas, std::span<const int> assignments);
void write_silhouette_csv(std::ostream& out, std::span<const std::string> areas, std::span<const int> assignments,
                          const SilhouetteReport& report);
void write_dendrogram_csv(std::ostream& out, const Dendrogram& dendrogram);
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
void write_cluster_regression_csv(std::ostream& out, std::span<const std::pair<std::string, std::vector<ClusterRegression>>> by_predictor);

} // namespace gwrkit
