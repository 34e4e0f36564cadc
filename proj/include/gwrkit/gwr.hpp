#pragma once

#include "gwrkit/ingest.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gwrkit {

enum class KernelKind { gaussian, bisquare, exponential };
enum class BandwidthMode { fixed, adaptive };

const char* to_string(KernelKind kind);
const char* to_string(BandwidthMode mode);
KernelKind parse_kernel_kind(const std::string& text);
BandwidthMode parse_bandwidth_mode(const std::string& text);

/// Fixed mode: bandwidth is a distance in centroid units. Adaptive mode:
/// bandwidth is a neighbour count k, and each focal point uses the distance
/// to its k-th nearest other point.
struct KernelSpec {
    KernelKind kind = KernelKind::bisquare;
    BandwidthMode mode = BandwidthMode::fixed;
    double bandwidth = 67.0;

    /// Throws ConfigError. `n` bounds the adaptive neighbour count.
    void validate(std::size_t n) const;
};

class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(Eigen::MatrixXd values);

    const Eigen::MatrixXd& values() const { return values_; }
    std::size_t size() const { return static_cast<std::size_t>(values_.rows()); }
    double operator()(std::size_t i, std::size_t j) const {
        return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    double diameter() const;

    /// Pairs (i < j) at distance zero.
    const std::vector<std::pair<std::size_t, std::size_t>>& duplicates() const { return duplicates_; }

private:
    Eigen::MatrixXd values_;
    std::vector<std::pair<std::size_t, std::size_t>> duplicates_;
};

/// Euclidean distances between planar centroids. Needs at least two
/// distinct points; coincident points are allowed and listed.
DistanceMatrix distance_matrix(std::span<const Point> centroids);

/// Weight of one distance under a kernel with bandwidth b > 0:
/// gaussian exp(-(d/b)^2 / 2), bisquare (1 - (d/b)^2)^2 for d < b else 0,
/// exponential exp(-d/b).
double kernel_weight(KernelKind kind, double distance, double bandwidth);

std::vector<double> kernel_weights(std::span<const double> distances, KernelKind kind, double bandwidth);

/// The bandwidth in effect at one focal point: the fixed distance, or in
/// adaptive mode the distance to the k-th nearest point other than itself.
double focal_bandwidth(std::span<const double> distances_from_focal, std::size_t focal, const KernelSpec& spec);

struct GWROptions {
    /// Regularize singular local systems with lambda = 1e-8 * mean diagonal
    /// of X^T W X instead of failing.
    bool ridge_on_singular = false;
    /// Fit the leave-one-out systems and fill cv_score.
    bool compute_cv = true;
};

struct GWRFit {
    KernelSpec spec;
    std::vector<std::string> predictor_names;
    Eigen::MatrixXd coefficients; ///< n x (p + 1), intercept first
    Eigen::VectorXd local_r_squared;
    Eigen::VectorXd fitted;
    Eigen::VectorXd residuals;
    Eigen::VectorXd hat_diagonal; ///< S_ii
    double trace_hat = 0.0;
    double ss_res = 0.0;
    std::optional<double> cv_score;
    std::vector<std::size_t> cv_excluded; ///< locations with singular LOO systems
    std::optional<double> aicc;
    std::string aicc_note;            ///< why aicc is undefined
    std::vector<std::size_t> ridged;  ///< locations regularized under ridge_on_singular
};

/// Raised when a local system cannot be solved; carries the location.
class LocalFitError : public NumericalError {
public:
    LocalFitError(const std::string& what, std::size_t location) : NumericalError(what), location_(location) {}
    std::size_t location() const noexcept { return location_; }

private:
    std::size_t location_;
};

/// Geographically weighted regression. Every location's local system is
/// solved independently, in parallel, each writing only its own row; the
/// output does not depend on the thread count.
GWRFit gwr_fit(const Dataset& ds, std::span<const std::string> predictors, const KernelSpec& spec,
               const GWROptions& options = {});
GWRFit gwr_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const DistanceMatrix& distances,
               const KernelSpec& spec, const GWROptions& options = {});

/// Small-sample AICc; nullopt (with a note) when n - 2 - tr(S) <= 0 or the
/// residual sum of squares is zero.
std::optional<double> gwr_aicc(std::size_t n, double ss_res, double trace_hat, std::string* note = nullptr);

struct CVScore {
    double score = 0.0;
    std::vector<std::size_t> excluded;
};

/// Sum over locations of (y_i - yhat_(i))^2 with the focal observation's
/// own weight set to zero. Singular LOO systems are skipped and listed.
CVScore loo_cv_score(const Dataset& ds, std::span<const std::string> predictors, const KernelSpec& spec);
CVScore loo_cv_score(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const DistanceMatrix& distances,
                     const KernelSpec& spec);

enum class Criterion { cv, aicc };
const char* to_string(Criterion c);
Criterion parse_criterion(const std::string& text);

struct BandwidthScore {
    double bandwidth = 0.0;
    std::optional<double> score;
    std::string status; ///< "ok" or the failure message
};

struct BandwidthSearch {
    KernelKind kind = KernelKind::bisquare;
    BandwidthMode mode = BandwidthMode::fixed;
    Criterion criterion = Criterion::cv;
    std::vector<BandwidthScore> rows;
    double best = 0.0;
};

/// Scores every grid point; a failing point is recorded, not fatal. Best is
/// the minimum score, ties going to the smaller bandwidth.
BandwidthSearch bandwidth_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const DistanceMatrix& distances, KernelKind kind, BandwidthMode mode,
                                 std::span<const double> grid, Criterion criterion);
BandwidthSearch bandwidth_search(const Dataset& ds, std::span<const std::string> predictors, KernelKind kind,
                                 BandwidthMode mode, std::span<const double> grid, Criterion criterion);

/// start, start + step, ... up to and including stop.
std::vector<double> linear_grid(double start, double stop, double step);

/// Concatenates searches and picks the overall minimum (ties: smaller).
BandwidthSearch merge_searches(const BandwidthSearch& coarse, const BandwidthSearch& fine);

void write_bandwidth_csv(std::ostream& out, const BandwidthSearch& search);
void write_gwr_csv(std::ostream& out, const GWRFit& fit, const Dataset& ds);

} // namespace gwrkit
