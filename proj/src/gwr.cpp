#include "gwrkit/gwr.hpp"

#include "gwrkit/csv.hpp"
#include "gwrkit/distance.hpp"
#include "gwrkit/error.hpp"
#include "gwrkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace gwrkit {

const char* to_string(KernelKind kind) {
    switch (kind) {
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::bisquare: return "bisquare";
    case KernelKind::exponential: return "exponential";
    }
    return "?";
}

const char* to_string(BandwidthMode mode) { return mode == BandwidthMode::fixed ? "fixed" : "adaptive"; }

KernelKind parse_kernel_kind(const std::string& text) {
    for (auto k : {KernelKind::gaussian, KernelKind::bisquare, KernelKind::exponential})
        if (text == to_string(k)) return k;
    throw ConfigError("unknown kernel '" + text + "' (expected gaussian, bisquare or exponential)");
}

BandwidthMode parse_bandwidth_mode(const std::string& text) {
    if (text == "fixed") return BandwidthMode::fixed;
    if (text == "adaptive") return BandwidthMode::adaptive;
    throw ConfigError("unknown bandwidth mode '" + text + "' (expected fixed or adaptive)");
}

const char* to_string(Criterion c) { return c == Criterion::cv ? "cv" : "aicc"; }

Criterion parse_criterion(const std::string& text) {
    if (text == "cv") return Criterion::cv;
    if (text == "aicc") return Criterion::aicc;
    throw ConfigError("unknown criterion '" + text + "' (expected cv or aicc)");
}

void KernelSpec::validate(std::size_t n) const {
    if (!std::isfinite(bandwidth) || bandwidth <= 0.0) throw ConfigError("bandwidth must be positive and finite");
    if (mode == BandwidthMode::adaptive) {
        if (bandwidth != std::floor(bandwidth)) throw ConfigError("adaptive bandwidth must be an integer count");
        if (bandwidth < 2.0 || bandwidth > static_cast<double>(n) - 1.0)
            throw ConfigError("adaptive neighbour count must lie in [2, n - 1] (n = " + std::to_string(n) + ")");
    }
}

// ----------------------------------------------------------------- distances

DistanceMatrix::DistanceMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols()) throw DataError("distance matrix must be square");
    for (Eigen::Index i = 0; i < values_.rows(); ++i)
        for (Eigen::Index j = i + 1; j < values_.cols(); ++j)
            if (values_(i, j) == 0.0)
                duplicates_.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
}

double DistanceMatrix::diameter() const { return values_.size() ? values_.maxCoeff() : 0.0; }

DistanceMatrix distance_matrix(std::span<const Point> centroids) {
    if (centroids.size() < 2) throw DataError("distance matrix needs at least two centroids");
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(centroids.size()), 2);
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        pts(static_cast<Eigen::Index>(i), 0) = centroids[i].x;
        pts(static_cast<Eigen::Index>(i), 1) = centroids[i].y;
    }
    DistanceMatrix dm(pairwise_euclidean(pts));
    if (dm.diameter() == 0.0) throw DataError("all centroids coincide");
    return dm;
}

// ------------------------------------------------------------------- kernels

double kernel_weight(KernelKind kind, double distance, double bandwidth) {
    if (!(bandwidth > 0.0)) throw NumericalError("kernel bandwidth must be positive");
    const double r = distance / bandwidth;
    switch (kind) {
    case KernelKind::gaussian: return std::exp(-0.5 * r * r);
    case KernelKind::bisquare: {
        if (distance >= bandwidth) return 0.0;
        const double t = 1.0 - r * r;
        return t * t;
    }
    case KernelKind::exponential: return std::exp(-r);
    }
    return 0.0;
}

std::vector<double> kernel_weights(std::span<const double> distances, KernelKind kind, double bandwidth) {
    std::vector<double> w(distances.size());
    for (std::size_t j = 0; j < distances.size(); ++j) w[j] = kernel_weight(kind, distances[j], bandwidth);
    return w;
}

double focal_bandwidth(std::span<const double> distances_from_focal, std::size_t focal, const KernelSpec& spec) {
    if (spec.mode == BandwidthMode::fixed) return spec.bandwidth;
    const auto k = static_cast<std::size_t>(spec.bandwidth);
    std::vector<double> others;
    others.reserve(distances_from_focal.size());
    for (std::size_t j = 0; j < distances_from_focal.size(); ++j)
        if (j != focal) others.push_back(distances_from_focal[j]);
    if (k == 0 || k > others.size()) throw ConfigError("adaptive neighbour count exceeds the number of points");
    std::nth_element(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k - 1), others.end());
    return others[k - 1];
}

// ---------------------------------------------------------- local solving

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd A(X.rows(), X.cols() + 1);
    A.col(0).setOnes();
    A.rightCols(X.cols()) = X;
    return A;
}

struct LocalSolution {
    bool ok = false;
    bool ridged = false;
    Eigen::VectorXd beta;
    double focal_quadratic = 0.0; ///< x_i (X^T W X)^{-1} x_i^T
};

// Weighted least squares over the rows with positive weight.
LocalSolution solve_local(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const std::vector<double>& w,
                          Eigen::Index focal, bool allow_ridge) {
    const Eigen::Index q = A.cols();
    std::vector<Eigen::Index> rows;
    rows.reserve(w.size());
    for (std::size_t j = 0; j < w.size(); ++j)
        if (w[j] > 0.0) rows.push_back(static_cast<Eigen::Index>(j));

    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd Aw(m, q);
    Eigen::VectorXd bw(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const double s = std::sqrt(w[static_cast<std::size_t>(rows[static_cast<std::size_t>(k)])]);
        Aw.row(k) = s * A.row(rows[static_cast<std::size_t>(k)]);
        bw[k] = s * y[rows[static_cast<std::size_t>(k)]];
    }
    const Eigen::RowVectorXd x_focal = A.row(focal);

    LocalSolution sol;
    if (m >= q) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Aw);
        const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(q, q).triangularView<Eigen::Upper>();
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
        const auto& sv = svd.singularValues();
        if (sv[0] > 0.0 && sv[q - 1] >= rank_tolerance * sv[0]) {
            sol.ok = true;
            sol.beta = qr.solve(bw);
            const Eigen::VectorXd u = qr.colsPermutation().transpose() * x_focal.transpose();
            const Eigen::VectorXd v = R.transpose().triangularView<Eigen::Lower>().solve(u);
            sol.focal_quadratic = v.squaredNorm();
            return sol;
        }
    }
    if (!allow_ridge || m == 0) return sol;

    Eigen::MatrixXd normal = Aw.transpose() * Aw;
    const double lambda = 1e-8 * std::max(normal.trace() / static_cast<double>(q), 1e-300);
    normal.diagonal().array() += lambda;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) return sol;
    sol.ok = true;
    sol.ridged = true;
    sol.beta = ldlt.solve(Aw.transpose() * bw);
    sol.focal_quadratic = x_focal.dot(ldlt.solve(x_focal.transpose()));
    return sol;
}

std::vector<double> focal_weights(const DistanceMatrix& distances, std::size_t i, const KernelSpec& spec) {
    const auto& D = distances.values();
    std::vector<double> d(static_cast<std::size_t>(D.cols()));
    for (Eigen::Index j = 0; j < D.cols(); ++j) d[static_cast<std::size_t>(j)] = D(static_cast<Eigen::Index>(i), j);
    const double b = focal_bandwidth(d, i, spec);
    if (!(b > 0.0))
        throw LocalFitError("location " + std::to_string(i) + ": adaptive bandwidth is zero (coincident neighbours)", i);
    return kernel_weights(d, spec.kind, b);
}

void require_support(const std::vector<double>& w, std::size_t parameters, std::size_t i) {
    const auto nonzero = static_cast<std::size_t>(std::count_if(w.begin(), w.end(), [](double v) { return v > 0.0; }));
    if (nonzero < parameters + 1)
        throw LocalFitError("location " + std::to_string(i) + " has " + std::to_string(nonzero) +
                                " observations with nonzero weight; at least " + std::to_string(parameters + 1) +
                                " are needed",
                            i);
}

void check_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const DistanceMatrix& distances,
                  const KernelSpec& spec) {
    const auto n = static_cast<std::size_t>(X.rows());
    if (static_cast<std::size_t>(y.size()) != n || distances.size() != n)
        throw DataError("gwr: predictors, target and distances disagree in size");
    if (n <= static_cast<std::size_t>(X.cols()) + 1)
        throw NumericalError("gwr: need more locations than parameters");
    spec.validate(n);
}

// Collects the first error (lowest location) raised inside a parallel loop.
class ParallelErrors {
public:
    explicit ParallelErrors(std::size_t n) : messages_(n) {}
    void record(std::size_t i, std::string message) { messages_[i] = std::move(message); }
    void rethrow() const {
        for (std::size_t i = 0; i < messages_.size(); ++i)
            if (messages_[i]) throw LocalFitError(*messages_[i], i);
    }

private:
    std::vector<std::optional<std::string>> messages_;
};

struct LooOutcome {
    bool ok = false;
    double error = 0.0;
};

LooOutcome loo_at(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, std::vector<double> w, std::size_t i) {
    w[i] = 0.0;
    const auto focal = static_cast<Eigen::Index>(i);
    const auto loo = solve_local(A, y, w, focal, false);
    if (!loo.ok) return {};
    return {true, y[focal] - A.row(focal).dot(loo.beta)};
}

} // namespace

std::optional<double> gwr_aicc(std::size_t n, double ss_res, double trace_hat, std::string* note) {
    const double nn = static_cast<double>(n);
    const double denom = nn - 2.0 - trace_hat;
    if (denom <= 0.0) {
        if (note) *note = "AICc undefined: n - 2 - tr(S) <= 0";
        return std::nullopt;
    }
    if (!(ss_res > 0.0)) {
        if (note) *note = "AICc undefined: zero residual sum of squares";
        return std::nullopt;
    }
    const double sigma = std::sqrt(ss_res / nn);
    return 2.0 * nn * std::log(sigma) + nn * std::log(2.0 * std::numbers::pi) + nn * (nn + trace_hat) / denom;
}

GWRFit gwr_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const DistanceMatrix& distances,
               const KernelSpec& spec, const GWROptions& options) {
    check_inputs(X, y, distances, spec);
    const Eigen::MatrixXd A = with_intercept(X);
    const auto n = static_cast<std::size_t>(A.rows());
    const auto q = static_cast<std::size_t>(A.cols());

    GWRFit fit;
    fit.spec = spec;
    fit.coefficients.resize(A.rows(), A.cols());
    fit.local_r_squared.resize(A.rows());
    fit.fitted.resize(A.rows());
    fit.hat_diagonal.resize(A.rows());
    std::vector<LooOutcome> loo(n);
    std::vector<char> ridged(n, 0);
    ParallelErrors errors(n);

#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t i = 0; i < n; ++i) {
        try {
            const auto w = focal_weights(distances, i, spec);
            require_support(w, q, i);
            const auto focal = static_cast<Eigen::Index>(i);
            const auto sol = solve_local(A, y, w, focal, options.ridge_on_singular);
            if (!sol.ok) {
                errors.record(i, "location " + std::to_string(i) + ": singular local system");
                continue;
            }
            ridged[i] = sol.ridged;
            fit.coefficients.row(focal) = sol.beta.transpose();
            fit.fitted[focal] = A.row(focal).dot(sol.beta);
            fit.hat_diagonal[focal] = w[i] * sol.focal_quadratic;

            double sw = 0.0, swy = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                sw += w[j];
                swy += w[j] * y[static_cast<Eigen::Index>(j)];
            }
            const double ybar = swy / sw;
            double sse = 0.0, sst = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const auto r = static_cast<Eigen::Index>(j);
                const double e = y[r] - A.row(r).dot(sol.beta);
                const double c = y[r] - ybar;
                sse += w[j] * e * e;
                sst += w[j] * c * c;
            }
            fit.local_r_squared[focal] = sst > 0.0 ? 1.0 - sse / sst : 0.0;

            if (options.compute_cv) loo[i] = loo_at(A, y, w, i);
        } catch (const Error& e) {
            errors.record(i, e.what());
        }
    }
    errors.rethrow();

    fit.residuals = y - fit.fitted;
    fit.ss_res = fit.residuals.squaredNorm();
    fit.trace_hat = fit.hat_diagonal.sum();
    for (std::size_t i = 0; i < n; ++i)
        if (ridged[i]) fit.ridged.push_back(i);
    fit.aicc = gwr_aicc(n, fit.ss_res, fit.trace_hat, &fit.aicc_note);
    if (options.compute_cv) {
        double score = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (loo[i].ok) score += loo[i].error * loo[i].error;
            else fit.cv_excluded.push_back(i);
        }
        if (fit.cv_excluded.size() < n) fit.cv_score = score;
    }
    return fit;
}

GWRFit gwr_fit(const Dataset& ds, std::span<const std::string> predictors, const KernelSpec& spec,
               const GWROptions& options) {
    const auto distances = distance_matrix(ds.centroids);
    GWRFit fit;
    try {
        fit = gwr_fit(ds.columns(predictors), ds.target, distances, spec, options);
    } catch (const LocalFitError& e) {
        throw LocalFitError(std::string(e.what()) + " (area '" + ds.areas.at(e.location()) + "')", e.location());
    }
    fit.predictor_names.assign(predictors.begin(), predictors.end());
    return fit;
}

CVScore loo_cv_score(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const DistanceMatrix& distances,
                     const KernelSpec& spec) {
    check_inputs(X, y, distances, spec);
    const Eigen::MatrixXd A = with_intercept(X);
    const auto n = static_cast<std::size_t>(A.rows());
    std::vector<LooOutcome> loo(n);
    ParallelErrors errors(n);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t i = 0; i < n; ++i) {
        try {
            const auto w = focal_weights(distances, i, spec);
            require_support(w, static_cast<std::size_t>(A.cols()), i);
            loo[i] = loo_at(A, y, w, i);
        } catch (const Error& e) {
            errors.record(i, e.what());
        }
    }
    errors.rethrow();
    CVScore out;
    for (std::size_t i = 0; i < n; ++i) {
        if (loo[i].ok) out.score += loo[i].error * loo[i].error;
        else out.excluded.push_back(i);
    }
    if (out.excluded.size() == n) throw NumericalError("loo-cv: every leave-one-out system is singular");
    return out;
}

CVScore loo_cv_score(const Dataset& ds, std::span<const std::string> predictors, const KernelSpec& spec) {
    return loo_cv_score(ds.columns(predictors), ds.target, distance_matrix(ds.centroids), spec);
}

// --------------------------------------------------------- bandwidth search

BandwidthSearch bandwidth_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const DistanceMatrix& distances, KernelKind kind, BandwidthMode mode,
                                 std::span<const double> grid, Criterion criterion) {
    if (grid.empty()) throw ConfigError("bandwidth grid is empty");
    BandwidthSearch search;
    search.kind = kind;
    search.mode = mode;
    search.criterion = criterion;
    std::optional<std::size_t> best;
    for (double b : grid) {
        BandwidthScore row{b, std::nullopt, "ok"};
        try {
            const KernelSpec spec{kind, mode, b};
            if (criterion == Criterion::cv) {
                const auto cv = loo_cv_score(X, y, distances, spec);
                if (cv.excluded.empty()) row.score = cv.score;
                else row.status = std::to_string(cv.excluded.size()) + " singular leave-one-out systems";
            } else {
                const auto fit = gwr_fit(X, y, distances, spec, {.ridge_on_singular = false, .compute_cv = false});
                if (fit.aicc) row.score = fit.aicc;
                else row.status = fit.aicc_note;
            }
        } catch (const Error& e) {
            row.status = e.what();
        }
        search.rows.push_back(row);
        const auto idx = search.rows.size() - 1;
        if (!row.score) continue;
        if (!best) {
            best = idx;
            continue;
        }
        const auto& cur = search.rows[*best];
        if (*row.score < *cur.score || (*row.score == *cur.score && row.bandwidth < cur.bandwidth)) best = idx;
    }
    if (!best) throw NumericalError("bandwidth search: every grid point failed");
    search.best = search.rows[*best].bandwidth;
    return search;
}

BandwidthSearch bandwidth_search(const Dataset& ds, std::span<const std::string> predictors, KernelKind kind,
                                 BandwidthMode mode, std::span<const double> grid, Criterion criterion) {
    return bandwidth_search(ds.columns(predictors), ds.target, distance_matrix(ds.centroids), kind, mode, grid,
                            criterion);
}

std::vector<double> linear_grid(double start, double stop, double step) {
    if (!(step > 0.0) || stop < start) throw ConfigError("bandwidth grid needs step > 0 and stop >= start");
    std::vector<double> grid;
    for (std::size_t k = 0;; ++k) {
        const double v = start + static_cast<double>(k) * step;
        if (v > stop + 1e-9 * step) break;
        grid.push_back(v);
    }
    return grid;
}

BandwidthSearch merge_searches(const BandwidthSearch& coarse, const BandwidthSearch& fine) {
    BandwidthSearch out = coarse;
    out.rows.insert(out.rows.end(), fine.rows.begin(), fine.rows.end());
    const BandwidthScore* best = nullptr;
    for (const auto& r : out.rows) {
        if (!r.score) continue;
        if (!best || *r.score < *best->score || (*r.score == *best->score && r.bandwidth < best->bandwidth))
            best = &r;
    }
    if (!best) throw NumericalError("bandwidth search: every grid point failed");
    out.best = best->bandwidth;
    return out;
}

void write_bandwidth_csv(std::ostream& out, const BandwidthSearch& search) {
    csv::Writer w(out);
    w.row({"bandwidth", "kernel", "mode", "criterion", "score", "status"});
    for (const auto& r : search.rows) {
        w.field(r.bandwidth).field(to_string(search.kind)).field(to_string(search.mode)).field(to_string(search.criterion));
        if (r.score) w.field(*r.score);
        else w.empty();
        w.field(r.status);
        w.end_row();
    }
}

void write_gwr_csv(std::ostream& out, const GWRFit& fit, const Dataset& ds) {
    if (static_cast<std::size_t>(fit.coefficients.rows()) != ds.size())
        throw DataError("gwr table: fit and dataset sizes differ");
    csv::Writer w(out);
    w.field("area").field("x").field("y").field("intercept");
    for (const auto& p : fit.predictor_names) w.field(p);
    w.field("local_r2").field("residual");
    w.end_row();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        w.field(ds.areas[i]).field(ds.centroids[i].x).field(ds.centroids[i].y);
        for (Eigen::Index c = 0; c < fit.coefficients.cols(); ++c) w.field(fit.coefficients(r, c));
        w.field(fit.local_r_squared[r]).field(fit.residuals[r]);
        w.end_row();
    }
}

} // namespace gwrkit
