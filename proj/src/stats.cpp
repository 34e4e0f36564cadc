#include "gwrkit/stats.hpp"

#include "gwrkit/csv.hpp"
#include "gwrkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace gwrkit {

bool is_effectively_constant(const Eigen::Ref<const Eigen::VectorXd>& values) {
    if (values.size() == 0) return true;
    const double mean = values.mean();
    const double spread = (values.array() - mean).abs().maxCoeff();
    return spread <= 1e-13 * values.cwiseAbs().maxCoeff();
}

FeatureSummary summarize(const std::string& name, const Eigen::Ref<const Eigen::VectorXd>& values) {
    if (values.size() == 0) throw DataError("cannot summarize empty column '" + name + "'");
    FeatureSummary s;
    s.name = name;
    s.count = static_cast<std::size_t>(values.size());
    s.mean = values.mean();
    s.min = values.minCoeff();
    s.max = values.maxCoeff();
    s.range = s.max - s.min;
    if (values.size() > 1) {
        const double ss = (values.array() - s.mean).square().sum();
        s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

std::vector<FeatureSummary> descriptive_stats(const Dataset& ds) {
    if (ds.size() == 0) throw DataError("descriptive statistics of an empty dataset");
    std::vector<FeatureSummary> out;
    for (std::size_t j = 0; j < ds.feature_names.size(); ++j)
        out.push_back(summarize(ds.feature_names[j], ds.features.col(static_cast<Eigen::Index>(j))));
    out.push_back(summarize(ds.target_name, ds.target));
    return out;
}

CorrelationMatrix pearson_matrix(const Eigen::MatrixXd& data, std::vector<std::string> names) {
    if (data.rows() < 2) throw DataError("correlation needs at least two rows");
    if (static_cast<std::size_t>(data.cols()) != names.size()) throw DataError("column names do not match data");
    CorrelationMatrix out;
    std::vector<Eigen::VectorXd> centered;
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const auto& name = names[static_cast<std::size_t>(j)];
        if (is_effectively_constant(data.col(j))) {
            out.excluded.push_back(name);
            continue;
        }
        Eigen::VectorXd c = data.col(j).array() - data.col(j).mean();
        centered.push_back(c / c.norm());
        out.names.push_back(name);
    }
    if (centered.empty()) throw DataError("every column has zero variance");
    const auto k = static_cast<Eigen::Index>(centered.size());
    out.values = Eigen::MatrixXd::Identity(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i + 1; j < k; ++j) {
            const double r = std::clamp(centered[static_cast<std::size_t>(i)].dot(centered[static_cast<std::size_t>(j)]),
                                        -1.0, 1.0);
            out.values(i, j) = r;
            out.values(j, i) = r;
        }
    return out;
}

CorrelationMatrix pearson_matrix(const Dataset& ds, bool include_target) {
    Eigen::MatrixXd data = ds.features;
    auto names = ds.feature_names;
    if (include_target) {
        data.conservativeResize(Eigen::NoChange, data.cols() + 1);
        data.col(data.cols() - 1) = ds.target;
        names.push_back(ds.target_name);
    }
    return pearson_matrix(data, std::move(names));
}

namespace {

Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& X, bool intercept) {
    if (!intercept) return X;
    Eigen::MatrixXd A(X.rows(), X.cols() + 1);
    A.col(0).setOnes();
    A.rightCols(X.cols()) = X;
    return A;
}

} // namespace

OLSFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool intercept) {
    if (X.rows() != y.size()) throw DataError("ols: predictor rows and target length differ");
    const Eigen::MatrixXd A = design_matrix(X, intercept);
    const Eigen::Index n = A.rows();
    const Eigen::Index p = A.cols();
    if (p == 0) throw DataError("ols: no parameters to fit");
    if (n <= p)
        throw NumericalError("ols: insufficient data (" + std::to_string(n) + " rows for " + std::to_string(p) +
                             " parameters)");
    if (!A.allFinite() || !y.allFinite()) throw DataError("ols: non-finite input");

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv[0] : 0.0;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (smax == 0.0 || sv[sv.size() - 1] < rank_tolerance * smax) {
        qr.setThreshold(rank_tolerance);
        const auto rank = std::min<Eigen::Index>(qr.rank(), p - 1);
        const auto col = static_cast<std::size_t>(qr.colsPermutation().indices()[rank]);
        const std::string name = intercept ? (col == 0 ? "intercept" : "predictor " + std::to_string(col - 1))
                                           : "predictor " + std::to_string(col);
        throw CollinearityError("ols: design is rank deficient; " + name + " is linearly dependent on the others",
                                col);
    }

    OLSFit fit;
    fit.intercept = intercept;
    fit.coefficients = qr.solve(y);
    fit.fitted = A * fit.coefficients;
    fit.residuals = y - fit.fitted;
    fit.ss_res = fit.residuals.squaredNorm();
    const double ybar = y.mean();
    fit.ss_tot = (y.array() - ybar).square().sum();
    if (is_effectively_constant(y)) {
        fit.r_squared = 0.0;
        fit.warnings.emplace_back("target is constant; R^2 set to 0");
    } else {
        fit.r_squared = 1.0 - fit.ss_res / fit.ss_tot;
        if (intercept) fit.r_squared = std::clamp(fit.r_squared, 0.0, 1.0);
    }

    // (A^T A)^{-1} = P R^{-1} R^{-T} P^T
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd R_inv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const double sigma2 = fit.ss_res / static_cast<double>(n - p);
    fit.std_errors.resize(p);
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = 0; k < p; ++k) fit.std_errors[perm[k]] = std::sqrt(sigma2 * R_inv.row(k).squaredNorm());
    return fit;
}

OLSFit ols_fit(const Dataset& ds, std::span<const std::string> predictors, bool intercept) {
    OLSFit fit;
    try {
        fit = ols_fit(ds.columns(predictors), ds.target, intercept);
    } catch (const CollinearityError& e) {
        const auto col = e.column();
        if (intercept && col == 0) throw;
        const auto idx = intercept ? col - 1 : col;
        throw CollinearityError("ols: '" + predictors[idx] + "' is linearly dependent on the other predictors", col);
    }
    fit.target_name = ds.target_name;
    fit.predictor_names.assign(predictors.begin(), predictors.end());
    return fit;
}

VIFReport vif(const Eigen::MatrixXd& X, std::vector<std::string> names, double threshold) {
    const Eigen::Index k = X.cols();
    if (k < 2) throw DataError("vif needs at least two features");
    if (X.rows() <= k) throw NumericalError("vif: auxiliary regressions need more rows than features");
    VIFReport report;
    report.names = std::move(names);
    report.threshold = threshold;
    report.values.assign(static_cast<std::size_t>(k), 0.0);

#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::VectorXd y = X.col(j);
        Eigen::MatrixXd A(X.rows(), k);
        A.col(0).setOnes();
        for (Eigen::Index c = 0, out = 1; c < k; ++c)
            if (c != j) A.col(out++) = X.col(c);
        double value = std::numeric_limits<double>::infinity();
        if (!is_effectively_constant(y)) {
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
            cod.setThreshold(rank_tolerance);
            const Eigen::VectorXd beta = cod.solve(y);
            const double ss_res = (y - A * beta).squaredNorm();
            const double ss_tot = (y.array() - y.mean()).square().sum();
            if (ss_res > 1e-12 * ss_tot) value = std::max(1.0, ss_tot / ss_res);
        }
        report.values[static_cast<std::size_t>(j)] = value;
    }
    return report;
}

VIFReport vif(const Dataset& ds, std::span<const std::string> subset, double threshold) {
    return vif(ds.columns(subset), std::vector<std::string>(subset.begin(), subset.end()), threshold);
}

std::vector<ResidualRow> residual_table(const OLSFit& fit, const Dataset& ds) {
    if (static_cast<std::size_t>(fit.residuals.size()) != ds.size())
        throw DataError("residual table: fit has " + std::to_string(fit.residuals.size()) + " residuals for " +
                        std::to_string(ds.size()) + " areas");
    std::vector<ResidualRow> rows;
    rows.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        rows.push_back({ds.areas[i], ds.boroughs[i], ds.target[r], fit.fitted[r], fit.residuals[r]});
    }
    return rows;
}

void write_summary_csv(std::ostream& out, std::span<const FeatureSummary> rows) {
    csv::Writer w(out);
    w.row({"feature", "count", "mean", "std", "min", "max", "range"});
    for (const auto& s : rows) {
        w.field(s.name).field(s.count).field(s.mean).field(s.std).field(s.min).field(s.max).field(s.range);
        w.end_row();
    }
}

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& corr) {
    csv::Writer w(out);
    w.field("feature");
    for (const auto& n : corr.names) w.field(n);
    w.end_row();
    for (Eigen::Index i = 0; i < corr.values.rows(); ++i) {
        w.field(corr.names[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < corr.values.cols(); ++j) w.field(corr.values(i, j));
        w.end_row();
    }
}

void write_vif_csv(std::ostream& out, const VIFReport& report) {
    csv::Writer w(out);
    w.row({"feature", "vif", "severe"});
    for (std::size_t j = 0; j < report.names.size(); ++j) {
        w.field(report.names[j]).field(report.values[j]).field(report.severe(j) ? "yes" : "no");
        w.end_row();
    }
}

void write_residual_csv(std::ostream& out, std::span<const ResidualRow> rows) {
    csv::Writer w(out);
    w.row({"area", "borough", "observed", "fitted", "residual"});
    for (const auto& r : rows) {
        w.field(r.area).field(r.borough).field(r.observed).field(r.fitted).field(r.residual);
        w.end_row();
    }
}

void write_fit_summary_csv(std::ostream& out, std::span<const std::pair<std::string, OLSFit>> fits) {
    csv::Writer w(out);
    w.row({"model", "term", "coefficient", "std_error", "r_squared", "n"});
    for (const auto& [model, fit] : fits) {
        for (std::size_t k = 0; k < fit.parameter_count(); ++k) {
            std::string term;
            if (fit.intercept && k == 0) term = "intercept";
            else term = fit.predictor_names.at(fit.intercept ? k - 1 : k);
            const auto e = static_cast<Eigen::Index>(k);
            w.field(model).field(term).field(fit.coefficients[e]).field(fit.std_errors[e]).field(fit.r_squared)
                .field(static_cast<std::size_t>(fit.residuals.size()));
            w.end_row();
        }
    }
}

} // namespace gwrkit
