#pragma once

#include "gwrkit/ingest.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace gwrkit {

struct FeatureSummary {
    std::string name;
    std::size_t count = 0;
    double mean = 0.0;
    double std = 0.0; ///< sample (n - 1) standard deviation; 0 when n == 1
    double min = 0.0;
    double max = 0.0;
    double range = 0.0;
};

/// One summary per feature followed by one for the target.
std::vector<FeatureSummary> descriptive_stats(const Dataset& ds);
FeatureSummary summarize(const std::string& name, const Eigen::Ref<const Eigen::VectorXd>& values);

struct CorrelationMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd values;
    std::vector<std::string> excluded; ///< zero-variance columns left out
};

/// Pearson correlations of the columns of `data`. Zero-variance columns are
/// excluded and listed. The result is exactly symmetric with a unit diagonal.
CorrelationMatrix pearson_matrix(const Eigen::MatrixXd& data, std::vector<std::string> names);
CorrelationMatrix pearson_matrix(const Dataset& ds, bool include_target);

struct OLSFit {
    std::string target_name;
    std::vector<std::string> predictor_names;
    bool intercept = true;
    Eigen::VectorXd coefficients; ///< intercept first when present
    Eigen::VectorXd std_errors;
    Eigen::VectorXd fitted;
    Eigen::VectorXd residuals; ///< observed - fitted
    double ss_res = 0.0;
    double ss_tot = 0.0;
    double r_squared = 0.0;
    std::vector<std::string> warnings;

    std::size_t parameter_count() const { return static_cast<std::size_t>(coefficients.size()); }
};

/// Relative singular-value cutoff below which a design is rank deficient.
inline constexpr double rank_tolerance = 1e-10;

/// Least squares through a column-pivoted Householder QR. Throws
/// CollinearityError (naming a dependent column) when the design is rank
/// deficient and NumericalError when n <= p. A constant target gives
/// R^2 = 0 with a warning.
OLSFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool intercept = true);

/// ols_fit on dataset columns, with names filled in.
OLSFit ols_fit(const Dataset& ds, std::span<const std::string> predictors, bool intercept = true);

struct VIFReport {
    std::vector<std::string> names;
    std::vector<double> values; ///< +inf for perfect collinearity
    double threshold = 5.0;

    bool severe(std::size_t j) const { return values[j] > threshold; }
};

/// VIF_j = 1 / (1 - R^2_j) from regressing feature j on the rest of the
/// subset with an intercept.
VIFReport vif(const Dataset& ds, std::span<const std::string> subset, double threshold = 5.0);
VIFReport vif(const Eigen::MatrixXd& X, std::vector<std::string> names, double threshold = 5.0);

struct ResidualRow {
    std::string area;
    std::string borough;
    double observed = 0.0;
    double fitted = 0.0;
    double residual = 0.0;
};

std::vector<ResidualRow> residual_table(const OLSFit& fit, const Dataset& ds);

void write_summary_csv(std::ostream& out, std::span<const FeatureSummary> rows);
void write_correlation_csv(std::ostream& out, const CorrelationMatrix& corr);
void write_vif_csv(std::ostream& out, const VIFReport& report);
void write_residual_csv(std::ostream& out, std::span<const ResidualRow> rows);

/// Long format: model, term, coefficient, std_error, r_squared, n.
void write_fit_summary_csv(std::ostream& out, std::span<const std::pair<std::string, OLSFit>> fits);

} // namespace gwrkit

namespace gwrkit {

/// True when every value equals the mean up to 1e-13 of the largest
/// magnitude (exact zero columns included).
bool is_effectively_constant(const Eigen::Ref<const Eigen::VectorXd>& values);

} // namespace gwrkit
