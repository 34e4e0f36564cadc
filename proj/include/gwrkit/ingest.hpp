#pragma once

#include "gwrkit/error.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gwrkit {

enum class ColumnType { text, number };

using SchemaHints = std::map<std::string, ColumnType>;

/// A census-style table as read from CSV. Every row has one slot per column.
/// Numeric columns keep the original text next to the parsed value; a cell
/// that is empty or fails to parse is missing (nullopt), never zero.
struct RawTable {
    std::vector<std::string> columns;
    std::vector<ColumnType> types;
    std::vector<std::vector<std::string>> text;
    std::vector<std::vector<std::optional<double>>> values;

    std::size_t row_count() const { return text.size(); }
    std::size_t column_count() const { return columns.size(); }

    std::optional<std::size_t> find_column(const std::string& name) const;
    /// Throws DataError naming the column when absent.
    std::size_t column_index(const std::string& name) const;

    const std::string& cell(std::size_t row, std::size_t col) const { return text[row][col]; }
    std::optional<double> number(std::size_t row, std::size_t col) const { return values[row][col]; }
    bool is_missing(std::size_t row, std::size_t col) const;

    /// (row, column) of every missing cell in a numeric column.
    std::vector<std::pair<std::size_t, std::size_t>> missing_cells() const;
};

/// Builds a table from parsed records, the first being the header. Columns
/// without a hint are numeric when more than half of their non-empty cells
/// parse as finite numbers.
RawTable make_table(const std::vector<std::vector<std::string>>& records, const SchemaHints& hints = {});

RawTable load_table(const std::filesystem::path& path, const SchemaHints& hints = {});

/// Raised when a rate or density has a zero (or negative) denominator.
class DegenerateDenominatorError : public DataError {
public:
    using DataError::DataError;
};

/// Violent crimes over total crimes. Throws DegenerateDenominatorError when
/// total is zero and DataError for negative counts or violent > total.
double compute_vcr(double violent_crimes, double total_crimes);

/// Persons per hectare.
double compute_density(double population, double hectares);

enum class FeatureKind { percentage_of_population, percentage_of_subgroup, rate, density, passthrough };

const char* to_string(FeatureKind kind);
FeatureKind parse_feature_kind(const std::string& text);

/// A derived column: sum of `numerators` divided by `denominator`. Shares
/// (the two percentage kinds and rate) are stored as fractions in [0, 1];
/// passthrough is the plain numerator sum and has no denominator.
struct FeatureSpec {
    std::string name;
    std::vector<std::string> numerators;
    std::string denominator;
    FeatureKind kind = FeatureKind::percentage_of_population;

    /// Throws ConfigError on an empty numerator list or a missing denominator.
    void validate() const;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

/// Validated analysis table: one row per area.
struct Dataset {
    std::vector<std::string> areas;
    std::vector<std::string> boroughs;
    std::vector<Point> centroids; ///< empty until geometry is joined
    std::vector<std::string> feature_names;
    Eigen::MatrixXd features;
    std::string target_name;
    Eigen::VectorXd target;

    std::size_t size() const { return areas.size(); }
    bool has_centroids() const { return !centroids.empty(); }

    std::optional<std::size_t> find_feature(const std::string& name) const;
    std::size_t feature_index(const std::string& name) const;
    Eigen::MatrixXd columns(std::span<const std::string> names) const;
    Eigen::MatrixXd coordinates() const;

    /// Rows in the given order.
    Dataset subset(std::span<const std::size_t> rows) const;

    /// Checks shape agreement, finiteness, target in [0, 1] and unique area
    /// names. Throws DataError.
    void validate() const;
};

struct DroppedRow {
    std::size_t row = 0;
    std::string area;
    std::string reason;
};

struct DeriveOptions {
    std::string area_column;
    std::string borough_column; ///< empty: borough left blank
};

struct DerivedDataset {
    Dataset dataset;
    std::vector<DroppedRow> dropped;
};

/// Evaluates every spec per row. Rows with a missing referenced cell, a
/// degenerate denominator or a share outside [0, 1] are dropped and reported
/// once each (reasons joined by "; ").
DerivedDataset derive_features(const RawTable& raw, std::span<const FeatureSpec> specs,
                               const FeatureSpec& target, const DeriveOptions& options);

struct JoinOptions {
    bool allow_geographic = false;
};

struct JoinResult {
    Dataset dataset;
    std::vector<std::string> unmatched;     ///< dataset areas with no usable geometry
    std::vector<std::string> warnings;
};

/// Attaches vertex-mean centroids from a GeoJSON FeatureCollection keyed by
/// `key_property`. The output keeps dataset order and only matched areas.
JoinResult join_geometry(const Dataset& ds, const nlohmann::ordered_json& geo, const std::string& key_property,
                         const JoinOptions& options = {});

struct BoroughRow {
    std::string borough;
    std::size_t area_count = 0;
    std::vector<double> features;
    double target = 0.0;
    double target_std = 0.0; ///< population std of member-area target values
};

struct BoroughTable {
    std::vector<std::string> feature_names;
    std::string target_name;
    std::vector<BoroughRow> rows; ///< sorted by borough name
};

/// Recomputes every feature and the target per borough from summed raw
/// counts (sum of numerators over sum of denominators, never a mean of
/// rates). Member areas are visited in area-name order, so the result does
/// not depend on row order.
BoroughTable dissolve_by_borough(const Dataset& ds, const RawTable& raw, std::span<const FeatureSpec> specs,
                                 const FeatureSpec& target, const DeriveOptions& options);

// Interchange format: area, borough, x, y, features..., target.
void write_dataset_csv(std::ostream& out, const Dataset& ds);
Dataset read_dataset_csv(const std::filesystem::path& path);
void write_drop_report_csv(std::ostream& out, std::span<const DroppedRow> dropped);
void write_borough_csv(std::ostream& out, const BoroughTable& table);

} // namespace gwrkit
