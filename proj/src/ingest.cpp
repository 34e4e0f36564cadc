#include "gwrkit/ingest.hpp"

#include "gwrkit/csv.hpp"
#include "gwrkit/geojson.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

namespace gwrkit {

// ---------------------------------------------------------------- RawTable

std::optional<std::size_t> RawTable::find_column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns.begin());
}

std::size_t RawTable::column_index(const std::string& name) const {
    if (auto idx = find_column(name)) return *idx;
    throw DataError("unknown column '" + name + "'");
}

bool RawTable::is_missing(std::size_t row, std::size_t col) const {
    if (types[col] == ColumnType::text) return text[row][col].empty();
    return !values[row][col].has_value();
}

std::vector<std::pair<std::size_t, std::size_t>> RawTable::missing_cells() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t r = 0; r < row_count(); ++r)
        for (std::size_t c = 0; c < column_count(); ++c)
            if (types[c] == ColumnType::number && !values[r][c]) out.emplace_back(r, c);
    return out;
}

namespace {

std::optional<double> finite_number(const std::string& text) {
    auto v = csv::parse_number(text);
    if (v && !std::isfinite(*v)) return std::nullopt;
    return v;
}

} // namespace

RawTable make_table(const std::vector<std::vector<std::string>>& records, const SchemaHints& hints) {
    if (records.empty()) throw DataError("table has no header row");
    RawTable table;
    table.columns = records.front();
    std::set<std::string> seen;
    for (const auto& name : table.columns)
        if (!seen.insert(name).second) throw DataError("duplicate column name '" + name + "'");
    for (const auto& [name, type] : hints)
        if (!seen.count(name)) throw DataError("schema hint names unknown column '" + name + "'");

    const std::size_t ncol = table.columns.size();
    for (std::size_t r = 1; r < records.size(); ++r) {
        auto row = records[r];
        if (row.size() == 1 && row[0].empty() && ncol > 1) continue; // blank line
        if (row.size() > ncol)
            throw DataError("row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                            " fields, header has " + std::to_string(ncol));
        row.resize(ncol);
        table.text.push_back(std::move(row));
    }
    if (table.text.empty()) throw DataError("table has no data rows");

    table.types.resize(ncol);
    table.values.assign(table.row_count(), std::vector<std::optional<double>>(ncol));
    for (std::size_t c = 0; c < ncol; ++c) {
        std::size_t non_empty = 0;
        std::size_t parsed = 0;
        for (std::size_t r = 0; r < table.row_count(); ++r) {
            const auto& cell = table.text[r][c];
            if (cell.empty()) continue;
            ++non_empty;
            if ((table.values[r][c] = finite_number(cell))) ++parsed;
        }
        if (const auto hint = hints.find(table.columns[c]); hint != hints.end())
            table.types[c] = hint->second;
        else
            table.types[c] = (parsed > 0 && 2 * parsed > non_empty) ? ColumnType::number : ColumnType::text;
        if (table.types[c] == ColumnType::text)
            for (auto& row : table.values) row[c].reset();
    }
    return table;
}

RawTable load_table(const std::filesystem::path& path, const SchemaHints& hints) {
    try {
        return make_table(csv::read_file(path), hints);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

// ------------------------------------------------------------ rate helpers

double compute_vcr(double violent_crimes, double total_crimes) {
    if (total_crimes == 0.0) throw DegenerateDenominatorError("total crimes is zero");
    if (violent_crimes < 0.0 || total_crimes < 0.0) throw DataError("crime counts must be non-negative");
    if (violent_crimes > total_crimes) throw DataError("violent crimes exceed total crimes");
    return violent_crimes / total_crimes;
}

double compute_density(double population, double hectares) {
    if (!(hectares > 0.0)) throw DegenerateDenominatorError("area must be positive");
    if (population < 0.0) throw DataError("population must be non-negative");
    return population / hectares;
}

const char* to_string(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::percentage_of_population: return "percentage_of_population";
    case FeatureKind::percentage_of_subgroup: return "percentage_of_subgroup";
    case FeatureKind::rate: return "rate";
    case FeatureKind::density: return "density";
    case FeatureKind::passthrough: return "passthrough";
    }
    return "?";
}

FeatureKind parse_feature_kind(const std::string& text) {
    for (auto kind : {FeatureKind::percentage_of_population, FeatureKind::percentage_of_subgroup, FeatureKind::rate,
                      FeatureKind::density, FeatureKind::passthrough})
        if (text == to_string(kind)) return kind;
    throw ConfigError("unknown feature kind '" + text + "'");
}

void FeatureSpec::validate() const {
    if (name.empty()) throw ConfigError("feature spec without a name");
    if (numerators.empty()) throw ConfigError("feature '" + name + "': empty numerator list");
    if (kind != FeatureKind::passthrough && denominator.empty())
        throw ConfigError("feature '" + name + "': denominator required for kind " + to_string(kind));
}

namespace {

// Evaluates a spec from already-summed numerator and denominator values.
double evaluate(const FeatureSpec& spec, double numerator, double denominator) {
    if (spec.kind == FeatureKind::passthrough) return numerator;
    if (spec.kind == FeatureKind::density) return compute_density(numerator, denominator);
    if (spec.kind == FeatureKind::rate) return compute_vcr(numerator, denominator);
    if (denominator == 0.0) throw DegenerateDenominatorError("denominator '" + spec.denominator + "' is zero");
    const double share = numerator / denominator;
    if (share < 0.0 || share > 1.0) throw DataError("share outside [0, 1]");
    return share;
}

struct ResolvedSpec {
    const FeatureSpec* spec;
    std::vector<std::size_t> numerators;
    std::optional<std::size_t> denominator;
};

std::vector<ResolvedSpec> resolve(const RawTable& raw, std::span<const FeatureSpec> specs, const FeatureSpec& target) {
    std::vector<ResolvedSpec> out;
    std::set<std::string> names;
    auto add = [&](const FeatureSpec& spec) {
        spec.validate();
        if (!names.insert(spec.name).second) throw ConfigError("duplicate feature name '" + spec.name + "'");
        ResolvedSpec r{&spec, {}, std::nullopt};
        for (const auto& col : spec.numerators) {
            const auto idx = raw.column_index(col);
            if (raw.types[idx] != ColumnType::number) throw DataError("column '" + col + "' is not numeric");
            r.numerators.push_back(idx);
        }
        if (spec.kind != FeatureKind::passthrough) {
            r.denominator = raw.column_index(spec.denominator);
            if (raw.types[*r.denominator] != ColumnType::number)
                throw DataError("column '" + spec.denominator + "' is not numeric");
        }
        out.push_back(std::move(r));
    };
    for (const auto& s : specs) add(s);
    add(target);
    return out;
}

struct RowSums {
    double numerator = 0.0;
    double denominator = 0.0;
};

// Sums the referenced cells of one row; a missing cell yields an error text.
std::optional<std::string> row_sums(const RawTable& raw, std::size_t row, const ResolvedSpec& r, RowSums& sums) {
    sums = {};
    for (auto c : r.numerators) {
        const auto v = raw.number(row, c);
        if (!v) return "missing value in '" + raw.columns[c] + "' for feature '" + r.spec->name + "'";
        sums.numerator += *v;
    }
    if (r.denominator) {
        const auto v = raw.number(row, *r.denominator);
        if (!v) return "missing value in '" + raw.columns[*r.denominator] + "' for feature '" + r.spec->name + "'";
        sums.denominator = *v;
    }
    return std::nullopt;
}

} // namespace

DerivedDataset derive_features(const RawTable& raw, std::span<const FeatureSpec> specs, const FeatureSpec& target,
                               const DeriveOptions& options) {
    const auto area_col = raw.column_index(options.area_column);
    std::optional<std::size_t> borough_col;
    if (!options.borough_column.empty()) borough_col = raw.column_index(options.borough_column);
    const auto resolved = resolve(raw, specs, target);
    const std::size_t nfeat = specs.size();

    std::vector<std::vector<double>> kept_rows;
    DerivedDataset out;
    auto& ds = out.dataset;
    std::set<std::string> seen_areas;
    for (std::size_t r = 0; r < raw.row_count(); ++r) {
        const std::string& area = raw.cell(r, area_col);
        std::vector<std::string> reasons;
        if (area.empty()) reasons.emplace_back("missing area name");
        else if (!seen_areas.insert(area).second) throw DataError("duplicate area name '" + area + "'");

        std::vector<double> values(resolved.size(), 0.0);
        for (std::size_t f = 0; f < resolved.size(); ++f) {
            RowSums sums;
            if (auto missing = row_sums(raw, r, resolved[f], sums)) {
                reasons.push_back(*missing);
                continue;
            }
            try {
                values[f] = evaluate(*resolved[f].spec, sums.numerator, sums.denominator);
            } catch (const DataError& e) {
                reasons.push_back("feature '" + resolved[f].spec->name + "': " + e.what());
            }
        }
        if (!reasons.empty()) {
            std::string joined = reasons.front();
            for (std::size_t i = 1; i < reasons.size(); ++i) joined += "; " + reasons[i];
            out.dropped.push_back({r, area, std::move(joined)});
            continue;
        }
        ds.areas.push_back(area);
        ds.boroughs.push_back(borough_col ? raw.cell(r, *borough_col) : std::string{});
        kept_rows.push_back(std::move(values));
    }
    if (kept_rows.empty()) throw DataError("every row was dropped during feature derivation");

    for (const auto& s : specs) ds.feature_names.push_back(s.name);
    ds.target_name = target.name;
    ds.features.resize(static_cast<Eigen::Index>(kept_rows.size()), static_cast<Eigen::Index>(nfeat));
    ds.target.resize(static_cast<Eigen::Index>(kept_rows.size()));
    for (std::size_t r = 0; r < kept_rows.size(); ++r) {
        for (std::size_t f = 0; f < nfeat; ++f)
            ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) = kept_rows[r][f];
        ds.target[static_cast<Eigen::Index>(r)] = kept_rows[r][nfeat];
    }
    ds.validate();
    return out;
}

// ----------------------------------------------------------------- Dataset

std::optional<std::size_t> Dataset::find_feature(const std::string& name) const {
    const auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - feature_names.begin());
}

std::size_t Dataset::feature_index(const std::string& name) const {
    if (auto idx = find_feature(name)) return *idx;
    throw DataError("unknown feature '" + name + "'");
}

Eigen::MatrixXd Dataset::columns(std::span<const std::string> names) const {
    Eigen::MatrixXd out(features.rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j)
        out.col(static_cast<Eigen::Index>(j)) = features.col(static_cast<Eigen::Index>(feature_index(names[j])));
    return out;
}

Eigen::MatrixXd Dataset::coordinates() const {
    if (!has_centroids()) throw DataError("dataset has no centroids; join geometry first");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(centroids.size()), 2);
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        out(static_cast<Eigen::Index>(i), 0) = centroids[i].x;
        out(static_cast<Eigen::Index>(i), 1) = centroids[i].y;
    }
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.feature_names = feature_names;
    out.target_name = target_name;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.target.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto r = rows[k];
        out.areas.push_back(areas.at(r));
        out.boroughs.push_back(boroughs.at(r));
        if (has_centroids()) out.centroids.push_back(centroids.at(r));
        out.features.row(static_cast<Eigen::Index>(k)) = features.row(static_cast<Eigen::Index>(r));
        out.target[static_cast<Eigen::Index>(k)] = target[static_cast<Eigen::Index>(r)];
    }
    return out;
}

void Dataset::validate() const {
    const auto n = areas.size();
    if (n == 0) throw DataError("dataset is empty");
    if (boroughs.size() != n || static_cast<std::size_t>(features.rows()) != n ||
        static_cast<std::size_t>(target.size()) != n || (has_centroids() && centroids.size() != n))
        throw DataError("dataset columns have inconsistent lengths");
    if (static_cast<std::size_t>(features.cols()) != feature_names.size())
        throw DataError("feature matrix width does not match feature names");
    std::set<std::string> names;
    for (const auto& a : areas)
        if (!names.insert(a).second) throw DataError("duplicate area name '" + a + "'");
    std::set<std::string> fnames;
    for (const auto& f : feature_names)
        if (!fnames.insert(f).second) throw DataError("duplicate feature name '" + f + "'");
    if (!features.allFinite()) throw DataError("dataset contains non-finite feature values");
    for (Eigen::Index i = 0; i < target.size(); ++i) {
        if (!std::isfinite(target[i]) || target[i] < 0.0 || target[i] > 1.0)
            throw DataError("target of area '" + areas[static_cast<std::size_t>(i)] + "' is outside [0, 1]");
    }
    for (const auto& c : centroids)
        if (!std::isfinite(c.x) || !std::isfinite(c.y)) throw DataError("non-finite centroid");
}

// ------------------------------------------------------------ join/dissolve

JoinResult join_geometry(const Dataset& ds, const nlohmann::ordered_json& geo, const std::string& key_property,
                         const JoinOptions& options) {
    geojson::require_feature_collection(geo);
    JoinResult result;
    if (geojson::declares_geographic_crs(geo)) {
        if (!options.allow_geographic)
            throw DataError("boundaries use a geographic (lon/lat) CRS; reproject to planar coordinates "
                            "or pass the allow-geographic override");
        result.warnings.emplace_back("geographic CRS accepted by override; distances are in degrees");
    }

    std::unordered_map<std::string, Point> centroid_by_key;
    bool key_seen = false;
    for (const auto& feature : geo["features"]) {
        const auto& props = feature.contains("properties") ? feature["properties"] : nlohmann::ordered_json();
        if (!props.is_object() || !props.contains(key_property)) continue;
        key_seen = true;
        const auto& k = props[key_property];
        const std::string key = k.is_string() ? k.get<std::string>() : k.dump();
        const auto centroid = feature.contains("geometry") ? geojson::exterior_vertex_mean(feature["geometry"])
                                                           : std::nullopt;
        if (!centroid) {
            result.warnings.push_back("feature '" + key + "' has no polygon geometry");
            continue;
        }
        if (!centroid_by_key.emplace(key, *centroid).second)
            throw DataError("duplicate boundary key '" + key + "'");
    }
    if (!key_seen) throw DataError("no boundary feature carries property '" + key_property + "'");

    std::vector<std::size_t> rows;
    std::vector<Point> centroids;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto it = centroid_by_key.find(ds.areas[i]);
        if (it == centroid_by_key.end()) {
            result.unmatched.push_back(ds.areas[i]);
            continue;
        }
        rows.push_back(i);
        centroids.push_back(it->second);
    }
    if (rows.empty()) throw DataError("no dataset area matched a boundary feature on '" + key_property + "'");
    Dataset base = ds;
    base.centroids.clear();
    result.dataset = base.subset(rows);
    result.dataset.centroids = std::move(centroids);
    return result;
}

BoroughTable dissolve_by_borough(const Dataset& ds, const RawTable& raw, std::span<const FeatureSpec> specs,
                                 const FeatureSpec& target, const DeriveOptions& options) {
    const auto area_col = raw.column_index(options.area_column);
    const auto resolved = resolve(raw, specs, target);
    std::unordered_map<std::string, std::size_t> raw_row;
    for (std::size_t r = 0; r < raw.row_count(); ++r) raw_row.emplace(raw.cell(r, area_col), r);

    // borough -> (area name, dataset row), sorted by area name
    std::map<std::string, std::map<std::string, std::size_t>> members;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.boroughs[i].empty()) throw DataError("area '" + ds.areas[i] + "' has no borough");
        members[ds.boroughs[i]].emplace(ds.areas[i], i);
    }

    BoroughTable table;
    for (const auto& s : specs) table.feature_names.push_back(s.name);
    table.target_name = target.name;
    for (const auto& [borough, areas] : members) {
        std::vector<RowSums> totals(resolved.size());
        for (const auto& [area, ds_row] : areas) {
            const auto it = raw_row.find(area);
            if (it == raw_row.end()) throw DataError("area '" + area + "' missing from raw counts");
            for (std::size_t f = 0; f < resolved.size(); ++f) {
                RowSums sums;
                if (auto missing = row_sums(raw, it->second, resolved[f], sums))
                    throw DataError("area '" + area + "': " + *missing);
                totals[f].numerator += sums.numerator;
                totals[f].denominator += sums.denominator;
            }
        }
        BoroughRow row;
        row.borough = borough;
        row.area_count = areas.size();
        for (std::size_t f = 0; f < resolved.size(); ++f) {
            double value = 0.0;
            try {
                value = evaluate(*resolved[f].spec, totals[f].numerator, totals[f].denominator);
            } catch (const DataError& e) {
                throw DataError("borough '" + borough + "', feature '" + resolved[f].spec->name + "': " + e.what());
            }
            if (f < specs.size()) row.features.push_back(value);
            else row.target = value;
        }
        double mean = 0.0;
        for (const auto& [area, i] : areas) mean += ds.target[static_cast<Eigen::Index>(i)];
        mean /= static_cast<double>(areas.size());
        double ss = 0.0;
        for (const auto& [area, i] : areas) {
            const double d = ds.target[static_cast<Eigen::Index>(i)] - mean;
            ss += d * d;
        }
        row.target_std = std::sqrt(ss / static_cast<double>(areas.size()));
        table.rows.push_back(std::move(row));
    }
    return table;
}

// ------------------------------------------------------------------- CSV io

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
    csv::Writer w(out);
    w.field("area").field("borough").field("x").field("y");
    for (const auto& f : ds.feature_names) w.field(f);
    w.field(ds.target_name);
    w.end_row();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        w.field(ds.areas[i]).field(ds.boroughs[i]);
        if (ds.has_centroids()) w.field(ds.centroids[i].x).field(ds.centroids[i].y);
        else w.empty().empty();
        for (Eigen::Index c = 0; c < ds.features.cols(); ++c) w.field(ds.features(r, c));
        w.field(ds.target[r]);
        w.end_row();
    }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    const auto records = csv::read_file(path);
    if (records.size() < 2) throw DataError(path.string() + ": dataset has no rows");
    const auto& header = records.front();
    if (header.size() < 5 || header[0] != "area" || header[1] != "borough" || header[2] != "x" || header[3] != "y")
        throw DataError(path.string() + ": expected header area,borough,x,y,<features...>,<target>");
    Dataset ds;
    ds.feature_names.assign(header.begin() + 4, header.end() - 1);
    ds.target_name = header.back();
    const auto n = static_cast<Eigen::Index>(records.size() - 1);
    const auto p = static_cast<Eigen::Index>(ds.feature_names.size());
    ds.features.resize(n, p);
    ds.target.resize(n);
    bool any_xy = false;
    bool all_xy = true;
    std::vector<Point> centroids;
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& rec = records[static_cast<std::size_t>(r) + 1];
        if (rec.size() != header.size())
            throw DataError(path.string() + ": row " + std::to_string(r + 1) + " has wrong field count");
        ds.areas.push_back(rec[0]);
        ds.boroughs.push_back(rec[1]);
        const auto x = csv::parse_number(rec[2]);
        const auto y = csv::parse_number(rec[3]);
        if (x && y) {
            any_xy = true;
            centroids.push_back({*x, *y});
        } else {
            all_xy = false;
        }
        auto number = [&](std::size_t idx) {
            const auto v = csv::parse_number(rec[idx]);
            if (!v) throw DataError(path.string() + ": non-numeric value in row " + std::to_string(r + 1));
            return *v;
        };
        for (Eigen::Index c = 0; c < p; ++c) ds.features(r, c) = number(static_cast<std::size_t>(c) + 4);
        ds.target[r] = number(rec.size() - 1);
    }
    if (any_xy && !all_xy) throw DataError(path.string() + ": some rows lack coordinates");
    if (all_xy) ds.centroids = std::move(centroids);
    ds.validate();
    return ds;
}

void write_drop_report_csv(std::ostream& out, std::span<const DroppedRow> dropped) {
    csv::Writer w(out);
    w.row({"area", "reason"});
    for (const auto& d : dropped) {
        w.field(d.area).field(d.reason);
        w.end_row();
    }
}

void write_borough_csv(std::ostream& out, const BoroughTable& table) {
    csv::Writer w(out);
    w.field("borough").field("areas");
    for (const auto& f : table.feature_names) w.field(f);
    w.field(table.target_name).field(table.target_name + "_std");
    w.end_row();
    for (const auto& row : table.rows) {
        w.field(row.borough).field(row.area_count);
        for (double v : row.features) w.field(v);
        w.field(row.target).field(row.target_std);
        w.end_row();
    }
}

} // namespace gwrkit
