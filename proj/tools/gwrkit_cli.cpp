// gwrkit command line: full pipeline runs and per-stage invocations on
// previously written artifacts.

#include "gwrkit/csv.hpp"
#include "gwrkit/pipeline.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using namespace gwrkit;

constexpr int exit_config = 2;
constexpr int exit_data = 3;
constexpr int exit_numerical = 4;

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::config: return exit_config;
    case ErrorKind::data: return exit_data;
    case ErrorKind::numerical: return exit_numerical;
    }
    return 1;
}

std::vector<double> parse_grid_text(const std::string& text) {
    // start:stop:step or a comma separated list
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ':')) {
            const auto v = csv::parse_number(part);
            if (!v) throw ConfigError("bad grid '" + text + "'");
            parts.push_back(*v);
        }
        if (parts.size() != 3) throw ConfigError("grid must be start:stop:step");
        return linear_grid(parts[0], parts[1], parts[2]);
    }
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto v = csv::parse_number(part);
        if (!v) throw ConfigError("bad grid value '" + part + "'");
        grid.push_back(*v);
    }
    return grid;
}

std::optional<Boundaries> maybe_boundaries(const std::string& path, const std::string& key) {
    if (path.empty()) return std::nullopt;
    if (key.empty()) throw ConfigError("--geo requires --key");
    return Boundaries{geojson::load(path), key};
}

void report(const ArtifactSink& sink) {
    sink.write_manifest();
    for (const auto& e : sink.entries()) std::cout << e.artifact << '\t' << (sink.dir() / e.path).string() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gwrkit: geographically weighted regression and clustering pipeline"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: OpenMP default)");

    // run
    auto* run = app.add_subcommand("run", "run every stage from a config file");
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    run->add_option("--config", config_path, "pipeline config (JSON)")->required();
    run->add_option("--out", out_dir, "output directory (overrides output_dir)");
    run->add_option("--threads", threads, "worker threads");
    run->add_option("--seed", seed, "k-means seed (overrides cluster.seed)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "derive features and join geometry");
    ingest->add_option("--config", config_path, "pipeline config (JSON)")->required();
    ingest->add_option("--out", out_dir, "output directory")->required();

    // stats
    auto* stats = app.add_subcommand("stats", "descriptive statistics, correlations and VIFs");
    std::string in_path;
    std::vector<std::string> features;
    double vif_threshold = 5.0;
    stats->add_option("--in", in_path, "dataset.csv")->required();
    stats->add_option("--features", features, "VIF subset (default: all features)")->delimiter(',');
    stats->add_option("--vif-threshold", vif_threshold, "severity threshold");
    stats->add_option("--out", out_dir, "output directory")->required();

    // ols
    auto* ols = app.add_subcommand("ols", "univariate and multivariate OLS with residuals");
    std::string geo_path, geo_key;
    ols->add_option("--in", in_path, "dataset.csv")->required();
    ols->add_option("--predictors", features, "predictor features")->delimiter(',')->required();
    ols->add_option("--geo", geo_path, "boundaries GeoJSON for a residual map");
    ols->add_option("--key", geo_key, "boundary property holding the area name");
    ols->add_option("--out", out_dir, "output directory")->required();

    // gwr
    auto* gwr = app.add_subcommand("gwr", "bandwidth search and final GWR fit");
    std::string kernel = "bisquare", mode = "fixed", criterion = "cv";
    std::vector<std::string> grids;
    bool ridge = false;
    gwr->add_option("--in", in_path, "dataset.csv with centroids")->required();
    gwr->add_option("--predictors", features, "predictor features")->delimiter(',')->required();
    gwr->add_option("--kernel", kernel, "gaussian | bisquare | exponential");
    gwr->add_option("--mode", mode, "fixed | adaptive");
    gwr->add_option("--grid", grids, "start:stop:step or b1,b2,... (repeat for coarse then fine)")->required();
    gwr->add_option("--criterion", criterion, "cv | aicc");
    gwr->add_flag("--ridge", ridge, "regularize singular local systems instead of failing");
    gwr->add_option("--geo", geo_path, "boundaries GeoJSON for coefficient maps");
    gwr->add_option("--key", geo_key, "boundary property holding the area name");
    gwr->add_option("--out", out_dir, "output directory")->required();

    // cluster
    auto* cluster = app.add_subcommand("cluster", "cluster a coefficient surface");
    std::vector<std::string> columns, regress;
    std::string method = "kmeans", linkage = "ward", dataset_path, k_text = "auto";
    int k_min = 1, k_max = 10, restarts = 10, max_iters = 300;
    std::uint64_t cluster_seed = 0;
    cluster->add_option("--in", in_path, "gwr_coefficients.csv (or any table with an area column)")->required();
    cluster->add_option("--columns", columns, "columns to cluster")->delimiter(',')->required();
    cluster->add_option("--method", method, "kmeans | agglomerative");
    cluster->add_option("--k-min", k_min);
    cluster->add_option("--k-max", k_max);
    cluster->add_option("--k", k_text, "chosen k or 'auto'");
    cluster->add_option("--seed", cluster_seed);
    cluster->add_option("--restarts", restarts);
    cluster->add_option("--max-iters", max_iters);
    cluster->add_option("--linkage", linkage, "ward | complete | average");
    cluster->add_option("--dataset", dataset_path, "dataset.csv for per-cluster regression");
    cluster->add_option("--regress", regress, "predictors for per-cluster regression")->delimiter(',');
    cluster->add_option("--geo", geo_path, "boundaries GeoJSON for a cluster map");
    cluster->add_option("--key", geo_key, "boundary property holding the area name");
    cluster->add_option("--out", out_dir, "output directory")->required();

    // mds
    auto* mds = app.add_subcommand("mds", "classical MDS of standardized features");
    std::string size_feature;
    mds->add_option("--in", in_path, "dataset.csv")->required();
    mds->add_option("--features", features, "features to project")->delimiter(',')->required();
    mds->add_option("--size-feature", size_feature, "feature used to size points");
    mds->add_option("--out", out_dir, "output directory")->required();

    // choropleth
    auto* choro = app.add_subcommand("choropleth", "inject a table column into boundary GeoJSON");
    std::string column, area_column = "area", field, scale = "diverging", out_file;
    choro->add_option("--geo", geo_path, "boundaries GeoJSON")->required();
    choro->add_option("--key", geo_key, "boundary property holding the area name")->required();
    choro->add_option("--in", in_path, "CSV table")->required();
    choro->add_option("--area-column", area_column, "table column with area names");
    choro->add_option("--column", column, "value column")->required();
    choro->add_option("--field", field, "property name (default: column)");
    choro->add_option("--scale", scale, "diverging | sequential");
    choro->add_option("--out", out_file, "output GeoJSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }
    if (threads > 0) omp_set_num_threads(threads);

    std::string stage = app.get_subcommands().front()->get_name();
    try {
        if (*run) {
            auto cfg = load_config(config_path);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            if (seed) cfg.cluster.kmeans.seed = *seed;
            const auto entries = run_pipeline(cfg, cfg.output_dir);
            for (const auto& e : entries) std::cout << e.artifact << '\t' << e.sha256 << '\n';
        } else if (*ingest) {
            const auto cfg = load_config(config_path);
            ArtifactSink sink(out_dir);
            stage_ingest(cfg, sink);
            report(sink);
        } else if (*stats) {
            const auto ds = read_dataset_csv(in_path);
            if (features.empty()) features = ds.feature_names;
            ArtifactSink sink(out_dir);
            stage_stats(ds, features, vif_threshold, 1.0, {}, sink);
            report(sink);
        } else if (*ols) {
            const auto ds = read_dataset_csv(in_path);
            const auto b = maybe_boundaries(geo_path, geo_key);
            ArtifactSink sink(out_dir);
            stage_ols(ds, features, b ? &*b : nullptr, sink);
            report(sink);
        } else if (*gwr) {
            const auto ds = read_dataset_csv(in_path);
            GWRSettings settings;
            settings.kind = parse_kernel_kind(kernel);
            settings.mode = parse_bandwidth_mode(mode);
            settings.criterion = parse_criterion(criterion);
            settings.ridge_on_singular = ridge;
            settings.coarse_grid = parse_grid_text(grids.at(0));
            for (std::size_t g = 1; g < grids.size(); ++g) {
                const auto more = parse_grid_text(grids[g]);
                settings.fine_grid.insert(settings.fine_grid.end(), more.begin(), more.end());
            }
            const auto b = maybe_boundaries(geo_path, geo_key);
            ArtifactSink sink(out_dir);
            stage_gwr(ds, features, settings, b ? &*b : nullptr, sink);
            report(sink);
        } else if (*cluster) {
            const auto table = load_table(in_path);
            const auto area_col = table.column_index("area");
            Eigen::MatrixXd surface(static_cast<Eigen::Index>(table.row_count()), static_cast<Eigen::Index>(columns.size()));
            std::vector<std::string> areas;
            for (std::size_t r = 0; r < table.row_count(); ++r) {
                areas.push_back(table.cell(r, area_col));
                for (std::size_t c = 0; c < columns.size(); ++c) {
                    const auto v = table.number(r, table.column_index(columns[c]));
                    if (!v) throw DataError("missing value in column '" + columns[c] + "' row " + std::to_string(r + 1));
                    surface(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *v;
                }
            }
            ClusterSettings settings;
            settings.method = parse_cluster_method(method);
            settings.linkage = parse_linkage(linkage);
            settings.k_min = k_min;
            settings.k_max = k_max;
            if (k_text != "auto") {
                const auto k = csv::parse_number(k_text);
                if (!k) throw ConfigError("--k must be an integer or 'auto'");
                settings.k = static_cast<int>(*k);
            }
            settings.kmeans = {cluster_seed, max_iters, restarts};
            settings.regression_predictors = regress;
            std::optional<Dataset> ds;
            if (!dataset_path.empty()) {
                ds = read_dataset_csv(dataset_path);
                if (ds->areas != areas) throw DataError("--dataset rows do not match the clustered table");
                if (settings.regression_predictors.empty()) throw ConfigError("--dataset requires --regress");
            }
            const auto b = maybe_boundaries(geo_path, geo_key);
            ArtifactSink sink(out_dir);
            stage_cluster(surface, areas, settings, ds ? &*ds : nullptr, b ? &*b : nullptr, sink);
            report(sink);
        } else if (*mds) {
            const auto ds = read_dataset_csv(in_path);
            ArtifactSink sink(out_dir);
            stage_mds(ds, features, size_feature, sink);
            report(sink);
        } else if (*choro) {
            const auto geo = geojson::load(geo_path);
            const auto table = load_table(in_path);
            const auto area_col = table.column_index(area_column);
            const auto value_col = table.column_index(column);
            std::map<std::string, double> values;
            for (std::size_t r = 0; r < table.row_count(); ++r)
                if (const auto v = table.number(r, value_col)) values[table.cell(r, area_col)] = *v;
            const auto result = geojson::export_choropleth(geo, values, geo_key, field.empty() ? column : field,
                                                           geojson::parse_color_scale(scale));
            std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
            if (!out) throw DataError("cannot write " + out_file);
            out << result.collection.dump(1) << '\n';
            for (const auto& key : result.unmatched_values) std::cerr << "unmatched: " << key << '\n';
        }
    } catch (const StageError& e) {
        std::cerr << "gwrkit: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const Error& e) {
        std::cerr << "gwrkit: stage '" << stage << "': " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "gwrkit: stage '" << stage << "': " << e.what() << '\n';
        return 1;
    }
    return 0;
}
