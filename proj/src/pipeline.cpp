#include "gwrkit/pipeline.hpp"

#include "gwrkit/csv.hpp"
#include "gwrkit/distance.hpp"
#include "gwrkit/sha256.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace gwrkit {

ArtifactSink::ArtifactSink(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw DataError("cannot create output directory " + dir_.string() + ": " + ec.message());
}

void ArtifactSink::write(const std::string& artifact, const std::string& filename, const std::string& content) {
    for (const auto& e : entries_)
        if (e.artifact == artifact || e.path == filename)
            throw DataError("artifact '" + artifact + "' (" + filename + ") written twice");
    const auto path = dir_ / filename;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
    out.close();
    if (!out) throw DataError("failed writing " + path.string());
    entries_.push_back({artifact, filename, sha256_hex(content)});
}

void ArtifactSink::write_manifest() const {
    std::ofstream out(dir_ / "manifest.txt", std::ios::binary | std::ios::trunc);
    for (const auto& e : entries_) out << e.artifact << '\t' << e.path << '\t' << e.sha256 << '\n';
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read manifest " + path.string());
    std::vector<ManifestEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        ManifestEntry e;
        std::getline(fields, e.artifact, '\t');
        std::getline(fields, e.path, '\t');
        std::getline(fields, e.sha256, '\t');
        entries.push_back(std::move(e));
    }
    return entries;
}

namespace {

template <typename Fn>
std::string render(Fn&& fn) {
    std::ostringstream out;
    fn(out);
    return out.str();
}

std::string dump(const geojson::Json& doc) { return doc.dump(1) + "\n"; }

// Injects several per-area fields into one copy of the boundaries.
geojson::Json choropleth_layers(const Boundaries& b, const std::vector<std::string>& areas,
                                const std::vector<std::pair<std::string, std::pair<Eigen::VectorXd, geojson::ColorScale>>>& layers) {
    geojson::Json doc = b.collection;
    for (const auto& [field, data] : layers) {
        std::map<std::string, double> values;
        for (std::size_t i = 0; i < areas.size(); ++i) values[areas[i]] = data.first[static_cast<Eigen::Index>(i)];
        doc = geojson::export_choropleth(doc, values, b.key, field, data.second).collection;
    }
    return doc;
}

} // namespace

IngestResult stage_ingest(const PipelineConfig& cfg, ArtifactSink& sink) {
    IngestResult result;
    result.raw = load_table(cfg.census_csv);
    const DeriveOptions opts{cfg.area_column, cfg.borough_column};
    auto derived = derive_features(result.raw, cfg.features, cfg.target, opts);

    result.boundaries.collection = geojson::load(cfg.boundaries_geojson);
    result.boundaries.key = cfg.geo_key;
    auto joined = join_geometry(derived.dataset, result.boundaries.collection, cfg.geo_key,
                                JoinOptions{cfg.allow_geographic});
    result.dataset = std::move(joined.dataset);
    result.dataset.validate();

    auto dropped = derived.dropped;
    for (const auto& area : joined.unmatched) dropped.push_back({0, area, "no matching boundary feature"});

    sink.write("dataset", "dataset.csv", render([&](std::ostream& o) { write_dataset_csv(o, result.dataset); }));
    sink.write("dropped_rows", "dropped_rows.csv", render([&](std::ostream& o) { write_drop_report_csv(o, dropped); }));
    if (!cfg.borough_column.empty()) {
        const auto boroughs = dissolve_by_borough(result.dataset, result.raw, cfg.features, cfg.target, opts);
        sink.write("borough_summary", "borough_summary.csv",
                   render([&](std::ostream& o) { write_borough_csv(o, boroughs); }));
    }
    return result;
}

void stage_stats(const Dataset& ds, std::span<const std::string> vif_subset, double vif_threshold,
                 double share_display_scale, std::span<const std::string> share_features, ArtifactSink& sink) {
    auto summary = descriptive_stats(ds);
    if (share_display_scale != 1.0) {
        for (auto& s : summary) {
            const bool share = std::find(share_features.begin(), share_features.end(), s.name) != share_features.end();
            if (!share) continue;
            s.mean *= share_display_scale;
            s.std *= share_display_scale;
            s.min *= share_display_scale;
            s.max *= share_display_scale;
            s.range *= share_display_scale;
        }
    }
    sink.write("descriptive_stats", "descriptive_stats.csv",
               render([&](std::ostream& o) { write_summary_csv(o, summary); }));
    const auto corr = pearson_matrix(ds, true);
    sink.write("correlation", "correlation.csv", render([&](std::ostream& o) { write_correlation_csv(o, corr); }));
    const auto report = vif(ds, vif_subset, vif_threshold);
    sink.write("vif", "vif.csv", render([&](std::ostream& o) { write_vif_csv(o, report); }));
}

OLSFit stage_ols(const Dataset& ds, std::span<const std::string> predictors, const Boundaries* boundaries,
                 ArtifactSink& sink) {
    std::vector<std::pair<std::string, OLSFit>> fits;
    for (const auto& p : predictors) fits.emplace_back("univariate:" + p, ols_fit(ds, std::span(&p, 1)));
    auto multi = ols_fit(ds, predictors);
    fits.emplace_back("multivariate", multi);
    sink.write("ols_summary", "ols_summary.csv", render([&](std::ostream& o) { write_fit_summary_csv(o, fits); }));
    const auto rows = residual_table(multi, ds);
    sink.write("ols_residuals", "ols_residuals.csv", render([&](std::ostream& o) { write_residual_csv(o, rows); }));
    if (boundaries) {
        const auto doc = choropleth_layers(*boundaries, ds.areas,
                                           {{"ols_residual", {multi.residuals, geojson::ColorScale::diverging}}});
        sink.write("ols_residuals_map", "ols_residuals.geojson", dump(doc));
    }
    return multi;
}

GWRFit stage_gwr(const Dataset& ds, std::span<const std::string> predictors, const GWRSettings& settings,
                 const Boundaries* boundaries, ArtifactSink& sink) {
    const auto X = ds.columns(predictors);
    const auto distances = distance_matrix(ds.centroids);
    auto search = bandwidth_search(X, ds.target, distances, settings.kind, settings.mode, settings.coarse_grid,
                                   settings.criterion);
    if (!settings.fine_grid.empty()) {
        BandwidthSearch fine;
        try {
            fine = bandwidth_search(X, ds.target, distances, settings.kind, settings.mode, settings.fine_grid,
                                    settings.criterion);
        } catch (const NumericalError&) {
            // every fine point failed; keep them in the table, best stays coarse
            fine.rows.clear();
            for (double b : settings.fine_grid) fine.rows.push_back({b, std::nullopt, "failed"});
        }
        search = merge_searches(search, fine);
    }
    sink.write("bandwidth_search", "bandwidth_search.csv",
               render([&](std::ostream& o) { write_bandwidth_csv(o, search); }));

    const KernelSpec spec{settings.kind, settings.mode, search.best};
    auto fit = gwr_fit(X, ds.target, distances, spec, {.ridge_on_singular = settings.ridge_on_singular, .compute_cv = true});
    fit.predictor_names.assign(predictors.begin(), predictors.end());
    sink.write("gwr_coefficients", "gwr_coefficients.csv", render([&](std::ostream& o) { write_gwr_csv(o, fit, ds); }));
    sink.write("gwr_summary", "gwr_summary.csv", render([&](std::ostream& o) {
                   csv::Writer w(o);
                   w.row({"kernel", "mode", "bandwidth", "criterion", "trace_hat", "ss_res", "cv_score", "aicc",
                          "ridged_locations"});
                   w.field(to_string(spec.kind)).field(to_string(spec.mode)).field(spec.bandwidth)
                       .field(to_string(settings.criterion)).field(fit.trace_hat).field(fit.ss_res);
                   if (fit.cv_score) w.field(*fit.cv_score);
                   else w.empty();
                   if (fit.aicc) w.field(*fit.aicc);
                   else w.empty();
                   w.field(fit.ridged.size());
                   w.end_row();
               }));
    if (boundaries) {
        std::vector<std::pair<std::string, std::pair<Eigen::VectorXd, geojson::ColorScale>>> layers;
        layers.push_back({"gwr_intercept", {fit.coefficients.col(0), geojson::ColorScale::diverging}});
        for (std::size_t j = 0; j < predictors.size(); ++j)
            layers.push_back({"gwr_" + predictors[j],
                              {fit.coefficients.col(static_cast<Eigen::Index>(j) + 1), geojson::ColorScale::diverging}});
        layers.push_back({"gwr_local_r2", {fit.local_r_squared, geojson::ColorScale::sequential}});
        sink.write("gwr_coefficients_map", "gwr_coefficients.geojson", dump(choropleth_layers(*boundaries, ds.areas, layers)));
    }
    return fit;
}

ClusterOutcome stage_cluster(const Eigen::MatrixXd& surface, std::span<const std::string> areas,
                             const ClusterSettings& settings, const Dataset* ds, const Boundaries* boundaries,
                             ArtifactSink& sink) {
    const auto z = standardize(surface);
    ClusterOutcome outcome;
    const SweepOptions sweep_opts{settings.kmeans, settings.linkage};
    outcome.sweep = sweep_k(z.values, settings.k_min, settings.k_max, settings.method, sweep_opts);
    sink.write("cluster_sweep", "cluster_sweep.csv", render([&](std::ostream& o) { write_sweep_csv(o, outcome.sweep); }));

    if (settings.k) outcome.k = *settings.k;
    else if (outcome.sweep.recommended) outcome.k = *outcome.sweep.recommended;
    else throw NumericalError("cluster sweep produced no scoreable k");

    const auto tree = agglomerative(z.values, outcome.k, settings.linkage);
    outcome.assignments = settings.method == ClusterMethod::kmeans ? kmeans(z.values, outcome.k, settings.kmeans).assignments
                                                                   : tree.assignments;
    sink.write("cluster_assignments", "cluster_assignments.csv",
               render([&](std::ostream& o) { write_assignments_csv(o, areas, outcome.assignments); }));
    const auto sil = silhouette(z.values, outcome.assignments);
    sink.write("silhouette", "silhouette.csv",
               render([&](std::ostream& o) { write_silhouette_csv(o, areas, outcome.assignments, sil); }));
    sink.write("dendrogram", "dendrogram.csv", render([&](std::ostream& o) { write_dendrogram_csv(o, tree.dendrogram); }));

    if (ds) {
        std::vector<std::pair<std::string, std::vector<ClusterRegression>>> regs;
        for (const auto& p : settings.regression_predictors)
            regs.emplace_back(p, per_cluster_regression(*ds, outcome.assignments, p));
        sink.write("per_cluster_regression", "per_cluster_regression.csv",
                   render([&](std::ostream& o) { write_cluster_regression_csv(o, regs); }));
    }
    if (boundaries) {
        Eigen::VectorXd labels(static_cast<Eigen::Index>(outcome.assignments.size()));
        for (std::size_t i = 0; i < outcome.assignments.size(); ++i)
            labels[static_cast<Eigen::Index>(i)] = outcome.assignments[i];
        const std::vector<std::string> names(areas.begin(), areas.end());
        sink.write("clusters_map", "clusters.geojson",
                   dump(choropleth_layers(*boundaries, names, {{"cluster", {labels, geojson::ColorScale::sequential}}})));
    }
    return outcome;
}

MDSEmbedding stage_mds(const Dataset& ds, std::span<const std::string> features, const std::string& size_feature,
                       ArtifactSink& sink) {
    const auto z = standardize(ds.columns(features));
    const auto embedding = classical_mds(pairwise_euclidean(z.values), 2);
    Eigen::VectorXd size;
    if (!size_feature.empty()) size = ds.features.col(static_cast<Eigen::Index>(ds.feature_index(size_feature)));
    sink.write("mds", "mds.csv", render([&](std::ostream& o) {
                   write_mds_csv(o, ds.areas, embedding, ds.target, size, ds.target_name,
                                 size_feature.empty() ? "size" : size_feature);
               }));
    return embedding;
}

std::vector<ManifestEntry> run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    for (const auto& p : {cfg.census_csv, cfg.boundaries_geojson})
        if (!std::filesystem::is_regular_file(p)) throw ConfigError("input file not found: " + p.string());

    ArtifactSink sink(out_dir);
    auto stage = [&](const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const Error& e) {
            sink.write_manifest();
            throw StageError(name, e);
        } catch (const std::exception& e) {
            sink.write_manifest();
            throw StageError(name, DataError(e.what()));
        }
    };

    IngestResult ingest;
    stage("ingest", [&] { ingest = stage_ingest(cfg, sink); });
    const Dataset& ds = ingest.dataset;
    std::vector<std::string> shares;
    for (const auto& f : cfg.features)
        if (f.kind != FeatureKind::density && f.kind != FeatureKind::passthrough) shares.push_back(f.name);
    shares.push_back(cfg.target.name);

    stage("stats", [&] { stage_stats(ds, cfg.ols_subset, cfg.vif_threshold, cfg.share_display_scale, shares, sink); });
    stage("ols", [&] { stage_ols(ds, cfg.ols_subset, &ingest.boundaries, sink); });
    GWRFit gwr;
    stage("gwr", [&] { gwr = stage_gwr(ds, cfg.gwr_subset, cfg.gwr, &ingest.boundaries, sink); });
    stage("cluster", [&] {
        Eigen::MatrixXd surface(gwr.coefficients.rows(), static_cast<Eigen::Index>(cfg.cluster_subset.size()));
        for (std::size_t j = 0; j < cfg.cluster_subset.size(); ++j) {
            const auto pos = std::find(cfg.gwr_subset.begin(), cfg.gwr_subset.end(), cfg.cluster_subset[j]) -
                             cfg.gwr_subset.begin();
            surface.col(static_cast<Eigen::Index>(j)) = gwr.coefficients.col(pos + 1);
        }
        stage_cluster(surface, ds.areas, cfg.cluster, &ds, &ingest.boundaries, sink);
    });
    stage("mds", [&] { stage_mds(ds, cfg.mds_subset, cfg.size_feature, sink); });
    sink.write_manifest();
    return sink.entries();
}

} // namespace gwrkit
