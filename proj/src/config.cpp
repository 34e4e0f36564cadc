#include "gwrkit/config.hpp"

#include "gwrkit/error.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace gwrkit {

namespace {

using Json = nlohmann::json;

void reject_unknown(const Json& node, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!node.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : node.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

const Json& require(const Json& node, const char* key, const std::string& where) {
    if (!node.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
    return node.at(key);
}

template <typename T>
T get(const Json& node, const std::string& where) {
    try {
        return node.get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(where + ": value has the wrong type");
    }
}

template <typename T>
T get_or(const Json& parent, const char* key, T fallback, const std::string& where) {
    if (!parent.contains(key)) return fallback;
    return get<T>(parent.at(key), where + "." + key);
}

std::vector<std::string> names(const Json& node, const std::string& where) {
    return get<std::vector<std::string>>(node, where);
}

FeatureSpec parse_spec(const Json& node, const std::string& where) {
    reject_unknown(node, where, {"name", "kind", "numerators", "denominator"});
    FeatureSpec spec;
    spec.name = get<std::string>(require(node, "name", where), where + ".name");
    spec.kind = parse_feature_kind(get<std::string>(require(node, "kind", where), where + ".kind"));
    spec.numerators = names(require(node, "numerators", where), where + ".numerators");
    spec.denominator = get_or<std::string>(node, "denominator", "", where);
    spec.validate();
    return spec;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

} // namespace

std::vector<double> parse_grid(const Json& node, const std::string& where) {
    if (node.is_array()) {
        auto grid = get<std::vector<double>>(node, where);
        if (grid.empty()) throw ConfigError(where + ": empty bandwidth list");
        return grid;
    }
    reject_unknown(node, where, {"start", "stop", "step"});
    return linear_grid(get<double>(require(node, "start", where), where + ".start"),
                       get<double>(require(node, "stop", where), where + ".stop"),
                       get<double>(require(node, "step", where), where + ".step"));
}

PipelineConfig parse_config(const Json& doc, const std::filesystem::path& base_dir) {
    reject_unknown(doc, "config",
                   {"inputs", "columns", "allow_geographic", "features", "target", "size_feature", "subsets",
                    "vif_threshold", "share_display_scale", "gwr", "cluster", "output_dir"});
    PipelineConfig cfg;

    const auto& inputs = require(doc, "inputs", "config");
    reject_unknown(inputs, "inputs", {"census", "boundaries"});
    cfg.census_csv = resolve(base_dir, get<std::string>(require(inputs, "census", "inputs"), "inputs.census"));
    cfg.boundaries_geojson =
        resolve(base_dir, get<std::string>(require(inputs, "boundaries", "inputs"), "inputs.boundaries"));

    const auto& columns = require(doc, "columns", "config");
    reject_unknown(columns, "columns", {"area", "borough", "geo_key"});
    cfg.area_column = get<std::string>(require(columns, "area", "columns"), "columns.area");
    cfg.borough_column = get_or<std::string>(columns, "borough", "", "columns");
    cfg.geo_key = get<std::string>(require(columns, "geo_key", "columns"), "columns.geo_key");
    cfg.allow_geographic = get_or<bool>(doc, "allow_geographic", false, "config");

    const auto& features = require(doc, "features", "config");
    if (!features.is_array() || features.empty()) throw ConfigError("features: expected a non-empty list");
    for (std::size_t i = 0; i < features.size(); ++i)
        cfg.features.push_back(parse_spec(features[i], "features[" + std::to_string(i) + "]"));
    cfg.target = parse_spec(require(doc, "target", "config"), "target");
    cfg.size_feature = get_or<std::string>(doc, "size_feature", "", "config");

    const auto& subsets = require(doc, "subsets", "config");
    reject_unknown(subsets, "subsets", {"ols", "gwr", "cluster", "mds"});
    cfg.ols_subset = names(require(subsets, "ols", "subsets"), "subsets.ols");
    cfg.gwr_subset = names(require(subsets, "gwr", "subsets"), "subsets.gwr");
    cfg.cluster_subset = names(require(subsets, "cluster", "subsets"), "subsets.cluster");
    cfg.mds_subset = names(require(subsets, "mds", "subsets"), "subsets.mds");

    cfg.vif_threshold = get_or<double>(doc, "vif_threshold", 5.0, "config");
    cfg.share_display_scale = get_or<double>(doc, "share_display_scale", 1.0, "config");

    const auto& gwr = require(doc, "gwr", "config");
    reject_unknown(gwr, "gwr", {"kernel", "mode", "coarse", "fine", "criterion", "ridge_on_singular"});
    cfg.gwr.kind = parse_kernel_kind(get_or<std::string>(gwr, "kernel", "bisquare", "gwr"));
    cfg.gwr.mode = parse_bandwidth_mode(get_or<std::string>(gwr, "mode", "fixed", "gwr"));
    cfg.gwr.coarse_grid = parse_grid(require(gwr, "coarse", "gwr"), "gwr.coarse");
    if (gwr.contains("fine")) cfg.gwr.fine_grid = parse_grid(gwr.at("fine"), "gwr.fine");
    cfg.gwr.criterion = parse_criterion(get_or<std::string>(gwr, "criterion", "cv", "gwr"));
    cfg.gwr.ridge_on_singular = get_or<bool>(gwr, "ridge_on_singular", false, "gwr");

    const auto& cl = require(doc, "cluster", "config");
    reject_unknown(cl, "cluster",
                   {"method", "k_min", "k_max", "k", "seed", "restarts", "max_iters", "linkage", "regression_predictors"});
    cfg.cluster.method = parse_cluster_method(get_or<std::string>(cl, "method", "kmeans", "cluster"));
    cfg.cluster.k_min = get_or<int>(cl, "k_min", 1, "cluster");
    cfg.cluster.k_max = get_or<int>(cl, "k_max", 10, "cluster");
    if (cl.contains("k")) {
        const auto& k = cl.at("k");
        if (k.is_string()) {
            if (k.get<std::string>() != "auto") throw ConfigError("cluster.k: expected an integer or \"auto\"");
        } else {
            cfg.cluster.k = get<int>(k, "cluster.k");
        }
    }
    cfg.cluster.kmeans.seed = get_or<std::uint64_t>(cl, "seed", 0, "cluster");
    cfg.cluster.kmeans.restarts = get_or<int>(cl, "restarts", 10, "cluster");
    cfg.cluster.kmeans.max_iters = get_or<int>(cl, "max_iters", 300, "cluster");
    cfg.cluster.linkage = parse_linkage(get_or<std::string>(cl, "linkage", "ward", "cluster"));
    cfg.cluster.regression_predictors =
        cl.contains("regression_predictors") ? names(cl.at("regression_predictors"), "cluster.regression_predictors")
                                             : cfg.cluster_subset;

    cfg.output_dir = resolve(base_dir, get_or<std::string>(doc, "output_dir", "out", "config"));
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(doc, path.parent_path());
}

void PipelineConfig::validate() const {
    std::set<std::string> declared;
    for (const auto& f : features) declared.insert(f.name);
    auto check = [&](const std::vector<std::string>& subset, const std::string& label, std::size_t min_size) {
        if (subset.size() < min_size)
            throw ConfigError("subsets." + label + ": needs at least " + std::to_string(min_size) + " feature(s)");
        std::set<std::string> seen;
        for (const auto& name : subset) {
            if (!declared.count(name)) throw ConfigError("subsets." + label + ": unknown feature '" + name + "'");
            if (!seen.insert(name).second) throw ConfigError("subsets." + label + ": '" + name + "' listed twice");
        }
    };
    check(ols_subset, "ols", 2);
    check(gwr_subset, "gwr", 1);
    check(cluster_subset, "cluster", 1);
    check(mds_subset, "mds", 1);
    check(cluster.regression_predictors, "cluster.regression_predictors", 1);
    for (const auto& name : cluster_subset)
        if (std::find(gwr_subset.begin(), gwr_subset.end(), name) == gwr_subset.end())
            throw ConfigError("subsets.cluster: '" + name + "' has no GWR coefficient surface (not in subsets.gwr)");
    if (!size_feature.empty() && !declared.count(size_feature))
        throw ConfigError("size_feature: unknown feature '" + size_feature + "'");
    if (cluster.k_min < 1 || cluster.k_max < cluster.k_min) throw ConfigError("cluster: invalid k range");
    if (cluster.k && (*cluster.k < 2 || *cluster.k > cluster.k_max))
        throw ConfigError("cluster.k must lie in [2, k_max]");
    if (cluster.k_max < 2 && !cluster.k) throw ConfigError("cluster: k_max must be at least 2 for an automatic k");
    if (!(vif_threshold > 0.0)) throw ConfigError("vif_threshold must be positive");
    if (!(share_display_scale > 0.0)) throw ConfigError("share_display_scale must be positive");
    if (area_column.empty() || geo_key.empty()) throw ConfigError("columns.area and columns.geo_key are required");
}

} // namespace gwrkit
