#pragma once

#include "gwrkit/cluster.hpp"
#include "gwrkit/gwr.hpp"
#include "gwrkit/ingest.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gwrkit {

struct GWRSettings {
    KernelKind kind = KernelKind::bisquare;
    BandwidthMode mode = BandwidthMode::fixed;
    std::vector<double> coarse_grid;
    std::vector<double> fine_grid;
    Criterion criterion = Criterion::cv;
    bool ridge_on_singular = false;
};

struct ClusterSettings {
    ClusterMethod method = ClusterMethod::kmeans;
    int k_min = 1;
    int k_max = 10;
    std::optional<int> k; ///< nullopt: use the sweep's recommendation
    KMeansOptions kmeans;
    Linkage linkage = Linkage::ward;
    std::vector<std::string> regression_predictors;
};

/// Everything a full run needs. Relative paths are resolved against the
/// directory holding the config file.
struct PipelineConfig {
    std::filesystem::path census_csv;
    std::filesystem::path boundaries_geojson;
    std::string area_column;
    std::string borough_column;
    std::string geo_key;
    bool allow_geographic = false;

    std::vector<FeatureSpec> features;
    FeatureSpec target;
    std::string size_feature; ///< optional; sizes MDS points

    std::vector<std::string> ols_subset;
    std::vector<std::string> gwr_subset;
    std::vector<std::string> cluster_subset;
    std::vector<std::string> mds_subset;

    double vif_threshold = 5.0;
    double share_display_scale = 1.0;

    GWRSettings gwr;
    ClusterSettings cluster;

    std::filesystem::path output_dir;

    /// Structural checks that need no data: subsets name declared features,
    /// clustered columns were fitted by GWR, ranges are sane. ConfigError.
    void validate() const;
};

/// Parses the JSON config. Unknown keys anywhere are errors.
PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// Either {"start", "stop", "step"} or an explicit list of bandwidths.
std::vector<double> parse_grid(const nlohmann::json& node, const std::string& where);

} // namespace gwrkit
