#pragma once

#include "gwrkit/cluster.hpp"
#include "gwrkit/config.hpp"
#include "gwrkit/geojson.hpp"
#include "gwrkit/gwr.hpp"
#include "gwrkit/ingest.hpp"
#include "gwrkit/mds.hpp"
#include "gwrkit/stats.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gwrkit {

struct ManifestEntry {
    std::string artifact;
    std::string path; ///< relative to the output directory
    std::string sha256;
};

/// Writes artifacts into one directory and records their hashes.
class ArtifactSink {
public:
    explicit ArtifactSink(std::filesystem::path dir);

    void write(const std::string& artifact, const std::string& filename, const std::string& content);
    const std::vector<ManifestEntry>& entries() const { return entries_; }
    const std::filesystem::path& dir() const { return dir_; }

    /// manifest.txt: one "artifact<TAB>path<TAB>sha256" line per artifact.
    void write_manifest() const;

private:
    std::filesystem::path dir_;
    std::vector<ManifestEntry> entries_;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// A stage failure: the stage name plus the underlying error kind.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& cause)
        : Error(cause.kind(), "stage '" + stage + "': " + cause.what()), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct Boundaries {
    geojson::Json collection;
    std::string key;
};

struct IngestResult {
    RawTable raw;
    Dataset dataset;
    Boundaries boundaries;
};

IngestResult stage_ingest(const PipelineConfig& cfg, ArtifactSink& sink);

void stage_stats(const Dataset& ds, std::span<const std::string> vif_subset, double vif_threshold,
                 double share_display_scale, std::span<const std::string> share_features, ArtifactSink& sink);

OLSFit stage_ols(const Dataset& ds, std::span<const std::string> predictors, const Boundaries* boundaries,
                 ArtifactSink& sink);

GWRFit stage_gwr(const Dataset& ds, std::span<const std::string> predictors, const GWRSettings& settings,
                 const Boundaries* boundaries, ArtifactSink& sink);

struct ClusterOutcome {
    SweepResult sweep;
    int k = 0;
    std::vector<int> assignments;
};

/// Clusters the standardized columns of `surface` (one row per area).
ClusterOutcome stage_cluster(const Eigen::MatrixXd& surface, std::span<const std::string> areas,
                             const ClusterSettings& settings, const Dataset* ds, const Boundaries* boundaries,
                             ArtifactSink& sink);

MDSEmbedding stage_mds(const Dataset& ds, std::span<const std::string> features, const std::string& size_feature,
                       ArtifactSink& sink);

/// Runs every stage in order and writes manifest.txt. On failure the
/// manifest lists the artifacts completed so far and a StageError is thrown.
std::vector<ManifestEntry> run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

} // namespace gwrkit
