#pragma once

#include "gwrkit/ingest.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gwrkit::geojson {

using Json = nlohmann::ordered_json;

/// Parses a file and checks it is a FeatureCollection. Key order is kept.
Json load(const std::filesystem::path& path);

void require_feature_collection(const Json& doc);

/// True when a legacy "crs" member names a geographic (lon/lat) system.
bool declares_geographic_crs(const Json& doc);

/// Arithmetic mean of the exterior-ring vertices of a Polygon or of all
/// parts of a MultiPolygon. The closing vertex of a ring is not counted
/// twice. nullopt for other geometry types or empty rings.
std::optional<Point> exterior_vertex_mean(const Json& geometry);

enum class ColorScale { diverging, sequential };

const char* to_string(ColorScale scale);
ColorScale parse_color_scale(const std::string& text);

/// [min, mid, max]. Diverging forces mid = 0 and limits +-max|value|;
/// sequential uses the data range with its midpoint.
std::array<double, 3> scale_domain(const std::vector<double>& values, ColorScale scale);

struct ChoroplethResult {
    Json collection;
    std::vector<std::string> unmatched_values; ///< keys with no feature
    std::size_t matched = 0;
};

/// Copies `geo` and sets property `field` on every feature whose key is in
/// `values` (null elsewhere). Scale metadata lands in the top-level
/// "choropleth" member under the field name. Geometry is untouched.
ChoroplethResult export_choropleth(const Json& geo, const std::map<std::string, double>& values,
                                   const std::string& key_property, const std::string& field, ColorScale scale);

} // namespace gwrkit::geojson
