#include "gwrkit/geojson.hpp"

#include "gwrkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace gwrkit::geojson {

Json load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw DataError(path.string() + ": invalid JSON: " + e.what());
    }
    require_feature_collection(doc);
    return doc;
}

void require_feature_collection(const Json& doc) {
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
        !doc["features"].is_array())
        throw DataError("GeoJSON: expected a FeatureCollection with a features array");
}

bool declares_geographic_crs(const Json& doc) {
    if (!doc.contains("crs")) return false;
    const auto& crs = doc["crs"];
    std::string name;
    if (crs.is_object() && crs.contains("properties") && crs["properties"].is_object())
        name = crs["properties"].value("name", "");
    for (const char* tag : {"CRS84", "EPSG::4326", "EPSG:4326", "EPSG::4258", "EPSG::4269", "EPSG::4277"}) {
        if (name.find(tag) != std::string::npos) return true;
    }
    return false;
}

namespace {

void accumulate_ring(const Json& ring, double& sx, double& sy, std::size_t& count) {
    if (!ring.is_array() || ring.empty()) return;
    std::size_t n = ring.size();
    if (n > 1 && ring.front() == ring.back()) --n;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& pos = ring[i];
        if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
            throw DataError("GeoJSON: malformed position");
        sx += pos[0].get<double>();
        sy += pos[1].get<double>();
        ++count;
    }
}

} // namespace

std::optional<Point> exterior_vertex_mean(const Json& geometry) {
    if (!geometry.is_object() || !geometry.contains("coordinates")) return std::nullopt;
    const std::string type = geometry.value("type", "");
    const auto& coords = geometry["coordinates"];
    double sx = 0.0;
    double sy = 0.0;
    std::size_t count = 0;
    if (type == "Polygon") {
        if (coords.is_array() && !coords.empty()) accumulate_ring(coords[0], sx, sy, count);
    } else if (type == "MultiPolygon") {
        if (coords.is_array())
            for (const auto& polygon : coords)
                if (polygon.is_array() && !polygon.empty()) accumulate_ring(polygon[0], sx, sy, count);
    } else {
        return std::nullopt;
    }
    if (count == 0) return std::nullopt;
    return Point{sx / static_cast<double>(count), sy / static_cast<double>(count)};
}

const char* to_string(ColorScale scale) {
    return scale == ColorScale::diverging ? "diverging" : "sequential";
}

ColorScale parse_color_scale(const std::string& text) {
    if (text == "diverging") return ColorScale::diverging;
    if (text == "sequential") return ColorScale::sequential;
    throw ConfigError("unknown color scale '" + text + "' (expected diverging or sequential)");
}

std::array<double, 3> scale_domain(const std::vector<double>& values, ColorScale scale) {
    if (values.empty()) return {0.0, 0.0, 0.0};
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (scale == ColorScale::diverging) {
        const double limit = std::max(std::abs(*lo), std::abs(*hi));
        return {-limit, 0.0, limit};
    }
    return {*lo, *lo + (*hi - *lo) / 2.0, *hi};
}

namespace {

std::optional<std::string> key_text(const Json& props, const std::string& key) {
    if (!props.is_object() || !props.contains(key)) return std::nullopt;
    const auto& v = props[key];
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return v.dump();
    return std::nullopt;
}

} // namespace

ChoroplethResult export_choropleth(const Json& geo, const std::map<std::string, double>& values,
                                   const std::string& key_property, const std::string& field, ColorScale scale) {
    require_feature_collection(geo);
    ChoroplethResult result;
    result.collection = geo;
    std::map<std::string, bool> used;
    std::vector<double> injected;
    for (auto& feature : result.collection["features"]) {
        if (!feature.contains("properties") || feature["properties"].is_null())
            feature["properties"] = Json::object();
        auto& props = feature["properties"];
        const auto key = key_text(props, key_property);
        const auto it = key ? values.find(*key) : values.end();
        if (it == values.end()) {
            props[field] = nullptr;
            continue;
        }
        props[field] = it->second;
        injected.push_back(it->second);
        used[it->first] = true;
        ++result.matched;
    }
    if (result.matched == 0) throw DataError("choropleth '" + field + "': no value matched a feature");
    for (const auto& [key, value] : values)
        if (!used.count(key)) result.unmatched_values.push_back(key);

    const auto domain = scale_domain(injected, scale);
    auto& meta = result.collection["choropleth"];
    if (!meta.is_object()) meta = Json::object();
    meta[field] = Json{{"scale", to_string(scale)}, {"domain", {domain[0], domain[1], domain[2]}}};
    return result;
}

} // namespace gwrkit::geojson
