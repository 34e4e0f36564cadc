// Writes the bundled synthetic census table and boundary layer: a 20 x 15
// grid of square areas in 12 boroughs with a planted, spatially varying
// relationship between violent crime rate and the demographic shares.

#include "gwrkit/csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace {

constexpr int grid_cols = 20;
constexpr int grid_rows = 15;
constexpr double cell = 10.0;

std::string area_code(int r, int c) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "E%02d%02d", r, c);
    return buf;
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 2 || (argc == 2 && argv[1][0] == '-')) {
        std::fprintf(stderr, "usage: make_synthetic [output-dir]\n");
        return 2;
    }
    const std::filesystem::path dir = argc > 1 ? argv[1] : "data/synthetic";
    std::filesystem::create_directories(dir);
    std::mt19937_64 rng(20111);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.01);

    std::ofstream csv_out(dir / "census.csv", std::ios::binary);
    gwrkit::csv::Writer w(csv_out);
    w.row({"area_code", "borough", "population", "age_0_14", "age_15_19", "degree", "professionals", "employed",
           "white", "econ_inactive", "bad_health", "commuting", "hectares", "violent_crimes", "total_crimes"});

    nlohmann::ordered_json geo = {{"type", "FeatureCollection"}, {"features", nlohmann::ordered_json::array()}};

    for (int r = 0; r < grid_rows; ++r) {
        for (int c = 0; c < grid_cols; ++c) {
            const std::string code = area_code(r, c);
            const std::string borough = "B" + std::to_string(1 + (r / 5) * 4 + c / 5);
            const double x = (c + 0.5) * cell;
            const double y = (r + 0.5) * cell;
            const double east = std::tanh((x - 100.0) / 25.0);  // -1 west, +1 east
            const double north = (y - 75.0) / 75.0;

            const double population = std::round(1200.0 + 1800.0 * u(rng));
            const double children = 0.12 + 0.16 * u(rng);
            const double teen = 0.04 + 0.05 * u(rng);
            const double degree = 0.15 + 0.45 * u(rng);
            const double employed_share = 0.55 + 0.2 * u(rng);
            const double professionals = std::clamp(0.1 + 0.9 * degree + 0.05 * (u(rng) - 0.5), 0.0, 1.0);
            const double white = std::clamp(0.45 + 0.3 * north + 0.2 * (u(rng) - 0.5), 0.05, 0.95);
            const double inactive = 0.2 + 0.2 * u(rng);
            const double bad_health = std::clamp(0.09 - 0.08 * degree + 0.03 * u(rng), 0.005, 1.0);
            const double commuting = 0.2 + 0.5 * u(rng);
            const double hectares = 20.0 + 80.0 * u(rng);

            const double beta_children = 0.8 * east;
            const double beta_inactive = 0.5 - 0.4 * north;
            double vcr = 0.2 + beta_children * (children - 0.2) + beta_inactive * (inactive - 0.3) -
                         0.15 * (white - 0.45) + 0.1 * (commuting - 0.45) + noise(rng);
            vcr = std::clamp(vcr, 0.01, 0.99);

            double total_crimes = std::round(population * (0.05 + 0.1 * u(rng)));
            double violent = std::round(vcr * total_crimes);
            if (r == 7 && c == 3) total_crimes = violent = 0.0; // no recorded crime: dropped on ingest

            const double employed = std::round(population * employed_share);
            w.field(code).field(borough).field(population).field(std::round(children * population))
                .field(std::round(teen * population)).field(std::round(degree * population))
                .field(std::round(professionals * employed)).field(employed).field(std::round(white * population))
                .field(std::round(inactive * population));
            if (r == 11 && c == 16) w.field("n/a"); // unparseable census cell: dropped on ingest
            else w.field(std::round(bad_health * population));
            w.field(std::round(commuting * employed)).field(std::round(hectares * 10.0) / 10.0).field(violent)
                .field(total_crimes);
            w.end_row();

            if (r == 0 && c == grid_cols - 1) continue; // boundary missing: reported as unmatched
            const double x0 = c * cell, y0 = r * cell;
            geo["features"].push_back(
                {{"type", "Feature"},
                 {"properties", {{"code", code}, {"borough", borough}}},
                 {"geometry",
                  {{"type", "Polygon"},
                   {"coordinates",
                    {{{x0, y0}, {x0 + cell, y0}, {x0 + cell, y0 + cell}, {x0, y0 + cell}, {x0, y0}}}}}}});
        }
    }
    std::ofstream geo_out(dir / "boundaries.geojson", std::ios::binary);
    geo_out << geo.dump(1) << '\n';
    std::cout << "wrote " << (dir / "census.csv").string() << " and " << (dir / "boundaries.geojson").string() << '\n';
    return 0;
}
