#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "prestage/census.hpp"
#include "prestage/geo.hpp"

namespace prestage {

struct SyntheticSpec {
  std::uint64_t seed = 0;
  int num_states = 1;
  int counties_per_state = 1;
  int blocks_per_county = 1;
  std::pair<double, double> density_range{0.0, 1.0e9};
};

namespace detail {

// Deterministic draws independent of the standard library's distribution
// implementations, so identical specs give identical records everywhere.
inline std::int64_t draw_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(rng() % span);
}

inline double draw_real(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
  return lo + u * (hi - lo);
}

struct Rect {
  double x0, x1, y0, y1;

  Rect cell(int col, int row, int cols, int rows, double margin_frac) const {
    const double cw = (x1 - x0) / cols;
    const double ch = (y1 - y0) / rows;
    const double cx = x0 + col * cw;
    const double cy = y0 + row * ch;
    return Rect{cx + margin_frac * cw, cx + (1.0 - margin_frac) * cw,
                cy + margin_frac * ch, cy + (1.0 - margin_frac) * ch};
  }

  BoundingBox bbox() const { return BoundingBox{x0, x1, y0, y1}; }

  PolygonGeometry ring() const {
    return PolygonGeometry::from_rings(
        {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}});
  }

  double area_sq_miles() const {
    constexpr double km_per_degree = kEarthRadiusKm * std::numbers::pi / 180.0;
    constexpr double sq_km_per_sq_mile = 1.609344 * 1.609344;
    const double mid_lat = (y0 + y1) / 2.0;
    const double width_km = (x1 - x0) * km_per_degree * std::cos(radians(mid_lat));
    const double height_km = (y1 - y0) * km_per_degree;
    return std::abs(width_km * height_km) / sq_km_per_sq_mile;
  }
};

inline void grid_shape(int n, int& cols, int& rows) {
  cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  rows = (n + cols - 1) / cols;
}

}  // namespace detail

// Deterministic desk-scale dataset: rectangular blocks tiled inside county
// rectangles tiled inside state rectangles, demographics from a seeded
// generator. Density is population over block area, clamped into the
// requested range.
inline std::vector<BuildRecord> generate_synthetic(const SyntheticSpec& spec) {
  if (spec.num_states < 1 || spec.counties_per_state < 1 || spec.blocks_per_county < 1) {
    throw CapacityError("synthetic spec counts must all be at least 1");
  }
  if (spec.density_range.first < 0.0 ||
      spec.density_range.first > spec.density_range.second) {
    throw CapacityError("synthetic density range must satisfy 0 <= min <= max");
  }
  if (spec.num_states > 99) {
    throw CapacityError("at most 99 states fit the 2-digit state FIPS space");
  }
  if (spec.counties_per_state > 999) {
    throw CapacityError("at most 999 counties per state fit the 3-digit county FIPS space");
  }
  if (spec.blocks_per_county > 9999999) {
    throw CapacityError("at most 9999999 blocks per county fit the 7-digit block FIPS space");
  }

  int state_cols, state_rows, county_cols, county_rows, block_cols, block_rows;
  detail::grid_shape(spec.num_states, state_cols, state_rows);
  detail::grid_shape(spec.counties_per_state, county_cols, county_rows);
  detail::grid_shape(spec.blocks_per_county, block_cols, block_rows);

  // Reject grids whose innermost cells collapse below coordinate resolution.
  {
    const double block_w = 360.0 / state_cols * 0.9 / county_cols * 0.9 / block_cols * 0.8;
    const double block_h = 180.0 / state_rows * 0.9 / county_rows * 0.9 / block_rows * 0.8;
    if (block_w < 1e-7 || block_h < 1e-7) {
      throw CapacityError("requested grid does not fit in the valid lon/lat ranges");
    }
  }

  std::mt19937_64 rng(spec.seed);
  const detail::Rect world{-180.0, 180.0, -90.0, 90.0};
  std::vector<BuildRecord> records;
  records.reserve(static_cast<std::size_t>(spec.num_states) *
                  (1 + spec.counties_per_state * (1 + spec.blocks_per_county)));

  char name_buf[48];
  for (int si = 0; si < spec.num_states; ++si) {
    const int state_fp = si + 1;
    const detail::Rect state_rect =
        world.cell(si % state_cols, si / state_cols, state_cols, state_rows, 0.05);
    StateInput state;
    state.state_fp = state_fp;
    std::snprintf(name_buf, sizeof(name_buf), "State %02d", state_fp);
    state.name = name_buf;
    state.bbox = state_rect.bbox();
    state.geometry = state_rect.ring();
    records.emplace_back(std::move(state));

    for (int ci = 0; ci < spec.counties_per_state; ++ci) {
      const int county_fp = ci + 1;
      const detail::Rect county_rect = state_rect.cell(
          ci % county_cols, ci / county_cols, county_cols, county_rows, 0.05);
      CountyInput county;
      county.state_fp = state_fp;
      county.county_fp = county_fp;
      std::snprintf(name_buf, sizeof(name_buf), "County %03d", county_fp);
      county.name = name_buf;
      county.bbox = county_rect.bbox();
      county.geometry = county_rect.ring();
      records.emplace_back(std::move(county));

      for (int bi = 0; bi < spec.blocks_per_county; ++bi) {
        const detail::Rect block_rect = county_rect.cell(
            bi % block_cols, bi / block_cols, block_cols, block_rows, 0.10);
        BlockInput block;
        block.full_fips = compose_fips(state_fp, county_fp, bi + 1);
        block.bbox = block_rect.bbox();
        block.geometry = block_rect.ring();
        block.demo.population = detail::draw_int(rng, 0, 5000);
        block.demo.under_15 = detail::draw_int(rng, 0, block.demo.population / 3);
        block.demo.over_65 = detail::draw_int(rng, 0, block.demo.population / 3);
        block.demo.median_age = detail::draw_real(rng, 20.0, 60.0);
        const double area = block_rect.area_sq_miles();
        const double raw_density =
            area > 0.0 ? static_cast<double>(block.demo.population) / area
                       : spec.density_range.second;
        block.demo.density =
            std::clamp(raw_density, spec.density_range.first, spec.density_range.second);
        records.emplace_back(std::move(block));
      }
    }
  }
  return records;
}

}  // namespace prestage
