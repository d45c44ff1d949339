#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "prestage/census.hpp"

namespace prestage {

// IUGG mean Earth radius.
inline constexpr double kEarthRadiusKm = 6371.0088;

struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;
  bool operator==(const GeoPoint&) const = default;
};

struct RadiusQuery {
  GeoPoint center;
  double radius_km = 0.0;
};

inline double radians(double degrees) {
  return degrees * (std::numbers::pi / 180.0);
}

inline GeoPoint bbox_center(const BoundingBox& b) {
  return GeoPoint{(b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0};
}

// Great-circle distance on the mean-radius sphere. The operation order
// mirrors the spreadsheet expansion emitted by build_workbook so that both
// paths agree bit for bit, including the MIN guard against rounding pushing
// the haversine term past 1 for near-antipodal points.
inline double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  const double sin_dlat = std::sin(radians(b.lat - a.lat) / 2.0);
  const double sin_dlon = std::sin(radians(b.lon - a.lon) / 2.0);
  const double h = sin_dlat * sin_dlat +
                   std::cos(radians(a.lat)) * std::cos(radians(b.lat)) *
                       (sin_dlon * sin_dlon);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

// Membership is bbox-center within the radius; output keeps ascending FIPS.
inline std::vector<const BlockRecord*> blocks_within_radius(const CountyNode& county,
                                                            const RadiusQuery& q) {
  std::vector<const BlockRecord*> hits;
  for (const BlockRecord& block : county.blocks) {
    if (haversine_km(bbox_center(block.bbox), q.center) <= q.radius_km) {
      hits.push_back(&block);
    }
  }
  return hits;
}

struct DemographicsSummary {
  std::int64_t population = 0;
  std::int64_t under_15 = 0;
  std::int64_t over_65 = 0;
  double mean_density = 0.0;      // population weighted
  double mean_median_age = 0.0;   // unweighted mean of block medians
};

inline DemographicsSummary aggregate_demographics(
    const std::vector<const BlockRecord*>& blocks) {
  DemographicsSummary sum;
  double weighted_density = 0.0;
  double age_total = 0.0;
  for (const BlockRecord* block : blocks) {
    sum.population += block->demo.population;
    sum.under_15 += block->demo.under_15;
    sum.over_65 += block->demo.over_65;
    weighted_density += static_cast<double>(block->demo.population) * block->demo.density;
    age_total += block->demo.median_age;
  }
  if (sum.population > 0) {
    sum.mean_density = weighted_density / static_cast<double>(sum.population);
  }
  if (!blocks.empty()) {
    sum.mean_median_age = age_total / static_cast<double>(blocks.size());
  }
  return sum;
}

}  // namespace prestage
