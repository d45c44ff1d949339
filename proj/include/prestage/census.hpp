#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "prestage/errors.hpp"

namespace prestage {

// Containment tolerance absorbing coordinate rounding in 4-decimal published
// boundary data (~0.1 m).
inline constexpr double kContainTolDeg = 1e-6;

struct BoundingBox {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  bool operator==(const BoundingBox&) const = default;

  bool valid() const {
    return x_min <= x_max && y_min <= y_max && x_min >= -180.0 && x_max <= 180.0 &&
           y_min >= -90.0 && y_max <= 90.0;
  }

  bool contains(double lon, double lat, double tol = kContainTolDeg) const {
    return lon >= x_min - tol && lon <= x_max + tol && lat >= y_min - tol &&
           lat <= y_max + tol;
  }

  bool contains(const BoundingBox& inner, double tol = kContainTolDeg) const {
    return inner.x_min >= x_min - tol && inner.x_max <= x_max + tol &&
           inner.y_min >= y_min - tol && inner.y_max <= y_max + tol;
  }
};

using LonLat = std::array<double, 2>;
using Ring = std::vector<LonLat>;

// Flat per-entity vertex arrays; multipart polygons keep a NaN break marker
// between rings, mirroring the flat arrays of the source data. Serialized
// forms always use ring lists, never the marker.
struct PolygonGeometry {
  std::vector<double> x;
  std::vector<double> y;

  static constexpr double break_marker() {
    return std::numeric_limits<double>::quiet_NaN();
  }
  static bool is_break(double v) { return std::isnan(v); }

  bool empty() const { return x.empty(); }

  static PolygonGeometry from_rings(const std::vector<Ring>& rings) {
    PolygonGeometry g;
    for (const Ring& ring : rings) {
      if (!g.x.empty()) {
        g.x.push_back(break_marker());
        g.y.push_back(break_marker());
      }
      for (const LonLat& v : ring) {
        g.x.push_back(v[0]);
        g.y.push_back(v[1]);
      }
    }
    return g;
  }

  std::vector<Ring> to_rings() const {
    std::vector<Ring> rings;
    Ring current;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (is_break(x[i])) {
        rings.push_back(std::move(current));
        current.clear();
      } else {
        current.push_back({x[i], y[i]});
      }
    }
    if (!current.empty()) rings.push_back(std::move(current));
    return rings;
  }

  std::size_t ring_count() const {
    if (x.empty()) return 0;
    std::size_t n = 1;
    for (double v : x) {
      if (is_break(v)) ++n;
    }
    return n;
  }

  // Break markers compare equal to each other; everything else exactly.
  bool operator==(const PolygonGeometry& o) const {
    if (x.size() != o.x.size() || y.size() != o.y.size()) return false;
    auto same = [](double a, double b) {
      return (is_break(a) && is_break(b)) || a == b;
    };
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!same(x[i], o.x[i]) || !same(y[i], o.y[i])) return false;
    }
    return true;
  }
};

struct Demographics {
  std::int64_t population = 0;
  double median_age = 0.0;
  std::int64_t under_15 = 0;
  std::int64_t over_65 = 0;
  double density = 0.0;  // persons per square mile

  bool operator==(const Demographics&) const = default;

  bool valid() const {
    return population >= 0 && under_15 >= 0 && over_65 >= 0 &&
           under_15 + over_65 <= population && median_age >= 0.0 && density >= 0.0;
  }
};

struct BlockRecord {
  std::int64_t block_fp = 0;   // 7-digit suffix
  std::string full_fips;       // 12 decimal digits
  BoundingBox bbox;
  PolygonGeometry geometry;
  Demographics demo;

  bool operator==(const BlockRecord&) const = default;
};

struct CountyNode {
  int county_fp = 0;
  std::string name;
  BoundingBox bbox;
  PolygonGeometry geometry;
  std::vector<BlockRecord> blocks;  // ascending full_fips

  bool operator==(const CountyNode&) const = default;
};

struct StateNode {
  int state_fp = 0;
  std::string name;
  BoundingBox bbox;
  PolygonGeometry geometry;
  std::vector<CountyNode> counties;  // ascending county_fp

  bool operator==(const StateNode&) const = default;
};

struct DensityBounds {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const DensityBounds&) const = default;
};

// Immutable after build_index; safe for concurrent readers.
struct CountryIndex {
  std::vector<StateNode> states;  // ascending state_fp
  DensityBounds density_bounds_absolute;

  bool operator==(const CountryIndex&) const = default;
};

// --- FIPS handling: 2-digit state + 3-digit county + 7-digit block suffix ---

struct FipsParts {
  int state_fp = 0;
  int county_fp = 0;
  std::int64_t block_fp = 0;
};

inline FipsParts split_fips(std::string_view full_fips) {
  if (full_fips.size() != 12) {
    throw MalformedFips("FIPS '" + std::string(full_fips) + "' must have 12 digits");
  }
  for (char c : full_fips) {
    if (c < '0' || c > '9') {
      throw MalformedFips("FIPS '" + std::string(full_fips) +
                          "' contains a non-digit character");
    }
  }
  FipsParts p;
  std::from_chars(full_fips.data(), full_fips.data() + 2, p.state_fp);
  std::from_chars(full_fips.data() + 2, full_fips.data() + 5, p.county_fp);
  std::from_chars(full_fips.data() + 5, full_fips.data() + 12, p.block_fp);
  return p;
}

inline std::string compose_fips(int state_fp, int county_fp, std::int64_t block_fp) {
  if (state_fp < 0 || state_fp > 99 || county_fp < 0 || county_fp > 999 ||
      block_fp < 0 || block_fp > 9999999) {
    throw MalformedFips("FIPS components out of range: state " +
                        std::to_string(state_fp) + ", county " +
                        std::to_string(county_fp) + ", block " +
                        std::to_string(block_fp));
  }
  char buf[13];
  std::snprintf(buf, sizeof(buf), "%02d%03d%07lld", state_fp, county_fp,
                static_cast<long long>(block_fp));
  return std::string(buf, 12);
}

inline std::string county_geoid(int state_fp, int county_fp) {
  char buf[6];
  std::snprintf(buf, sizeof(buf), "%02d%03d", state_fp, county_fp);
  return std::string(buf, 5);
}

// --- build records -----------------------------------------------------------

struct StateInput {
  int state_fp = 0;
  std::string name;
  std::optional<BoundingBox> bbox;
  PolygonGeometry geometry;
  bool operator==(const StateInput&) const = default;
};

struct CountyInput {
  int state_fp = 0;
  int county_fp = 0;
  std::string name;
  std::optional<BoundingBox> bbox;
  PolygonGeometry geometry;
  bool operator==(const CountyInput&) const = default;
};

struct BlockInput {
  std::string full_fips;
  std::optional<BoundingBox> bbox;
  PolygonGeometry geometry;
  Demographics demo;
  bool operator==(const BlockInput&) const = default;
};

using BuildRecord = std::variant<StateInput, CountyInput, BlockInput>;

namespace detail {

inline BoundingBox envelope(const PolygonGeometry& geometry, const std::string& what) {
  BoundingBox b{std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity()};
  bool any = false;
  for (std::size_t i = 0; i < geometry.x.size(); ++i) {
    if (PolygonGeometry::is_break(geometry.x[i])) continue;
    any = true;
    b.x_min = std::min(b.x_min, geometry.x[i]);
    b.x_max = std::max(b.x_max, geometry.x[i]);
    b.y_min = std::min(b.y_min, geometry.y[i]);
    b.y_max = std::max(b.y_max, geometry.y[i]);
  }
  if (!any) {
    throw GeometryOutOfBbox(what + ": no bounding box given and no vertices to derive one");
  }
  return b;
}

// Declared boxes win; vertices are then validated against them.
inline BoundingBox resolve_bbox(const std::optional<BoundingBox>& declared,
                                const PolygonGeometry& geometry,
                                const std::string& what) {
  BoundingBox box = declared ? *declared : envelope(geometry, what);
  if (!box.valid()) {
    throw GeometryOutOfBbox(what + ": bounding box is not a valid lon/lat box");
  }
  if (declared) {
    for (std::size_t i = 0; i < geometry.x.size(); ++i) {
      if (PolygonGeometry::is_break(geometry.x[i])) continue;
      if (!box.contains(geometry.x[i], geometry.y[i])) {
        throw GeometryOutOfBbox(what + ": vertex (" + std::to_string(geometry.x[i]) +
                                ", " + std::to_string(geometry.y[i]) +
                                ") lies outside the declared bounding box");
      }
    }
  }
  return box;
}

}  // namespace detail

inline CountryIndex build_index(const std::vector<BuildRecord>& records) {
  if (records.empty()) throw EmptyInput("build_index: no records");

  std::map<int, const StateInput*> states;
  std::map<std::pair<int, int>, const CountyInput*> counties;
  std::map<std::string, const BlockInput*> blocks;  // ordered by full FIPS

  for (const BuildRecord& record : records) {
    if (const auto* s = std::get_if<StateInput>(&record)) {
      if (s->state_fp < 0 || s->state_fp > 99) {
        throw MalformedFips("state FIPS " + std::to_string(s->state_fp) +
                            " out of range");
      }
      if (!states.emplace(s->state_fp, s).second) {
        throw DuplicateFips("state " + std::to_string(s->state_fp) + " declared twice");
      }
    } else if (const auto* c = std::get_if<CountyInput>(&record)) {
      if (c->state_fp < 0 || c->state_fp > 99 || c->county_fp < 0 || c->county_fp > 999) {
        throw MalformedFips("county FIPS " + county_geoid(c->state_fp, c->county_fp) +
                            " out of range");
      }
      if (!counties.emplace(std::make_pair(c->state_fp, c->county_fp), c).second) {
        throw DuplicateFips("county " + county_geoid(c->state_fp, c->county_fp) +
                            " declared twice");
      }
    } else {
      const auto* b = std::get_if<BlockInput>(&record);
      split_fips(b->full_fips);  // throws MalformedFips
      if (!blocks.emplace(b->full_fips, b).second) {
        throw DuplicateFips("block " + b->full_fips + " declared twice");
      }
    }
  }

  for (const auto& [key, county] : counties) {
    if (!states.count(key.first)) {
      throw DanglingReference("county " + county_geoid(county->state_fp, county->county_fp) +
                              " has no state entity");
    }
  }
  for (const auto& [fips, block] : blocks) {
    (void)block;
    const FipsParts p = split_fips(fips);
    if (!counties.count({p.state_fp, p.county_fp})) {
      throw DanglingReference("block " + fips + " has no county entity");
    }
  }

  CountryIndex index;
  index.states.reserve(states.size());
  bool any_block = false;
  DensityBounds bounds{std::numeric_limits<double>::infinity(),
                       -std::numeric_limits<double>::infinity()};

  for (const auto& [state_fp, state_in] : states) {
    StateNode state;
    state.state_fp = state_fp;
    state.name = state_in->name;
    state.geometry = state_in->geometry;
    state.bbox = detail::resolve_bbox(state_in->bbox, state_in->geometry,
                                      "state " + std::to_string(state_fp));

    const auto county_begin = counties.lower_bound({state_fp, 0});
    const auto county_end = counties.lower_bound({state_fp + 1, 0});
    for (auto it = county_begin; it != county_end; ++it) {
      const CountyInput* county_in = it->second;
      CountyNode county;
      county.county_fp = county_in->county_fp;
      county.name = county_in->name;
      county.geometry = county_in->geometry;
      const std::string county_what = "county " + county_geoid(state_fp, county.county_fp);
      county.bbox = detail::resolve_bbox(county_in->bbox, county_in->geometry, county_what);
      if (!state.bbox.contains(county.bbox)) {
        throw GeometryOutOfBbox(county_what + ": bounding box extends outside its state");
      }

      const std::string prefix = county_geoid(state_fp, county.county_fp);
      for (auto bit = blocks.lower_bound(prefix); bit != blocks.end(); ++bit) {
        if (bit->first.compare(0, 5, prefix) != 0) break;
        const BlockInput* block_in = bit->second;
        BlockRecord block;
        block.full_fips = block_in->full_fips;
        block.block_fp = split_fips(block.full_fips).block_fp;
        block.geometry = block_in->geometry;
        block.demo = block_in->demo;
        const std::string block_what = "block " + block.full_fips;
        if (!block.demo.valid()) {
          throw Error(block_what + ": demographics violate invariants");
        }
        block.bbox = detail::resolve_bbox(block_in->bbox, block_in->geometry, block_what);
        if (!county.bbox.contains(block.bbox)) {
          throw GeometryOutOfBbox(block_what + ": bounding box extends outside its county");
        }
        bounds.min = std::min(bounds.min, block.demo.density);
        bounds.max = std::max(bounds.max, block.demo.density);
        any_block = true;
        county.blocks.push_back(std::move(block));
      }
      state.counties.push_back(std::move(county));
    }
    index.states.push_back(std::move(state));
  }

  index.density_bounds_absolute = any_block ? bounds : DensityBounds{0.0, 0.0};
  return index;
}

// FIPS-prefix descent: state, then county, then block, each by binary search.
inline const BlockRecord* lookup_block(const CountryIndex& index,
                                       std::string_view full_fips) {
  const FipsParts parts = split_fips(full_fips);

  const auto state_it =
      std::lower_bound(index.states.begin(), index.states.end(), parts.state_fp,
                       [](const StateNode& s, int fp) { return s.state_fp < fp; });
  if (state_it == index.states.end() || state_it->state_fp != parts.state_fp) {
    return nullptr;
  }

  const auto county_it =
      std::lower_bound(state_it->counties.begin(), state_it->counties.end(),
                       parts.county_fp,
                       [](const CountyNode& c, int fp) { return c.county_fp < fp; });
  if (county_it == state_it->counties.end() || county_it->county_fp != parts.county_fp) {
    return nullptr;
  }

  const auto block_it = std::lower_bound(
      county_it->blocks.begin(), county_it->blocks.end(), full_fips,
      [](const BlockRecord& b, std::string_view f) { return b.full_fips < f; });
  if (block_it == county_it->blocks.end() || block_it->full_fips != full_fips) {
    return nullptr;
  }
  return &*block_it;
}

struct EntityCounts {
  std::size_t states = 0;
  std::size_t counties = 0;
  std::size_t blocks = 0;
  bool operator==(const EntityCounts&) const = default;
};

inline EntityCounts entity_counts(const CountryIndex& index) {
  EntityCounts counts;
  counts.states = index.states.size();
  for (const StateNode& state : index.states) {
    counts.counties += state.counties.size();
    for (const CountyNode& county : state.counties) {
      counts.blocks += county.blocks.size();
    }
  }
  return counts;
}

}  // namespace prestage
