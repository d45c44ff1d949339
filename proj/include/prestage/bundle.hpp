#pragma once

#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "prestage/census.hpp"
#include "prestage/errors.hpp"

namespace prestage {

inline constexpr int kBundleFormatVersion = 1;

namespace detail {

using nlohmann::json;

inline const json& require_field(const json& entity, const char* key,
                                 const std::string& what) {
  const auto it = entity.find(key);
  if (it == entity.end()) {
    throw SchemaError(what + ": missing required field '" + key + "'");
  }
  return *it;
}

inline int require_int(const json& entity, const char* key, const std::string& what) {
  const json& v = require_field(entity, key, what);
  if (!v.is_number_integer()) {
    throw SchemaError(what + ": field '" + key + "' must be an integer");
  }
  return v.get<int>();
}

inline std::string optional_name(const json& entity) {
  const auto it = entity.find("name");
  if (it == entity.end() || it->is_null()) return {};
  if (!it->is_string()) return {};
  return it->get<std::string>();
}

inline std::optional<BoundingBox> parse_bbox(const json& entity, const std::string& what) {
  const auto it = entity.find("bbox");
  if (it == entity.end() || it->is_null()) return std::nullopt;
  if (!it->is_array() || it->size() != 4 || !(*it)[0].is_number()) {
    throw SchemaError(what + ": 'bbox' must be [x_min, x_max, y_min, y_max]");
  }
  return BoundingBox{(*it)[0].get<double>(), (*it)[1].get<double>(),
                     (*it)[2].get<double>(), (*it)[3].get<double>()};
}

inline PolygonGeometry parse_rings(const json& entity, const std::string& what) {
  const json& rings_json = require_field(entity, "rings", what);
  if (!rings_json.is_array()) {
    throw SchemaError(what + ": 'rings' must be an array of rings");
  }
  std::vector<Ring> rings;
  rings.reserve(rings_json.size());
  for (const json& ring_json : rings_json) {
    if (!ring_json.is_array()) {
      throw SchemaError(what + ": each ring must be an array of [lon, lat] pairs");
    }
    Ring ring;
    ring.reserve(ring_json.size());
    for (const json& vertex : ring_json) {
      if (!vertex.is_array() || vertex.size() != 2 || !vertex[0].is_number() ||
          !vertex[1].is_number()) {
        throw SchemaError(what + ": each vertex must be a [lon, lat] pair");
      }
      ring.push_back({vertex[0].get<double>(), vertex[1].get<double>()});
    }
    rings.push_back(std::move(ring));
  }
  return PolygonGeometry::from_rings(rings);
}

inline Demographics parse_demographics(const json& entity, const std::string& what) {
  const json& d = require_field(entity, "demographics", what);
  if (!d.is_object()) {
    throw SchemaError(what + ": 'demographics' must be an object");
  }
  Demographics demo;
  demo.population = require_field(d, "population", what).get<std::int64_t>();
  demo.median_age = require_field(d, "median_age", what).get<double>();
  demo.under_15 = require_field(d, "under_15", what).get<std::int64_t>();
  demo.over_65 = require_field(d, "over_65", what).get<std::int64_t>();
  demo.density = require_field(d, "density", what).get<double>();
  return demo;
}

inline json bbox_to_json(const BoundingBox& b) {
  return json::array({b.x_min, b.x_max, b.y_min, b.y_max});
}

inline json rings_to_json(const PolygonGeometry& g) {
  json rings = json::array();
  for (const Ring& ring : g.to_rings()) {
    json ring_json = json::array();
    for (const LonLat& v : ring) {
      ring_json.push_back(json::array({v[0], v[1]}));
    }
    rings.push_back(std::move(ring_json));
  }
  return rings;
}

}  // namespace detail

// Parses the versioned JSON boundary bundle into build records. Unknown
// fields are ignored; entity order in the file is preserved.
inline std::vector<BuildRecord> parse_bundle(std::string_view bytes) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw SyntaxError("bundle is not valid JSON at byte " + std::to_string(e.byte) +
                          ": " + e.what(),
                      e.byte);
  }
  if (!doc.is_object()) throw SchemaError("bundle root must be a JSON object");

  const auto version_it = doc.find("format_version");
  if (version_it == doc.end() || !version_it->is_number_integer()) {
    throw SchemaError("bundle: missing integer 'format_version'");
  }
  if (version_it->get<int>() != kBundleFormatVersion) {
    throw VersionError("unsupported bundle format_version " +
                       std::to_string(version_it->get<int>()));
  }
  const auto entities_it = doc.find("entities");
  if (entities_it == doc.end() || !entities_it->is_array()) {
    throw SchemaError("bundle: missing 'entities' array");
  }

  std::vector<BuildRecord> records;
  records.reserve(entities_it->size());
  std::set<int> state_fps;
  std::set<std::pair<int, int>> county_fps;

  std::size_t ordinal = 0;
  for (const json& entity : *entities_it) {
    const std::string fallback = "entity #" + std::to_string(ordinal);
    ++ordinal;
    if (!entity.is_object()) throw SchemaError(fallback + ": must be an object");
    const auto kind_it = entity.find("kind");
    if (kind_it == entity.end() || !kind_it->is_string()) {
      throw SchemaError(fallback + ": missing 'kind'");
    }
    const std::string kind = kind_it->get<std::string>();

    if (kind == "state") {
      const int state_fp = detail::require_int(entity, "state_fp", fallback + " (state)");
      const std::string what = "state " + std::to_string(state_fp);
      StateInput state;
      state.state_fp = state_fp;
      state.name = detail::optional_name(entity);
      state.bbox = detail::parse_bbox(entity, what);
      state.geometry = detail::parse_rings(entity, what);
      state_fps.insert(state_fp);
      records.emplace_back(std::move(state));
    } else if (kind == "county") {
      const int state_fp = detail::require_int(entity, "state_fp", fallback + " (county)");
      const int county_fp = detail::require_int(entity, "county_fp", fallback + " (county)");
      const std::string what = "county " + county_geoid(state_fp, county_fp);
      CountyInput county;
      county.state_fp = state_fp;
      county.county_fp = county_fp;
      county.name = detail::optional_name(entity);
      county.bbox = detail::parse_bbox(entity, what);
      county.geometry = detail::parse_rings(entity, what);
      county_fps.insert({state_fp, county_fp});
      records.emplace_back(std::move(county));
    } else if (kind == "block") {
      const int state_fp = detail::require_int(entity, "state_fp", fallback + " (block)");
      const int county_fp = detail::require_int(entity, "county_fp", fallback + " (block)");
      const std::int64_t block_fp =
          detail::require_field(entity, "block_fp", fallback + " (block)")
              .get<std::int64_t>();
      BlockInput block;
      block.full_fips = compose_fips(state_fp, county_fp, block_fp);
      const std::string what = "block " + block.full_fips;
      block.bbox = detail::parse_bbox(entity, what);
      block.geometry = detail::parse_rings(entity, what);
      block.demo = detail::parse_demographics(entity, what);
      records.emplace_back(std::move(block));
    } else {
      throw SchemaError(fallback + ": unknown kind '" + kind + "'");
    }
  }

  // Referential completeness; build_index re-checks, but a bundle must be
  // self-contained regardless of how the records are consumed.
  for (const auto& [state_fp, county_fp] : county_fps) {
    if (!state_fps.count(state_fp)) {
      throw DanglingReference("county " + county_geoid(state_fp, county_fp) +
                              " references state " + std::to_string(state_fp) +
                              " which is not in the bundle");
    }
  }
  for (const BuildRecord& record : records) {
    if (const auto* block = std::get_if<BlockInput>(&record)) {
      const FipsParts p = split_fips(block->full_fips);
      if (!county_fps.count({p.state_fp, p.county_fp})) {
        throw DanglingReference("block " + block->full_fips +
                                " references county " +
                                county_geoid(p.state_fp, p.county_fp) +
                                " which is not in the bundle");
      }
    }
  }
  return records;
}

// Canonical serialization: sorted object keys, ascending-FIPS entity order,
// shortest round-trip float rendering. Two calls on equal indices produce
// byte-identical output.
inline std::string serialize_bundle(const CountryIndex& index) {
  using nlohmann::json;
  json entities = json::array();
  for (const StateNode& state : index.states) {
    json s;
    s["kind"] = "state";
    s["state_fp"] = state.state_fp;
    if (!state.name.empty()) s["name"] = state.name;
    s["bbox"] = detail::bbox_to_json(state.bbox);
    s["rings"] = detail::rings_to_json(state.geometry);
    entities.push_back(std::move(s));
    for (const CountyNode& county : state.counties) {
      json c;
      c["kind"] = "county";
      c["state_fp"] = state.state_fp;
      c["county_fp"] = county.county_fp;
      if (!county.name.empty()) c["name"] = county.name;
      c["bbox"] = detail::bbox_to_json(county.bbox);
      c["rings"] = detail::rings_to_json(county.geometry);
      entities.push_back(std::move(c));
      for (const BlockRecord& block : county.blocks) {
        json b;
        b["kind"] = "block";
        b["state_fp"] = state.state_fp;
        b["county_fp"] = county.county_fp;
        b["block_fp"] = block.block_fp;
        b["bbox"] = detail::bbox_to_json(block.bbox);
        b["rings"] = detail::rings_to_json(block.geometry);
        b["demographics"] = {{"population", block.demo.population},
                             {"median_age", block.demo.median_age},
                             {"under_15", block.demo.under_15},
                             {"over_65", block.demo.over_65},
                             {"density", block.demo.density}};
        entities.push_back(std::move(b));
      }
    }
  }
  json doc;
  doc["format_version"] = kBundleFormatVersion;
  doc["entities"] = std::move(entities);
  return doc.dump();
}

}  // namespace prestage
