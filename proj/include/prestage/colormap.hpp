#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "prestage/census.hpp"
#include "prestage/errors.hpp"

namespace prestage {

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
  bool operator==(const Rgb&) const = default;
};

enum class ColorScheme { red_blue, green_red, green_red_dull, jet };
enum class NormalizationMode { relative, absolute };

inline constexpr ColorScheme kAllSchemes[] = {
    ColorScheme::red_blue, ColorScheme::green_red, ColorScheme::green_red_dull,
    ColorScheme::jet};
inline constexpr NormalizationMode kAllModes[] = {NormalizationMode::relative,
                                                  NormalizationMode::absolute};

inline std::string_view scheme_name(ColorScheme s) {
  switch (s) {
    case ColorScheme::red_blue: return "redblue";
    case ColorScheme::green_red: return "greenred";
    case ColorScheme::green_red_dull: return "greenreddull";
    case ColorScheme::jet: return "jet";
  }
  return "jet";
}

inline std::string_view mode_name(NormalizationMode m) {
  return m == NormalizationMode::relative ? "relative" : "absolute";
}

// Densities span several orders of magnitude, so the scale works on
// log10(1 + d) rather than raw persons per square mile.
inline double density_transform(double density) { return std::log10(1.0 + density); }

struct DensityScale {
  double lo = 0.0;  // transformed bounds
  double hi = 0.0;
  NormalizationMode mode = NormalizationMode::relative;
  std::string scope_id;  // county GEOID, or "US" for absolute scales
};

inline DensityScale density_scale(const CountryIndex& index, const CountyNode& county,
                                  NormalizationMode mode) {
  DensityScale scale;
  scale.mode = mode;
  if (mode == NormalizationMode::absolute) {
    scale.lo = density_transform(index.density_bounds_absolute.min);
    scale.hi = density_transform(index.density_bounds_absolute.max);
    scale.scope_id = "US";
    return scale;
  }
  bool first = true;
  for (const BlockRecord& block : county.blocks) {
    const double t = density_transform(block.demo.density);
    if (first) {
      scale.lo = scale.hi = t;
      first = false;
    } else {
      scale.lo = std::min(scale.lo, t);
      scale.hi = std::max(scale.hi, t);
    }
  }
  int state_fp = 0;
  for (const StateNode& state : index.states) {
    for (const CountyNode& c : state.counties) {
      if (&c == &county) {
        state_fp = state.state_fp;
        break;
      }
    }
  }
  scale.scope_id = county_geoid(state_fp, county.county_fp);
  return scale;
}

// Degenerate scales map everything to mid-scale.
inline double normalize_density(double density, const DensityScale& scale) {
  if (scale.lo >= scale.hi) return 0.5;
  const double t = density_transform(density);
  return std::clamp((t - scale.lo) / (scale.hi - scale.lo), 0.0, 1.0);
}

namespace detail {
inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }
}

inline Rgb map_color(ColorScheme scheme, double u, double dull_blend = 0.5) {
  if (u < -1e-12 || u > 1.0 + 1e-12) {
    throw DomainError("color position " + std::to_string(u) + " outside [0, 1]");
  }
  u = detail::clamp01(u);
  switch (scheme) {
    case ColorScheme::red_blue:
      return Rgb{u, 0.0, 1.0 - u};
    case ColorScheme::green_red:
      return Rgb{u, 1.0 - u, 0.0};
    case ColorScheme::green_red_dull: {
      const Rgb base{u, 1.0 - u, 0.0};
      const double keep = 1.0 - dull_blend;
      return Rgb{base.r * keep + 0.5 * dull_blend, base.g * keep + 0.5 * dull_blend,
                 base.b * keep + 0.5 * dull_blend};
    }
    case ColorScheme::jet:
      return Rgb{detail::clamp01(1.5 - std::abs(4.0 * u - 3.0)),
                 detail::clamp01(1.5 - std::abs(4.0 * u - 2.0)),
                 detail::clamp01(1.5 - std::abs(4.0 * u - 1.0))};
  }
  return Rgb{};
}

// KML channel order: alpha, blue, green, red; lowercase hex.
inline std::string rgb_to_kml_hex(const Rgb& c, std::uint8_t alpha) {
  auto channel = [](double v) {
    return static_cast<unsigned>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  };
  static constexpr char digits[] = "0123456789abcdef";
  const unsigned bytes[4] = {alpha, channel(c.b), channel(c.g), channel(c.r)};
  std::string hex(8, '0');
  for (int i = 0; i < 4; ++i) {
    hex[2 * i] = digits[(bytes[i] >> 4) & 0xF];
    hex[2 * i + 1] = digits[bytes[i] & 0xF];
  }
  return hex;
}

}  // namespace prestage
