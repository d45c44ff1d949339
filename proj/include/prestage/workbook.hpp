#pragma once

#include <cmath>
#include <string>

#include "prestage/census.hpp"
#include "prestage/errors.hpp"
#include "prestage/formula.hpp"
#include "prestage/geo.hpp"
#include "prestage/workbook_model.hpp"

namespace prestage {

enum class Hemisphere { north, south, east, west };
enum class Axis { latitude, longitude };

struct DmsInput {
  int degrees = 0;  // non-negative; sign carried by the hemisphere
  int minutes = 0;
  double seconds = 0.0;
  Hemisphere hemisphere = Hemisphere::north;
  bool operator==(const DmsInput&) const = default;
};

// DM input is the same with seconds left at 0. Arithmetic order matches the
// conversion formulas emitted into the workbook header.
inline double dms_to_decimal(const DmsInput& d) {
  if (d.degrees < 0) throw RangeError("DMS degrees must be non-negative");
  if (d.minutes < 0 || d.minutes >= 60) throw RangeError("DMS minutes out of [0, 60)");
  if (!(d.seconds >= 0.0) || d.seconds >= 60.0) {
    throw RangeError("DMS seconds out of [0, 60)");
  }
  const double sign =
      (d.hemisphere == Hemisphere::south || d.hemisphere == Hemisphere::west) ? -1.0
                                                                              : 1.0;
  return sign * (d.degrees + d.minutes / 60.0 + d.seconds / 3600.0);
}

inline DmsInput decimal_to_dms(double value, Axis axis) {
  const double limit = axis == Axis::latitude ? 90.0 : 180.0;
  if (!std::isfinite(value) || value < -limit || value > limit) {
    throw RangeError("decimal degrees out of axis range");
  }
  DmsInput out;
  // Zero maps to the positive hemisphere by convention.
  if (value < 0.0) {
    out.hemisphere = axis == Axis::latitude ? Hemisphere::south : Hemisphere::west;
  } else {
    out.hemisphere = axis == Axis::latitude ? Hemisphere::north : Hemisphere::east;
  }
  const double magnitude = std::abs(value);
  out.degrees = static_cast<int>(std::floor(magnitude));
  double remainder = (magnitude - out.degrees) * 60.0;
  out.minutes = static_cast<int>(std::floor(remainder));
  out.seconds = (remainder - out.minutes) * 60.0;
  if (out.seconds >= 60.0) {
    out.seconds -= 60.0;
    ++out.minutes;
  }
  if (out.minutes >= 60) {
    out.minutes -= 60;
    ++out.degrees;
  }
  return out;
}

// Fixed cell positions of the workbook layout, shared with tests.
namespace wb_layout {
inline constexpr int kLonDmsRow = 2;       // B..E inputs, F formula
inline constexpr int kLatDmsRow = 3;
inline constexpr int kDecimalCol = 6;      // F
inline constexpr int kCenterLonCell[2] = {5, 2};   // B5
inline constexpr int kCenterLatCell[2] = {5, 4};   // D5
inline constexpr int kRadiusCell[2] = {6, 2};      // B6
inline constexpr int kCaseRateCell[2] = {6, 4};    // D6
inline constexpr int kPopulationSumCell[2] = {7, 2};  // B7
inline constexpr int kUnder15SumCell[2] = {7, 4};     // D7
inline constexpr int kOver65SumCell[2] = {7, 6};      // F7
inline constexpr int kHeaderRow = 9;
inline constexpr int kFirstDataRow = 10;
// data table columns
inline constexpr int kGeoidCol = 1;
inline constexpr int kLonCol = 2;
inline constexpr int kLatCol = 3;
inline constexpr int kPopCol = 4;
inline constexpr int kDensityCol = 5;
inline constexpr int kUnder15Col = 6;
inline constexpr int kOver65Col = 7;
inline constexpr int kMedianAgeCol = 8;
inline constexpr int kDistanceCol = 9;
inline constexpr int kInRadiusCol = 10;
inline constexpr int kCasesCol = 11;
}  // namespace wb_layout

namespace detail {

inline std::string sheet_name_for(const std::string& county_name) {
  std::string name = county_name.empty() ? "Blocks" : county_name;
  for (char& c : name) {
    if (c == ':' || c == '\\' || c == '/' || c == '?' || c == '*' || c == '[' ||
        c == ']') {
      c = '_';
    }
  }
  if (name.size() > 31) name.resize(31);
  return name;
}

// 2*R*ASIN(MIN(1,SQRT(sin^2(dlat/2) + cos(lat1)cos(lat2)sin^2(dlon/2)))) with
// the query center in $B$5/$D$5; mirrors haversine_km term for term.
inline std::string distance_formula(int row) {
  const std::string lon = cell_ref(row, wb_layout::kLonCol);
  const std::string lat = cell_ref(row, wb_layout::kLatCol);
  std::string f = "2*6371.0088*ASIN(MIN(1,SQRT(SIN(RADIANS(";
  f += lat;
  f += "-$D$5)/2)^2+COS(RADIANS($D$5))*COS(RADIANS(";
  f += lat;
  f += "))*SIN(RADIANS(";
  f += lon;
  f += "-$B$5)/2)^2)))";
  return f;
}

}  // namespace detail

// Lays out the per-county workbook: DMS/DM conversion header, radius query
// block, and the block data table. Formula cached values are evaluated and
// embedded so viewers that skip recalculation still show correct numbers.
inline WorkbookModel build_workbook(const CountyNode& county, double case_rate = 0.0) {
  namespace L = wb_layout;
  if (county.blocks.empty()) {
    throw EmptyCounty("county " + county.name + " has no blocks to tabulate");
  }
  if (case_rate < 0.0 || case_rate > 1.0) {
    throw RangeError("case rate must lie in [0, 1]");
  }
  const bool with_cases = case_rate > 0.0;

  WorkbookModel wb;
  wb.sheet_name = detail::sheet_name_for(county.name);

  // Conversion header (rows 1-4). DM input reuses the rows with seconds 0.
  wb.set(1, 1, Cell::make_text("Convert"));
  wb.set(1, 2, Cell::make_text("Degrees"));
  wb.set(1, 3, Cell::make_text("Minutes"));
  wb.set(1, 4, Cell::make_text("Seconds"));
  wb.set(1, 5, Cell::make_text("Hemisphere"));
  wb.set(1, 6, Cell::make_text("Decimal Degrees"));
  wb.set(L::kLonDmsRow, 1, Cell::make_text("Longitude (DMS/DM)"));
  wb.set(L::kLonDmsRow, 2, Cell::make_number(0.0));
  wb.set(L::kLonDmsRow, 3, Cell::make_number(0.0));
  wb.set(L::kLonDmsRow, 4, Cell::make_number(0.0));
  wb.set(L::kLonDmsRow, 5, Cell::make_text("E"));
  wb.set(L::kLonDmsRow, 6, Cell::make_formula("IF(E2=\"W\",-1,1)*(B2+C2/60+D2/3600)"));
  wb.set(L::kLatDmsRow, 1, Cell::make_text("Latitude (DMS/DM)"));
  wb.set(L::kLatDmsRow, 2, Cell::make_number(0.0));
  wb.set(L::kLatDmsRow, 3, Cell::make_number(0.0));
  wb.set(L::kLatDmsRow, 4, Cell::make_number(0.0));
  wb.set(L::kLatDmsRow, 5, Cell::make_text("N"));
  wb.set(L::kLatDmsRow, 6, Cell::make_formula("IF(E3=\"S\",-1,1)*(B3+C3/60+D3/3600)"));
  wb.set(4, 1, Cell::make_text("For DM input leave Seconds at 0"));

  // Radius query block (rows 5-7); defaults center on the county itself.
  const GeoPoint county_center = bbox_center(county.bbox);
  const int last_row = L::kFirstDataRow + static_cast<int>(county.blocks.size()) - 1;
  const std::string first = std::to_string(L::kFirstDataRow);
  const std::string last = std::to_string(last_row);
  wb.set(5, 1, Cell::make_text("Center Longitude"));
  wb.set(5, 2, Cell::make_number(county_center.lon));
  wb.set(5, 3, Cell::make_text("Center Latitude"));
  wb.set(5, 4, Cell::make_number(county_center.lat));
  wb.set(6, 1, Cell::make_text("Radius (km)"));
  wb.set(6, 2, Cell::make_number(0.0));
  if (with_cases) {
    wb.set(6, 3, Cell::make_text("Case Rate"));
    wb.set(6, 4, Cell::make_number(case_rate));
  }
  wb.set(7, 1, Cell::make_text("Population in Radius"));
  wb.set(7, 2, Cell::make_formula("SUMPRODUCT(J" + first + ":J" + last + ",D" + first +
                                  ":D" + last + ")"));
  wb.set(7, 3, Cell::make_text("Under 15 in Radius"));
  wb.set(7, 4, Cell::make_formula("SUMPRODUCT(J" + first + ":J" + last + ",F" + first +
                                  ":F" + last + ")"));
  wb.set(7, 5, Cell::make_text("Over 65 in Radius"));
  wb.set(7, 6, Cell::make_formula("SUMPRODUCT(J" + first + ":J" + last + ",G" + first +
                                  ":G" + last + ")"));

  // Data table.
  wb.set(L::kHeaderRow, L::kGeoidCol, Cell::make_text("GEOID"));
  wb.set(L::kHeaderRow, L::kLonCol, Cell::make_text("Longitude"));
  wb.set(L::kHeaderRow, L::kLatCol, Cell::make_text("Latitude"));
  wb.set(L::kHeaderRow, L::kPopCol, Cell::make_text("Total Population"));
  wb.set(L::kHeaderRow, L::kDensityCol, Cell::make_text("Pop Density"));
  wb.set(L::kHeaderRow, L::kUnder15Col, Cell::make_text("Under 15"));
  wb.set(L::kHeaderRow, L::kOver65Col, Cell::make_text("Over 65"));
  wb.set(L::kHeaderRow, L::kMedianAgeCol, Cell::make_text("Median Age"));
  wb.set(L::kHeaderRow, L::kDistanceCol, Cell::make_text("Distance (km)"));
  wb.set(L::kHeaderRow, L::kInRadiusCol, Cell::make_text("In Radius"));
  if (with_cases) {
    wb.set(L::kHeaderRow, L::kCasesCol, Cell::make_text("Est. Cases"));
  }

  int row = L::kFirstDataRow;
  for (const BlockRecord& block : county.blocks) {
    const GeoPoint center = bbox_center(block.bbox);
    wb.set(row, L::kGeoidCol, Cell::make_text(block.full_fips));
    wb.set(row, L::kLonCol, Cell::make_number(center.lon));
    wb.set(row, L::kLatCol, Cell::make_number(center.lat));
    wb.set(row, L::kPopCol,
           Cell::make_number(static_cast<double>(block.demo.population)));
    wb.set(row, L::kDensityCol, Cell::make_number(block.demo.density));
    wb.set(row, L::kUnder15Col,
           Cell::make_number(static_cast<double>(block.demo.under_15)));
    wb.set(row, L::kOver65Col,
           Cell::make_number(static_cast<double>(block.demo.over_65)));
    wb.set(row, L::kMedianAgeCol, Cell::make_number(block.demo.median_age));
    wb.set(row, L::kDistanceCol, Cell::make_formula(detail::distance_formula(row)));
    wb.set(row, L::kInRadiusCol,
           Cell::make_formula("IF(" + cell_ref(row, L::kDistanceCol) + "<=$B$6,1,0)"));
    if (with_cases) {
      wb.set(row, L::kCasesCol,
             Cell::make_formula(cell_ref(row, L::kPopCol) + "*$D$6"));
    }
    ++row;
  }

  wb.column_widths = {{1, 18.0}, {2, 12.0},  {3, 12.0}, {4, 15.0},
                      {5, 12.0}, {6, 10.0},  {7, 10.0}, {8, 11.0},
                      {9, 13.0}, {10, 10.0}, {11, 11.0}};

  // Embed evaluated results beside every formula. The evaluator reads only
  // cell kinds, inputs, and formula text, never the cached slots it fills.
  FormulaEvaluator evaluator(wb);
  for (auto& [key, cell] : wb.grid) {
    if (cell.kind == Cell::Kind::formula) {
      cell.cached = evaluator.cell_value(key.first, key.second);
    }
  }
  return wb;
}

}  // namespace prestage
