#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <variant>

#include "prestage/errors.hpp"

namespace prestage {

// A scalar a cell can evaluate to: a number or a text value.
using CellScalar = std::variant<double, std::string>;

struct Cell {
  enum class Kind { number, text, formula };
  Kind kind = Kind::number;
  double number = 0.0;       // Kind::number
  std::string text;          // Kind::text
  std::string formula;       // Kind::formula, stored without a leading '='
  CellScalar cached = 0.0;   // evaluated result embedded next to the formula

  static Cell make_number(double v) {
    Cell c;
    c.kind = Kind::number;
    c.number = v;
    return c;
  }
  static Cell make_text(std::string v) {
    Cell c;
    c.kind = Kind::text;
    c.text = std::move(v);
    return c;
  }
  static Cell make_formula(std::string expr) {
    Cell c;
    c.kind = Kind::formula;
    c.formula = std::move(expr);
    return c;
  }

  bool operator==(const Cell&) const = default;
};

// Sparse single-sheet spreadsheet, rows and columns 1-based; the map order
// gives deterministic row-major serialization.
struct WorkbookModel {
  std::string sheet_name = "Sheet1";
  std::map<std::pair<int, int>, Cell> grid;  // (row, col) -> cell
  std::map<int, double> column_widths;

  void set(int row, int col, Cell cell) { grid[{row, col}] = std::move(cell); }

  const Cell* find(int row, int col) const {
    const auto it = grid.find({row, col});
    return it == grid.end() ? nullptr : &it->second;
  }

  bool operator==(const WorkbookModel&) const = default;
};

// "A" = 1, ..., "Z" = 26, "AA" = 27, ...
inline std::string column_letters(int col) {
  std::string s;
  while (col > 0) {
    const int rem = (col - 1) % 26;
    s.insert(s.begin(), static_cast<char>('A' + rem));
    col = (col - 1) / 26;
  }
  return s;
}

inline std::string cell_ref(int row, int col, bool abs_col = false, bool abs_row = false) {
  std::string s;
  if (abs_col) s += '$';
  s += column_letters(col);
  if (abs_row) s += '$';
  s += std::to_string(row);
  return s;
}

}  // namespace prestage
