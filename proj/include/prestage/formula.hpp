#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "prestage/detail/text.hpp"
#include "prestage/errors.hpp"
#include "prestage/geo.hpp"
#include "prestage/workbook_model.hpp"

namespace prestage {

// Evaluator for the portable spreadsheet formula subset embedded in emitted
// workbooks: + - * / ^, comparisons, SIN COS ASIN SQRT RADIANS PI IF ABS MIN
// MAX SUMPRODUCT, absolute/relative cell references and rectangular ranges.
// Trig and the degree conversion share the native implementations, so a
// formula mirroring native arithmetic evaluates bit-identically to it.

namespace formula_detail {

enum class Tok {
  number, string, ident, cell,
  lparen, rparen, comma, colon,
  plus, minus, star, slash, caret,
  lt, le, gt, ge, eq, ne,
  end
};

struct Token {
  Tok kind = Tok::end;
  double number = 0.0;
  std::string text;  // ident (uppercased) or string literal
  int row = 0;
  int col = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
    if (pos_ >= src_.size()) return {Tok::end};
    const char c = src_[pos_];
    switch (c) {
      case '(': ++pos_; return {Tok::lparen};
      case ')': ++pos_; return {Tok::rparen};
      case ',': ++pos_; return {Tok::comma};
      case ':': ++pos_; return {Tok::colon};
      case '+': ++pos_; return {Tok::plus};
      case '-': ++pos_; return {Tok::minus};
      case '*': ++pos_; return {Tok::star};
      case '/': ++pos_; return {Tok::slash};
      case '^': ++pos_; return {Tok::caret};
      case '=': ++pos_; return {Tok::eq};
      case '<':
        ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '=') { ++pos_; return {Tok::le}; }
        if (pos_ < src_.size() && src_[pos_] == '>') { ++pos_; return {Tok::ne}; }
        return {Tok::lt};
      case '>':
        ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '=') { ++pos_; return {Tok::ge}; }
        return {Tok::gt};
      case '"': return lex_string();
      default: break;
    }
    if ((c >= '0' && c <= '9') || c == '.') return lex_number();
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '$' || c == '_') {
      return lex_word();
    }
    throw FormulaError("unexpected character '" + std::string(1, c) + "' at offset " +
                       std::to_string(pos_));
  }

 private:
  Token lex_string() {
    ++pos_;  // opening quote
    Token t{Tok::string};
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '"') {
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '"') {
          t.text += '"';  // doubled quote escape
          pos_ += 2;
          continue;
        }
        ++pos_;
        return t;
      }
      t.text += c;
      ++pos_;
    }
    throw FormulaError("unterminated string literal");
  }

  Token lex_number() {
    const char* begin = src_.data() + pos_;
    const char* end = src_.data() + src_.size();
    Token t{Tok::number};
    const auto res = std::from_chars(begin, end, t.number);
    if (res.ec != std::errc{}) throw FormulaError("malformed number literal");
    pos_ = static_cast<std::size_t>(res.ptr - src_.data());
    return t;
  }

  Token lex_word() {
    const std::size_t start = pos_;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
          c == '$' || c == '_' || c == '.') {
        ++pos_;
      } else {
        break;
      }
    }
    const std::string_view word = src_.substr(start, pos_ - start);
    Token t;
    if (try_cell_ref(word, t)) return t;
    t.kind = Tok::ident;
    t.text = detail::upper_ascii(word);
    return t;
  }

  // [$]A..XFD[$]digits
  static bool try_cell_ref(std::string_view word, Token& t) {
    std::size_t i = 0;
    if (i < word.size() && word[i] == '$') ++i;
    std::size_t letters_begin = i;
    while (i < word.size() &&
           ((word[i] >= 'A' && word[i] <= 'Z') || (word[i] >= 'a' && word[i] <= 'z'))) {
      ++i;
    }
    const std::size_t letters = i - letters_begin;
    if (letters == 0 || letters > 3) return false;
    std::size_t digits_begin = i;
    if (i < word.size() && word[i] == '$') {
      ++i;
      ++digits_begin;
    }
    std::size_t digits = 0;
    while (i < word.size() && word[i] >= '0' && word[i] <= '9') {
      ++i;
      ++digits;
    }
    if (digits == 0 || i != word.size()) return false;

    int col = 0;
    for (std::size_t k = letters_begin; k < letters_begin + letters; ++k) {
      const char c = word[k];
      const int v = (c >= 'a') ? c - 'a' + 1 : c - 'A' + 1;
      col = col * 26 + v;
    }
    int row = 0;
    std::from_chars(word.data() + digits_begin, word.data() + word.size(), row);
    if (row <= 0) return false;
    t.kind = Tok::cell;
    t.row = row;
    t.col = col;
    return true;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

struct Node {
  enum class Kind { number, string, cell, range, unary_minus, binary, call };
  Kind kind = Kind::number;
  double number = 0.0;
  std::string text;  // string literal or function name
  int row = 0, col = 0, row2 = 0, col2 = 0;
  Tok op = Tok::end;
  std::vector<std::unique_ptr<Node>> children;
};

using NodeP = std::unique_ptr<Node>;

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { advance(); }

  NodeP parse() {
    NodeP root = parse_comparison();
    if (current_.kind != Tok::end) throw FormulaError("trailing input after expression");
    return root;
  }

 private:
  void advance() { current_ = lexer_.next(); }

  bool accept(Tok kind) {
    if (current_.kind != kind) return false;
    advance();
    return true;
  }

  void expect(Tok kind, const char* what) {
    if (!accept(kind)) throw FormulaError(std::string("expected ") + what);
  }

  NodeP parse_comparison() {
    NodeP left = parse_additive();
    while (current_.kind == Tok::eq || current_.kind == Tok::ne ||
           current_.kind == Tok::lt || current_.kind == Tok::le ||
           current_.kind == Tok::gt || current_.kind == Tok::ge) {
      const Tok op = current_.kind;
      advance();
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::binary;
      node->op = op;
      node->children.push_back(std::move(left));
      node->children.push_back(parse_additive());
      left = std::move(node);
    }
    return left;
  }

  NodeP parse_additive() {
    NodeP left = parse_multiplicative();
    while (current_.kind == Tok::plus || current_.kind == Tok::minus) {
      const Tok op = current_.kind;
      advance();
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::binary;
      node->op = op;
      node->children.push_back(std::move(left));
      node->children.push_back(parse_multiplicative());
      left = std::move(node);
    }
    return left;
  }

  NodeP parse_multiplicative() {
    NodeP left = parse_power();
    while (current_.kind == Tok::star || current_.kind == Tok::slash) {
      const Tok op = current_.kind;
      advance();
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::binary;
      node->op = op;
      node->children.push_back(std::move(left));
      node->children.push_back(parse_power());
      left = std::move(node);
    }
    return left;
  }

  // Left-associative like spreadsheet engines; unary minus binds tighter.
  NodeP parse_power() {
    NodeP left = parse_unary();
    while (current_.kind == Tok::caret) {
      advance();
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::binary;
      node->op = Tok::caret;
      node->children.push_back(std::move(left));
      node->children.push_back(parse_unary());
      left = std::move(node);
    }
    return left;
  }

  NodeP parse_unary() {
    if (accept(Tok::plus)) return parse_unary();
    if (accept(Tok::minus)) {
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::unary_minus;
      node->children.push_back(parse_unary());
      return node;
    }
    return parse_primary();
  }

  NodeP parse_primary() {
    if (current_.kind == Tok::number) {
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::number;
      node->number = current_.number;
      advance();
      return node;
    }
    if (current_.kind == Tok::string) {
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::string;
      node->text = current_.text;
      advance();
      return node;
    }
    if (current_.kind == Tok::cell) {
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::cell;
      node->row = current_.row;
      node->col = current_.col;
      advance();
      if (accept(Tok::colon)) {
        if (current_.kind != Tok::cell) throw FormulaError("expected cell after ':'");
        node->kind = Node::Kind::range;
        node->row2 = current_.row;
        node->col2 = current_.col;
        advance();
      }
      return node;
    }
    if (current_.kind == Tok::ident) {
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::call;
      node->text = current_.text;
      advance();
      expect(Tok::lparen, "'(' after function name");
      if (!accept(Tok::rparen)) {
        node->children.push_back(parse_comparison());
        while (accept(Tok::comma)) node->children.push_back(parse_comparison());
        expect(Tok::rparen, "')'");
      }
      return node;
    }
    if (accept(Tok::lparen)) {
      NodeP inner = parse_comparison();
      expect(Tok::rparen, "')'");
      return inner;
    }
    throw FormulaError("unexpected token in expression");
  }

  Lexer lexer_;
  Token current_;
};

}  // namespace formula_detail

class FormulaEvaluator {
 public:
  explicit FormulaEvaluator(const WorkbookModel& wb) : wb_(wb) {}

  CellScalar evaluate(std::string_view expr) {
    formula_detail::Parser parser(expr);
    const formula_detail::NodeP root = parser.parse();
    return eval(*root);
  }

  // Memoized; recursively evaluates formula cells. Empty cells read as 0.
  CellScalar cell_value(int row, int col) {
    const auto key = std::make_pair(row, col);
    if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (busy_.count(key)) {
      throw FormulaError("circular reference through " + cell_ref(row, col));
    }
    const Cell* cell = wb_.find(row, col);
    CellScalar value = 0.0;
    if (cell != nullptr) {
      switch (cell->kind) {
        case Cell::Kind::number: value = cell->number; break;
        case Cell::Kind::text: value = cell->text; break;
        case Cell::Kind::formula: {
          busy_.insert(key);
          value = evaluate(cell->formula);
          busy_.erase(key);
          break;
        }
      }
    }
    memo_.emplace(key, value);
    return value;
  }

  double number_at(int row, int col) { return as_number(cell_value(row, col)); }

  static double as_number(const CellScalar& v) {
    if (const double* d = std::get_if<double>(&v)) return *d;
    throw FormulaError("expected a numeric value, found text '" +
                       std::get<std::string>(v) + "'");
  }

 private:
  using Node = formula_detail::Node;
  using Tok = formula_detail::Tok;

  CellScalar eval(const Node& node) {
    switch (node.kind) {
      case Node::Kind::number: return node.number;
      case Node::Kind::string: return node.text;
      case Node::Kind::cell: return cell_value(node.row, node.col);
      case Node::Kind::range:
        throw FormulaError("a range is only valid as a function argument");
      case Node::Kind::unary_minus:
        return -as_number(eval(*node.children[0]));
      case Node::Kind::binary: return eval_binary(node);
      case Node::Kind::call: return eval_call(node);
    }
    throw FormulaError("corrupt expression");
  }

  CellScalar eval_binary(const Node& node) {
    if (node.op == Tok::eq || node.op == Tok::ne || node.op == Tok::lt ||
        node.op == Tok::le || node.op == Tok::gt || node.op == Tok::ge) {
      return eval_comparison(node);
    }
    const double a = as_number(eval(*node.children[0]));
    const double b = as_number(eval(*node.children[1]));
    switch (node.op) {
      case Tok::plus: return a + b;
      case Tok::minus: return a - b;
      case Tok::star: return a * b;
      case Tok::slash: return a / b;
      case Tok::caret: return power(a, b);
      default: break;
    }
    throw FormulaError("corrupt binary expression");
  }

  // Small integral exponents by repeated multiplication, matching how the
  // native code squares intermediate terms.
  static double power(double base, double exponent) {
    if (exponent == std::floor(exponent) && std::abs(exponent) <= 32.0) {
      long e = static_cast<long>(exponent);
      const bool negative = e < 0;
      e = std::abs(e);
      double result = 1.0;
      double acc = base;
      while (e > 0) {
        if (e & 1) result *= acc;
        acc *= acc;
        e >>= 1;
      }
      return negative ? 1.0 / result : result;
    }
    return std::pow(base, exponent);
  }

  CellScalar eval_comparison(const Node& node) {
    const CellScalar lhs = eval(*node.children[0]);
    const CellScalar rhs = eval(*node.children[1]);
    const bool lhs_num = std::holds_alternative<double>(lhs);
    const bool rhs_num = std::holds_alternative<double>(rhs);
    if (lhs_num && rhs_num) {
      const double a = std::get<double>(lhs);
      const double b = std::get<double>(rhs);
      switch (node.op) {
        case Tok::eq: return a == b ? 1.0 : 0.0;
        case Tok::ne: return a != b ? 1.0 : 0.0;
        case Tok::lt: return a < b ? 1.0 : 0.0;
        case Tok::le: return a <= b ? 1.0 : 0.0;
        case Tok::gt: return a > b ? 1.0 : 0.0;
        case Tok::ge: return a >= b ? 1.0 : 0.0;
        default: break;
      }
    }
    if (!lhs_num && !rhs_num) {
      // Spreadsheet text comparison is case-insensitive.
      const bool equal =
          detail::iequals_ascii(std::get<std::string>(lhs), std::get<std::string>(rhs));
      if (node.op == Tok::eq) return equal ? 1.0 : 0.0;
      if (node.op == Tok::ne) return equal ? 0.0 : 1.0;
      throw FormulaError("ordered comparison of text values is not supported");
    }
    // Mixed number/text never compare equal.
    if (node.op == Tok::eq) return 0.0;
    if (node.op == Tok::ne) return 1.0;
    throw FormulaError("ordered comparison of mixed types is not supported");
  }

  void eval_range(const Node& node, std::vector<CellScalar>& out) {
    const int r1 = std::min(node.row, node.row2);
    const int r2 = std::max(node.row, node.row2);
    const int c1 = std::min(node.col, node.col2);
    const int c2 = std::max(node.col, node.col2);
    for (int r = r1; r <= r2; ++r) {
      for (int c = c1; c <= c2; ++c) {
        out.push_back(cell_value(r, c));
      }
    }
  }

  CellScalar eval_call(const Node& node) {
    const std::string& name = node.text;
    const auto argc = node.children.size();
    auto arg_number = [&](std::size_t i) { return as_number(eval(*node.children[i])); };
    auto need = [&](std::size_t n) {
      if (argc != n) {
        throw FormulaError(name + " expects " + std::to_string(n) + " argument(s)");
      }
    };

    if (name == "PI") {
      need(0);
      return std::numbers::pi;
    }
    if (name == "SIN") { need(1); return std::sin(arg_number(0)); }
    if (name == "COS") { need(1); return std::cos(arg_number(0)); }
    if (name == "ASIN") { need(1); return std::asin(arg_number(0)); }
    if (name == "SQRT") { need(1); return std::sqrt(arg_number(0)); }
    if (name == "ABS") { need(1); return std::abs(arg_number(0)); }
    if (name == "RADIANS") { need(1); return radians(arg_number(0)); }
    if (name == "IF") {
      need(3);
      const double condition = arg_number(0);
      return eval(*node.children[condition != 0.0 ? 1 : 2]);
    }
    if (name == "MIN" || name == "MAX") {
      if (argc == 0) throw FormulaError(name + " expects at least one argument");
      double result = arg_number(0);
      for (std::size_t i = 1; i < argc; ++i) {
        const double v = arg_number(i);
        if (name == "MIN" ? (v < result) : (v > result)) result = v;
      }
      return result;
    }
    if (name == "SUMPRODUCT") {
      if (argc == 0) throw FormulaError("SUMPRODUCT expects at least one range");
      std::vector<std::vector<CellScalar>> ranges(argc);
      for (std::size_t i = 0; i < argc; ++i) {
        const Node& child = *node.children[i];
        if (child.kind != Node::Kind::range) {
          throw FormulaError("SUMPRODUCT arguments must be ranges");
        }
        eval_range(child, ranges[i]);
        if (ranges[i].size() != ranges[0].size()) {
          throw FormulaError("SUMPRODUCT ranges must have equal size");
        }
      }
      double sum = 0.0;
      for (std::size_t k = 0; k < ranges[0].size(); ++k) {
        double product = 1.0;
        for (std::size_t i = 0; i < argc; ++i) {
          product *= as_number(ranges[i][k]);
        }
        sum += product;
      }
      return sum;
    }
    throw FormulaError("unknown function " + name);
  }

  const WorkbookModel& wb_;
  std::map<std::pair<int, int>, CellScalar> memo_;
  std::set<std::pair<int, int>> busy_;
};

}  // namespace prestage
