#pragma once

/**
 * @file io.hpp
 * @brief Text and JSON forms of polynomials, maps, Sigma and arcs.
 *
 * Polynomial text: sums of products of rational constants and variables
 * with `^` powers and parentheses, e.g. `x^3 - 3*x*y^5` or
 * `1/2*x1^2*x3 - x2`. Variables are x, y, z (n <= 3) or x1 ... xn; the two
 * styles cannot be mixed. Division is allowed by nonzero constants only.
 *
 * Sigma text: `origin`, `{x1=0}`, `{x1=x2=0}`, `{x1=0}|{x2=0}`.
 * Arc text: `(t^3, -2*t^2 + t^5, 0)`.
 */

#include <jetlab/arc.hpp>
#include <jetlab/polynomial.hpp>
#include <jetlab/sigma.hpp>

#include <json.hpp>

#include <cctype>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jetlab {

using Json = nlohmann::json;

/// Syntax error with a 1-based column into the parsed text.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t column)
      : std::runtime_error(what + " at column " + std::to_string(column)), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

namespace detail {

enum class VarStyle { none, xyz, indexed, t_only };

struct VarScan {
  VarStyle style = VarStyle::none;
  std::size_t nvars = 0;
};

/// Index of a variable name under a style; nullopt if it is not a variable.
inline std::optional<std::size_t> letter_index(std::string_view name) {
  if (name == "x") return 0;
  if (name == "y") return 1;
  if (name == "z") return 2;
  return std::nullopt;
}

inline std::optional<std::size_t> indexed_index(std::string_view name) {
  if (name.size() < 2 || name[0] != 'x') return std::nullopt;
  std::size_t v = 0;
  for (std::size_t i = 1; i < name.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(name[i]))) return std::nullopt;
    v = v * 10 + static_cast<std::size_t>(name[i] - '0');
    if (v > 1000) return std::nullopt;
  }
  if (v == 0 || name[1] == '0') return std::nullopt;
  return v - 1;
}

/// Finds which naming style a text uses and the variable count it implies.
inline void scan_variables(std::string_view text, VarScan& scan) {
  for (std::size_t i = 0; i < text.size();) {
    if (!std::isalpha(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
    const std::string_view name = text.substr(start, i - start);
    VarStyle style;
    std::size_t index;
    if (auto k = letter_index(name)) {
      style = VarStyle::xyz;
      index = *k;
    } else if (auto k2 = indexed_index(name)) {
      style = VarStyle::indexed;
      index = *k2;
    } else {
      throw ParseError("unknown variable '" + std::string(name) + "'", start + 1);
    }
    if (scan.style != VarStyle::none && scan.style != style)
      throw ParseError("mixed variable naming (use x,y,z or x1..xn)", start + 1);
    scan.style = style;
    scan.nvars = std::max(scan.nvars, index + 1);
  }
}

class PolyParser {
 public:
  PolyParser(std::string_view text, std::size_t nvars, VarStyle style)
      : text_(text), nvars_(nvars), style_(style) {}

  Polynomial parse() {
    Polynomial p = expression();
    skip_space();
    if (pos_ != text_.size()) throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_ + 1);
    return p;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial expression() {
    Polynomial sum = term();
    while (true) {
      if (accept('+')) sum += term();
      else if (accept('-')) sum -= term();
      else return sum;
    }
  }

  Polynomial term() {
    Polynomial prod = factor();
    while (true) {
      if (accept('*')) {
        prod *= factor();
      } else if (accept('/')) {
        skip_space();
        const std::size_t col = pos_ + 1;
        Polynomial d = factor();
        if (d.total_degree() != 0 || d.is_zero()) throw ParseError("division by a non-constant or zero", col);
        prod *= Rational(1 / d.coefficient(Exponent(nvars_, 0)));
      } else {
        return prod;
      }
    }
  }

  Polynomial factor() {
    if (accept('-')) return -factor();
    if (accept('+')) return factor();
    Polynomial base = primary();
    if (accept('^')) {
      skip_space();
      const std::size_t start = pos_;
      std::uint64_t e = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        e = e * 10 + static_cast<std::uint64_t>(text_[pos_] - '0');
        if (e > 100000) throw ParseError("exponent too large", start + 1);
        ++pos_;
      }
      if (pos_ == start) throw ParseError("malformed exponent (expected a natural number)", start + 1);
      base = base.pow(static_cast<unsigned>(e));
    }
    return base;
  }

  Polynomial primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_ + 1);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial inner = expression();
      if (!accept(')')) throw ParseError("expected ')'", pos_ + 1);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      Integer v(std::string(text_.substr(start, pos_ - start)));
      return Polynomial::constant(nvars_, Rational(v));
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      std::optional<std::size_t> idx;
      if (style_ == VarStyle::t_only) idx = name == "t" ? std::optional<std::size_t>(0) : std::nullopt;
      else if (style_ == VarStyle::xyz) idx = letter_index(name);
      else idx = indexed_index(name);
      if (!idx || *idx >= nvars_) throw ParseError("unknown variable '" + std::string(name) + "'", start + 1);
      return Polynomial::variable(nvars_, *idx);
    }
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_ + 1);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t nvars_;
  VarStyle style_;
};

}  // namespace detail

/// Parses a polynomial; nvars defaults to the largest variable used.
inline Polynomial parse_polynomial(std::string_view text, std::size_t nvars = 0) {
  detail::VarScan scan;
  detail::scan_variables(text, scan);
  const std::size_t n = std::max({nvars, scan.nvars, std::size_t{1}});
  const auto style = scan.style == detail::VarStyle::none ? (n <= 3 ? detail::VarStyle::xyz : detail::VarStyle::indexed)
                                                          : scan.style;
  return detail::PolyParser(text, n, style).parse();
}

/// Parses the components of a map with a common variable count.
inline PolyMap parse_map(const std::vector<std::string>& components, std::size_t nvars = 0) {
  if (components.empty()) throw std::invalid_argument("a map needs at least one component");
  detail::VarScan scan;
  for (const auto& c : components) detail::scan_variables(c, scan);
  const std::size_t n = std::max({nvars, scan.nvars, std::size_t{1}});
  std::vector<Polynomial> out;
  for (const auto& c : components) out.push_back(parse_polynomial(c, n));
  return PolyMap(std::move(out));
}

/// Splits on ';' and parses each part (for CLI arguments like "x-y^2; x^2").
inline PolyMap parse_map_text(std::string_view text, std::size_t nvars = 0) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ';') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parse_map(parts, nvars);
}

inline std::string variable_name(std::size_t index, std::size_t nvars) {
  if (nvars <= 3) return std::string(1, "xyz"[index]);
  return "x" + std::to_string(index + 1);
}

namespace detail {

inline std::string format_monomial(const Exponent& e, const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] == 0) continue;
    if (!out.empty()) out += "*";
    out += names[i];
    if (e[i] > 1) out += "^" + std::to_string(e[i]);
  }
  return out;
}

inline std::string format_terms(const Polynomial& p, const std::vector<std::string>& names) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    const auto& [e, c] = *it;
    const Rational mag = abs(c);
    const std::string mono = format_monomial(e, names);
    if (first) out += c < 0 ? "-" : "";
    else out += c < 0 ? " - " : " + ";
    first = false;
    if (mono.empty()) out += mag.get_str();
    else if (mag == 1) out += mono;
    else out += mag.get_str() + "*" + mono;
  }
  return out;
}

}  // namespace detail

/// Canonical text: terms in descending lexicographic exponent order.
inline std::string format_polynomial(const Polynomial& p) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < p.nvars(); ++i) names.push_back(variable_name(i, p.nvars()));
  return detail::format_terms(p, names);
}

inline std::string format_map(const PolyMap& F) {
  std::string out;
  for (std::size_t j = 0; j < F.size(); ++j) {
    if (j) out += "; ";
    out += format_polynomial(F[j]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sigma text

inline SigmaSet parse_sigma(std::string_view text, std::size_t nvars) {
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  skip();
  if (text.substr(pos).starts_with("origin")) {
    pos += 6;
    skip();
    if (pos != text.size()) throw ParseError("unexpected text after 'origin'", pos + 1);
    return SigmaSet::origin(nvars);
  }
  std::vector<SigmaSet::Piece> pieces;
  while (true) {
    skip();
    if (pos >= text.size() || text[pos] != '{') throw ParseError("expected '{'", pos + 1);
    ++pos;
    SigmaSet::Piece piece;
    while (true) {
      skip();
      const std::size_t start = pos;
      while (pos < text.size() && std::isalnum(static_cast<unsigned char>(text[pos]))) ++pos;
      const std::string_view name = text.substr(start, pos - start);
      std::optional<std::size_t> idx = detail::indexed_index(name);
      if (!idx && nvars <= 3) idx = detail::letter_index(name);
      if (!idx) throw ParseError("expected a variable name", start + 1);
      if (*idx >= nvars) throw ParseError("variable '" + std::string(name) + "' out of range", start + 1);
      piece.push_back(*idx);
      skip();
      if (pos >= text.size() || text[pos] != '=') throw ParseError("expected '='", pos + 1);
      ++pos;
      skip();
      if (pos < text.size() && text[pos] == '0') {
        ++pos;
        skip();
        if (pos >= text.size() || text[pos] != '}') throw ParseError("expected '}'", pos + 1);
        ++pos;
        break;
      }
    }
    pieces.push_back(std::move(piece));
    skip();
    if (pos == text.size()) break;
    if (text[pos] != '|') throw ParseError("expected '|'", pos + 1);
    ++pos;
  }
  return SigmaSet(nvars, std::move(pieces));
}

inline std::string format_sigma(const SigmaSet& sigma) {
  if (sigma.pieces().size() == 1 && sigma.pieces().front().size() == sigma.nvars()) return "origin";
  std::string out;
  for (std::size_t k = 0; k < sigma.pieces().size(); ++k) {
    if (k) out += "|";
    out += "{";
    for (auto i : sigma.pieces()[k]) out += "x" + std::to_string(i + 1) + "=";
    out += "0}";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Arc text

inline Arc parse_arc(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos >= text.size() || text[pos] != '(') throw ParseError("expected '('", pos + 1);
  std::size_t close = text.rfind(')');
  if (close == std::string_view::npos || close < pos) throw ParseError("expected ')'", text.size() + 1);
  for (std::size_t i = close + 1; i < text.size(); ++i)
    if (!std::isspace(static_cast<unsigned char>(text[i]))) throw ParseError("unexpected text after ')'", i + 1);
  std::vector<Arc::Component> comps;
  std::size_t start = pos + 1;
  int depth = 0;
  for (std::size_t i = pos + 1; i <= close; ++i) {
    const char c = text[i];
    if (c == '(') ++depth;
    if (c == ')' && i != close) --depth;
    if ((c == ',' && depth == 0) || i == close) {
      const std::string_view part = text.substr(start, i - start);
      Polynomial p;
      try {
        p = detail::PolyParser(part, 1, detail::VarStyle::t_only).parse();
      } catch (const ParseError& e) {
        throw ParseError(std::string("arc component: ") + e.what(), start + e.column());
      }
      Arc::Component comp;
      for (const auto& [e, coef] : p.terms()) {
        if (e[0] == 0) throw ParseError("arc components must vanish at t = 0", start + 1);
        comp.push_back({e[0], coef});
      }
      comps.push_back(std::move(comp));
      start = i + 1;
    }
  }
  return Arc(std::move(comps));
}

inline std::string format_arc(const Arc& arc) {
  std::string out = "(";
  for (std::size_t i = 0; i < arc.nvars(); ++i) {
    if (i) out += ", ";
    Polynomial p(1);
    for (const auto& term : arc.component(i)) p += Polynomial::monomial({term.exponent}, term.coefficient);
    out += detail::format_terms(p, {"t"});
  }
  return out + ")";
}

// ---------------------------------------------------------------------------
// JSON

inline Json rational_to_json_fields(const Rational& q, Json& obj) {
  auto put = [](const Integer& z) -> Json {
    if (z.fits_slong_p()) return z.get_si();
    return z.get_str();
  };
  obj["num"] = put(q.get_num());
  obj["den"] = put(q.get_den());
  return obj;
}

inline Integer integer_from_json(const Json& j) {
  if (j.is_number_integer()) return Integer(j.get<long>());
  if (j.is_string()) return Integer(j.get<std::string>());
  throw std::invalid_argument("expected an integer or an integer string");
}

inline Rational rational_from_json(const Json& obj) {
  const Integer num = integer_from_json(obj.at("num"));
  const Integer den = obj.contains("den") ? integer_from_json(obj.at("den")) : Integer(1);
  return make_rational(num, den);
}

inline Json to_json(const Polynomial& p) {
  Json terms = Json::array();
  for (const auto& [e, c] : p.terms()) {
    Json t;
    t["exp"] = e;
    rational_to_json_fields(c, t);
    terms.push_back(std::move(t));
  }
  return Json{{"nvars", p.nvars()}, {"terms", std::move(terms)}};
}

inline Polynomial polynomial_from_json(const Json& j) {
  const std::size_t n = j.at("nvars").get<std::size_t>();
  Polynomial p(n);
  for (const auto& t : j.at("terms")) {
    auto e = t.at("exp").get<Exponent>();
    if (e.size() != n) throw std::invalid_argument("exponent length does not match nvars");
    p += Polynomial::monomial(std::move(e), rational_from_json(t));
  }
  return p;
}

inline Json to_json(const PolyMap& F) {
  Json comps = Json::array();
  for (const auto& f : F.components()) comps.push_back(to_json(f));
  return Json{{"nvars", F.nvars()}, {"components", std::move(comps)}};
}

/// Accepts {"components": [...]}, a bare polynomial object, or a list of
/// polynomial strings.
inline PolyMap map_from_json(const Json& j) {
  if (j.is_array()) {
    std::vector<std::string> parts;
    for (const auto& s : j) parts.push_back(s.get<std::string>());
    return parse_map(parts);
  }
  if (j.contains("components")) {
    std::vector<Polynomial> comps;
    for (const auto& c : j.at("components")) comps.push_back(c.is_string() ? parse_polynomial(c.get<std::string>(), j.value("nvars", 0)) : polynomial_from_json(c));
    return PolyMap(std::move(comps));
  }
  return PolyMap({polynomial_from_json(j)});
}

inline Json to_json(const SigmaSet& sigma) {
  Json pieces = Json::array();
  for (const auto& p : sigma.pieces()) {
    Json piece = Json::array();
    for (auto i : p) piece.push_back(i + 1);
    pieces.push_back(std::move(piece));
  }
  return Json{{"nvars", sigma.nvars()}, {"pieces", std::move(pieces)}};
}

inline SigmaSet sigma_from_json(const Json& j) {
  const std::size_t n = j.at("nvars").get<std::size_t>();
  std::vector<SigmaSet::Piece> pieces;
  for (const auto& piece : j.at("pieces")) {
    SigmaSet::Piece p;
    for (const auto& i : piece) {
      const auto k = i.get<std::size_t>();
      if (k == 0) throw std::invalid_argument("sigma pieces use 1-based indices");
      p.push_back(k - 1);
    }
    pieces.push_back(std::move(p));
  }
  return SigmaSet(n, std::move(pieces));
}

inline Json to_json(const Arc& arc) {
  Json comps = Json::array();
  for (const auto& comp : arc.components()) {
    Json terms = Json::array();
    for (const auto& t : comp) {
      Json term;
      term["exp"] = t.exponent;
      rational_to_json_fields(t.coefficient, term);
      terms.push_back(std::move(term));
    }
    comps.push_back(std::move(terms));
  }
  return Json{{"nvars", arc.nvars()}, {"components", std::move(comps)}, {"text", format_arc(arc)}};
}

inline Arc arc_from_json(const Json& j) {
  if (j.is_string()) return parse_arc(j.get<std::string>());
  std::vector<Arc::Component> comps;
  for (const auto& comp : j.at("components")) {
    Arc::Component c;
    for (const auto& t : comp) c.push_back({t.at("exp").get<std::uint32_t>(), rational_from_json(t)});
    comps.push_back(std::move(c));
  }
  return Arc(std::move(comps));
}

}  // namespace jetlab
