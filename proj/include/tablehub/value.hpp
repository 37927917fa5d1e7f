#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

namespace tablehub {

enum class DType { Int, Float, Bool, Text, Date };

constexpr std::string_view to_string(DType t) {
  switch (t) {
    case DType::Int: return "int";
    case DType::Float: return "float";
    case DType::Bool: return "bool";
    case DType::Text: return "text";
    case DType::Date: return "date";
  }
  return "text";
}

inline std::optional<DType> parse_dtype(std::string_view s) {
  if (s == "int") return DType::Int;
  if (s == "float") return DType::Float;
  if (s == "bool") return DType::Bool;
  if (s == "text") return DType::Text;
  if (s == "date") return DType::Date;
  return std::nullopt;
}

constexpr bool is_numeric(DType t) { return t == DType::Int || t == DType::Float; }

/// Calendar date stored as days since 1970-01-01.
struct Date {
  std::int32_t days = 0;

  static std::optional<Date> from_ymd(int y, unsigned m, unsigned d) {
    namespace ch = std::chrono;
    ch::year_month_day ymd{ch::year{y}, ch::month{m}, ch::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date{static_cast<std::int32_t>(ch::sys_days{ymd}.time_since_epoch().count())};
  }

  std::chrono::year_month_day ymd() const {
    return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{days}}};
  }
  int year() const { return static_cast<int>(ymd().year()); }
  unsigned month() const { return static_cast<unsigned>(ymd().month()); }
  unsigned day() const { return static_cast<unsigned>(ymd().day()); }

  friend auto operator<=>(const Date&, const Date&) = default;
};

struct Null {
  friend bool operator==(const Null&, const Null&) { return true; }
};

/// Tagged cell value. Alternative order mirrors DType with Null first.
using Value = std::variant<Null, std::int64_t, double, bool, std::string, Date>;

inline bool is_null(const Value& v) { return std::holds_alternative<Null>(v); }

inline std::optional<DType> dtype_of(const Value& v) {
  switch (v.index()) {
    case 1: return DType::Int;
    case 2: return DType::Float;
    case 3: return DType::Bool;
    case 4: return DType::Text;
    case 5: return DType::Date;
    default: return std::nullopt;
  }
}

inline bool matches(const Value& v, DType t) {
  auto d = dtype_of(v);
  return !d || *d == t;
}

/// Value-wise equality; NaN equals NaN so tables compare reflexively.
inline bool same_value(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  if (auto* x = std::get_if<double>(&a)) {
    double y = std::get<double>(b);
    return (std::isnan(*x) && std::isnan(y)) || *x == y;
  }
  return a == b;
}

// ---------------------------------------------------------------------------
// Text parsing (locale independent)

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  bool neg = false;
  if (s.front() == '+' || s.front() == '-') {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) return std::nullopt;
  for (char c : s)
    if (c < '0' || c > '9') return std::nullopt;
  std::uint64_t mag = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), mag);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  constexpr auto max = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
  if (neg) {
    if (mag > max + 1) return std::nullopt;
    return mag == max + 1 ? std::numeric_limits<std::int64_t>::min()
                          : -static_cast<std::int64_t>(mag);
  }
  if (mag > max) return std::nullopt;
  return static_cast<std::int64_t>(mag);
}

inline std::optional<double> parse_float(std::string_view s) {
  if (s.empty()) return std::nullopt;
  bool neg = false;
  if (s.front() == '+' || s.front() == '-') {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  // digits [. digits] [e [sign] digits], at least one mantissa digit
  std::size_t i = 0, mant = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++mant;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++mant;
  }
  if (mant == 0) return std::nullopt;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++exp_digits;
    if (exp_digits == 0) return std::nullopt;
  }
  if (i != s.size()) return std::nullopt;
  double out = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return neg ? -out : out;
}

inline std::optional<bool> parse_bool(std::string_view s) {
  auto ieq = [](std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      char c = a[i];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      if (c != b[i]) return false;
    }
    return true;
  };
  if (ieq(s, "true")) return true;
  if (ieq(s, "false")) return false;
  return std::nullopt;
}

/// Strict YYYY-MM-DD.
inline std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto digits = [&](std::size_t from, std::size_t n) -> std::optional<unsigned> {
    unsigned v = 0;
    for (std::size_t i = from; i < from + n; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + static_cast<unsigned>(s[i] - '0');
    }
    return v;
  };
  auto y = digits(0, 4), m = digits(5, 2), d = digits(8, 2);
  if (!y || !m || !d) return std::nullopt;
  return Date::from_ymd(static_cast<int>(*y), *m, *d);
}

// ---------------------------------------------------------------------------
// Canonical rendering

/// Shortest round-trip decimal. Fixed notation for decimal exponents in
/// [-7, 21), scientific otherwise; integral fixed values keep a ".0" suffix
/// so the text re-parses as a float. Caller must pass a finite value.
inline std::string format_float(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific);
  std::string_view sci(buf, static_cast<std::size_t>(res.ptr - buf));

  std::string out;
  if (sci.front() == '-') {
    out.push_back('-');
    sci.remove_prefix(1);
  }
  auto epos = sci.find('e');
  std::string digits;
  for (char c : sci.substr(0, epos))
    if (c != '.') digits.push_back(c);
  int exp = std::stoi(std::string(sci.substr(epos + 1)));

  if (exp >= -7 && exp < 21) {
    if (exp < 0) {
      out += "0.";
      out.append(static_cast<std::size_t>(-exp - 1), '0');
      out += digits;
    } else if (static_cast<std::size_t>(exp) + 1 >= digits.size()) {
      out += digits;
      out.append(static_cast<std::size_t>(exp) + 1 - digits.size(), '0');
      out += ".0";
    } else {
      out += digits.substr(0, static_cast<std::size_t>(exp) + 1);
      out.push_back('.');
      out += digits.substr(static_cast<std::size_t>(exp) + 1);
    }
    return out;
  }
  out.push_back(digits.front());
  if (digits.size() > 1) {
    out.push_back('.');
    out += digits.substr(1);
  }
  out.push_back('e');
  out.push_back(exp < 0 ? '-' : '+');
  out += std::to_string(exp < 0 ? -exp : exp);
  return out;
}

inline std::string format_date(Date d) {
  auto ymd = d.ymd();
  char buf[16];
  int y = static_cast<int>(ymd.year());
  unsigned m = static_cast<unsigned>(ymd.month()), dd = static_cast<unsigned>(ymd.day());
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, dd);
  return buf;
}

/// Canonical text form; nullopt for Null and non-finite floats.
inline std::optional<std::string> render_text(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::optional<std::string> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Null>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(x)) return std::nullopt;
          return format_float(x);
        } else if constexpr (std::is_same_v<T, bool>) {
          return std::string(x ? "true" : "false");
        } else if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else {
          return format_date(x);
        }
      },
      v);
}

/// Debug-friendly rendering used in messages and test output.
inline std::string describe(const Value& v) {
  if (is_null(v)) return "null";
  if (auto* s = std::get_if<std::string>(&v)) return "\"" + *s + "\"";
  if (auto* f = std::get_if<double>(&v); f && !std::isfinite(*f))
    return std::isnan(*f) ? "nan" : (*f > 0 ? "inf" : "-inf");
  return *render_text(v);
}

// ---------------------------------------------------------------------------
// Conversion matrix

/// Converts one non-null value to `target`. nullopt means the cell is not
/// convertible. Empty text converts to Null for every non-text target.
inline std::optional<Value> convert_value(const Value& v, DType target) {
  if (is_null(v)) return Value{Null{}};
  DType from = *dtype_of(v);
  if (from == target) return v;

  if (target == DType::Text) {
    auto s = render_text(v);
    if (!s) return std::nullopt;
    return Value{std::move(*s)};
  }
  if (from == DType::Text) {
    const auto& s = std::get<std::string>(v);
    if (s.empty()) return Value{Null{}};
    switch (target) {
      case DType::Int:
        if (auto x = parse_int(s)) return Value{*x};
        return std::nullopt;
      case DType::Float:
        if (auto x = parse_float(s)) return Value{*x};
        return std::nullopt;
      case DType::Bool:
        if (auto x = parse_bool(s)) return Value{*x};
        return std::nullopt;
      case DType::Date:
        if (auto x = parse_date(s)) return Value{*x};
        return std::nullopt;
      case DType::Text:
        break;
    }
    return std::nullopt;
  }
  switch (from) {
    case DType::Int: {
      auto i = std::get<std::int64_t>(v);
      if (target == DType::Float) return Value{static_cast<double>(i)};
      if (target == DType::Bool && (i == 0 || i == 1)) return Value{i == 1};
      return std::nullopt;
    }
    case DType::Float: {
      double f = std::get<double>(v);
      if (target == DType::Int) {
        // 2^63 is exactly representable; anything >= it overflows.
        if (!std::isfinite(f) || std::trunc(f) != f || f < -9223372036854775808.0 ||
            f >= 9223372036854775808.0)
          return std::nullopt;
        return Value{static_cast<std::int64_t>(f)};
      }
      if (target == DType::Bool && (f == 0.0 || f == 1.0)) return Value{f == 1.0};
      return std::nullopt;
    }
    case DType::Bool: {
      bool b = std::get<bool>(v);
      if (target == DType::Int) return Value{std::int64_t{b ? 1 : 0}};
      if (target == DType::Float) return Value{b ? 1.0 : 0.0};
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Ordering

/// Total order on two non-null values of comparable dtypes (identical, or
/// both numeric). NaN sorts after every other float.
inline std::strong_ordering compare_values(const Value& a, const Value& b) {
  auto as_long_double = [](const Value& v) -> long double {
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<long double>(*i);
    return static_cast<long double>(std::get<double>(v));
  };
  auto nan = [](const Value& v) {
    auto* f = std::get_if<double>(&v);
    return f && std::isnan(*f);
  };
  if (a.index() == 1 && b.index() == 1)
    return std::get<std::int64_t>(a) <=> std::get<std::int64_t>(b);
  if ((a.index() == 1 || a.index() == 2) && (b.index() == 1 || b.index() == 2)) {
    bool na = nan(a), nb = nan(b);
    if (na || nb) return na == nb ? std::strong_ordering::equal
                                  : (na ? std::strong_ordering::greater
                                        : std::strong_ordering::less);
    long double x = as_long_double(a), y = as_long_double(b);
    if (x < y) return std::strong_ordering::less;
    if (x > y) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  if (a.index() != b.index()) return a.index() <=> b.index();
  switch (a.index()) {
    case 3: return std::get<bool>(a) <=> std::get<bool>(b);
    case 4: {
      int c = std::get<std::string>(a).compare(std::get<std::string>(b));
      return c < 0 ? std::strong_ordering::less
                   : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }
    case 5: return std::get<Date>(a) <=> std::get<Date>(b);
    default: return std::strong_ordering::equal;
  }
}

/// Ordering with Null placed after every non-null value.
inline std::strong_ordering compare_nulls_last(const Value& a, const Value& b) {
  bool na = is_null(a), nb = is_null(b);
  if (na || nb)
    return na == nb ? std::strong_ordering::equal
                    : (na ? std::strong_ordering::greater : std::strong_ordering::less);
  return compare_values(a, b);
}

}  // namespace tablehub
