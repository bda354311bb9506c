#include "cftv/value.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "cftv/errors.hpp"
#include "cftv/hash.hpp"
#include "cftv/time.hpp"

namespace cftv {

std::string Value::type_name() const {
  switch (v_.index()) {
    case 0: return "null";
    case 1: return "bool";
    case 2: return "int";
    case 3: return "real";
    case 4: return "string";
    case 5: return "bytes";
    case 6: return "list";
    default: return "record";
  }
}

bool operator==(const Value& a, const Value& b) {
  if (a.is_number() && b.is_number()) {
    if (a.is_int() && b.is_int()) return a.as_int() == b.as_int();
    return a.as_number() == b.as_number();
  }
  if (a.v_.index() != b.v_.index()) return false;
  if (a.is_bytes()) {
    const auto& x = a.as_bytes();
    const auto& y = b.as_bytes();
    if (x == y) return true;
    if (!x || !y) return false;
    return *x == *y;
  }
  return a.v_ == b.v_;
}

nlohmann::json to_json(const Value& v) {
  return std::visit(
      [](const auto& x) -> nlohmann::json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, Bytes>) {
          std::span<const std::uint8_t> data;
          if (x) data = *x;
          return nlohmann::json{{"bytes", data.size()},
                                {"digest", hex64(fnv1a64_words(data))}};
        } else if constexpr (std::is_same_v<T, List>) {
          auto arr = nlohmann::json::array();
          for (const auto& e : x) arr.push_back(to_json(e));
          return arr;
        } else if constexpr (std::is_same_v<T, Record>) {
          auto obj = nlohmann::json::object();
          for (const auto& [k, e] : x) obj[k] = to_json(e);
          return obj;
        } else {
          return x;
        }
      },
      v.storage());
}

Value from_json(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null: return {};
    case nlohmann::json::value_t::boolean: return j.get<bool>();
    case nlohmann::json::value_t::number_integer:
    case nlohmann::json::value_t::number_unsigned:
      return j.get<std::int64_t>();
    case nlohmann::json::value_t::number_float: return j.get<double>();
    case nlohmann::json::value_t::string: return j.get<std::string>();
    case nlohmann::json::value_t::array: {
      List l;
      for (const auto& e : j) l.push_back(from_json(e));
      return l;
    }
    case nlohmann::json::value_t::object: {
      Record r;
      for (const auto& [k, e] : j.items()) r[k] = from_json(e);
      return r;
    }
    default: return {};
  }
}

Value canonical(const Value& v) {
  if (v.is_bytes() || v.is_list() || v.is_record()) return from_json(to_json(v));
  return v;
}

std::string to_string(const Value& v) {
  if (v.is_string()) return v.as_string();
  return to_json(v).dump();
}

Time parse_time(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
      s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
      s.remove_suffix(1);
    return s;
  };
  std::string_view s = trim(text);
  std::size_t n = 0;
  while (n < s.size() && (std::isdigit(static_cast<unsigned char>(s[n])) ||
                          s[n] == '.' || (n == 0 && s[n] == '-')))
    ++n;
  std::string_view number = s.substr(0, n);
  std::string_view unit = trim(s.substr(n));
  Time scale = 1;
  if (unit.empty() || unit == "ps") scale = kPicosecond;
  else if (unit == "ns") scale = kNanosecond;
  else if (unit == "us") scale = kMicrosecond;
  else if (unit == "ms") scale = kMillisecond;
  else if (unit == "s") scale = kSecond;
  else throw BadParameter("bad time unit in '" + std::string(text) + "'");
  if (number.empty() || number == "-")
    throw BadParameter("bad time literal '" + std::string(text) + "'");

  bool negative = number.front() == '-';
  if (negative) number.remove_prefix(1);
  auto dot = number.find('.');
  std::string_view whole = number.substr(0, dot);
  std::string_view frac =
      dot == std::string_view::npos ? std::string_view{} : number.substr(dot + 1);
  if (frac.find('.') != std::string_view::npos)
    throw BadParameter("bad time literal '" + std::string(text) + "'");
  Time w = 0;
  if (!whole.empty()) {
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
    if (ec != std::errc{} || p != whole.data() + whole.size())
      throw BadParameter("bad time literal '" + std::string(text) + "'");
  }
  Time result = w * scale;
  Time place = scale;
  for (char c : frac) {
    if (place % 10 != 0)
      throw BadParameter("time '" + std::string(text) +
                         "' is finer than one picosecond");
    place /= 10;
    result += (c - '0') * place;
  }
  return negative ? -result : result;
}

std::string format_time(Time t) {
  std::string sign = t < 0 ? "-" : "";
  std::uint64_t a = t < 0 ? static_cast<std::uint64_t>(-(t + 1)) + 1
                          : static_cast<std::uint64_t>(t);
  std::uint64_t whole = a / kSecond;
  std::uint64_t frac = a % kSecond;
  std::string out = sign + std::to_string(whole);
  if (frac != 0) {
    std::string digits = std::to_string(frac);
    digits.insert(0, 12 - digits.size(), '0');
    while (digits.back() == '0') digits.pop_back();
    out += "." + digits;
  }
  return out + " s";
}

}  // namespace cftv
