#pragma once

#include <cmath>
#include <istream>
#include <limits>
#include <string>
#include <vector>

#include "gridflex/error.hpp"
#include "json.hpp"

namespace gridflex {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace json {

using Json = nlohmann::json;
using Ordered = nlohmann::ordered_json;

inline Json parse(std::istream& in) {
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed JSON: ") + e.what());
  }
}

// Runs `fn`, translating JSON access errors into InvalidInput.
template <class Fn>
auto guarded(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("bad document: ") + e.what());
  }
}

// Reads a number, treating null or absence as `fallback` (used for unbounded limits).
template <class J>
double number_or_inf(const J& obj, const char* key, double fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  return obj.at(key).template get<double>();
}

inline Ordered inf_or_number(double v) {
  if (std::isinf(v)) return Ordered(nullptr);
  return Ordered(v);
}

// A scalar broadcast to `horizon` values or an explicit array.
template <class J>
std::vector<double> series(const J& obj, const char* key, int horizon) {
  if (!obj.contains(key)) return std::vector<double>(static_cast<std::size_t>(horizon), 0.0);
  const auto& v = obj.at(key);
  if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(horizon), v.template get<double>());
  return v.template get<std::vector<double>>();
}

// A scalar kept as a single value or an explicit array; absent means empty.
template <class J>
std::vector<double> compact_series(const J& obj, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return {};
  const auto& v = obj.at(key);
  if (v.is_number()) return {v.template get<double>()};
  return v.template get<std::vector<double>>();
}

}  // namespace json
}  // namespace gridflex
