// Point/value representation shared by instance and value spaces.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>

namespace metreg {

struct Vec2 {
  double x{0.0};
  double y{0.0};
  friend bool operator==(const Vec2& a, const Vec2& b) = default;
};

// A point of any built-in space: a real, a point in the plane, or a
// nonnegative integer (labels, countable spaces). Equality is exact
// (bit-level on the stored representation), which is what the duplicate
// test of the capped nearest-neighbor rule requires.
using Value = std::variant<double, Vec2, std::int64_t>;

inline bool value_equal(const Value& a, const Value& b) { return a == b; }

struct ValueHash {
  std::size_t operator()(const Value& v) const noexcept;
};

// Locale-independent, round-trip-exact rendering (used in JSON sidecars).
std::string value_to_string(const Value& v);

// Convenience accessors that throw std::bad_variant_access on mismatch.
inline double as_real(const Value& v) { return std::get<double>(v); }
inline Vec2 as_vec2(const Value& v) { return std::get<Vec2>(v); }
inline std::int64_t as_index(const Value& v) { return std::get<std::int64_t>(v); }

}  // namespace metreg
