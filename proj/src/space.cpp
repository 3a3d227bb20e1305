#include "metreg/space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <mutex>

namespace metreg {

namespace {

std::string double_to_string(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

std::size_t ValueHash::operator()(const Value& v) const noexcept {
  std::size_t h = v.index() * 0x9E3779B97F4A7C15ull;
  auto mix = [&h](std::uint64_t bits) {
    h ^= bits + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  };
  if (const double* d = std::get_if<double>(&v)) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(*d));
    __builtin_memcpy(&bits, d, sizeof(bits));
    mix(bits);
  } else if (const Vec2* p = std::get_if<Vec2>(&v)) {
    std::uint64_t bx, by;
    __builtin_memcpy(&bx, &p->x, sizeof(bx));
    __builtin_memcpy(&by, &p->y, sizeof(by));
    mix(bx);
    mix(by);
  } else {
    mix(static_cast<std::uint64_t>(std::get<std::int64_t>(v)));
  }
  return h;
}

std::string value_to_string(const Value& v) {
  if (const double* d = std::get_if<double>(&v)) return double_to_string(*d);
  if (const Vec2* p = std::get_if<Vec2>(&v)) {
    return "(" + double_to_string(p->x) + "," + double_to_string(p->y) + ")";
  }
  return std::to_string(std::get<std::int64_t>(v));
}

std::int64_t nudged_ceil(double x) {
  return static_cast<std::int64_t>(std::ceil(x - 1e-12));
}

double power_loss(double distance, double alpha) {
  if (alpha == 1.0) return distance;
  if (alpha == 2.0) return distance * distance;
  return std::pow(distance, alpha);
}

double relaxed_triangle_constant(double alpha, double eps) {
  if (!(alpha >= 1.0)) {
    throw std::invalid_argument("relaxed_triangle_constant: alpha must be >= 1");
  }
  if (!(eps > 0.0) || !(eps <= 1.0)) {
    throw std::invalid_argument("relaxed_triangle_constant: eps must be in (0,1]");
  }
  const double root = std::pow(1.0 + eps, 1.0 / alpha);
  return std::pow(1.0 + 1.0 / (root - 1.0), alpha);
}

std::uint64_t cantor_pair(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t s = a + b;
  return s * (s + 1) / 2 + b;
}

std::pair<std::uint64_t, std::uint64_t> cantor_unpair(std::uint64_t z) {
  // s(s+1)/2 <= z: start from the float estimate and correct exactly.
  std::uint64_t s = static_cast<std::uint64_t>(
      (std::sqrt(8.0 * static_cast<double>(z) + 1.0) - 1.0) / 2.0);
  while (s * (s + 1) / 2 > z) --s;
  while ((s + 1) * (s + 2) / 2 <= z) ++s;
  const std::uint64_t b = z - s * (s + 1) / 2;
  return {s - b, b};
}

std::uint64_t zigzag(std::int64_t a) {
  return a >= 0 ? 2 * static_cast<std::uint64_t>(a)
                : 2 * static_cast<std::uint64_t>(-(a + 1)) + 1;
}

std::int64_t unzigzag(std::uint64_t z) {
  return z % 2 == 0 ? static_cast<std::int64_t>(z / 2)
                    : -static_cast<std::int64_t>(z / 2) - 1;
}

double ValueSpace::sup_loss() const {
  if (!diameter_) {
    throw MissingCapability(name() + ": loss is unbounded");
  }
  return *diameter_;
}

std::vector<Value> ValueSpace::epsilon_net(double) const {
  throw MissingCapability(name() + ": no epsilon-net provider (not totally bounded)");
}

Value ValueSpace::dense_value(std::size_t) const {
  throw MissingCapability(name() + ": no dense sequence");
}

bool ValueSpace::cell_contains(std::size_t, const Value&) const {
  throw MissingCapability(name() + ": no cell basis");
}

// ---- RealLine ------------------------------------------------------------

RealLine::RealLine(double alpha) {
  alpha_ = alpha;
  anchor_ = 0.0;
}

std::string RealLine::name() const {
  return alpha_ == 1.0 ? "real-line" : "real-line-a" + double_to_string(alpha_);
}

double RealLine::distance(const Value& a, const Value& b) const {
  return std::abs(as_real(a) - as_real(b));
}

// Diagonal enumeration of the signed dyadics b/2^a: after 0, diagonal
// s = a + b for s = 1, 2, ... with a descending and even numerators skipped
// once a > 0 (they were emitted at a coarser level). Prefix:
// 0, 1, -1, 1/2, -1/2, 2, -2, 1/4, -1/4, 3, -3, 1/8, -1/8, 3/2, ...
Value RealLine::dense_value(std::size_t i) const {
  if (i == 0) return 0.0;
  std::size_t emitted = 1;
  for (std::int64_t s = 1;; ++s) {
    for (std::int64_t a = s - 1; a >= 0; --a) {
      const std::int64_t b = s - a;
      if (a > 0 && b % 2 == 0) continue;  // already emitted at a coarser level
      const double mag = std::ldexp(static_cast<double>(b), -static_cast<int>(a));
      if (emitted++ == i) return mag;
      if (emitted++ == i) return -mag;
    }
  }
}

// ---- UnitInterval --------------------------------------------------------

UnitInterval::UnitInterval(double alpha) {
  alpha_ = alpha;
  diameter_ = power_loss(1.0, alpha);
  anchor_ = 0.0;
}

std::string UnitInterval::name() const {
  return alpha_ == 1.0 ? "unit-interval" : "unit-interval-a" + double_to_string(alpha_);
}

double UnitInterval::distance(const Value& a, const Value& b) const {
  return std::abs(as_real(a) - as_real(b));
}

std::vector<Value> UnitInterval::epsilon_net(double eps) const {
  if (!(eps > 0.0)) throw std::invalid_argument("epsilon_net: eps must be > 0");
  // Grid 0, 1/n, ..., 1 with step 1/n <= 2 eps: covering radius 1/(2n) <= eps.
  const std::int64_t n = std::max<std::int64_t>(1, nudged_ceil(1.0 / (2.0 * eps)));
  std::vector<Value> net;
  net.reserve(static_cast<std::size_t>(n) + 1);
  for (std::int64_t i = 0; i <= n; ++i) {
    net.push_back(static_cast<double>(i) / static_cast<double>(n));
  }
  return net;
}

// 0, 1, then odd numerators over 2^m for m = 1, 2, ...
Value UnitInterval::dense_value(std::size_t i) const {
  if (i == 0) return 0.0;
  if (i == 1) return 1.0;
  std::size_t emitted = 2;
  for (int m = 1;; ++m) {
    const double denom = std::ldexp(1.0, m);
    for (std::int64_t b = 1; b < (1ll << m); b += 2) {
      if (emitted == i) return static_cast<double>(b) / denom;
      ++emitted;
    }
  }
}

// ---- UnitDisk --------------------------------------------------------------

UnitDisk::UnitDisk(double alpha) {
  alpha_ = alpha;
  diameter_ = power_loss(2.0, alpha);
  anchor_ = Vec2{0.0, 0.0};
}

std::string UnitDisk::name() const {
  return alpha_ == 1.0 ? "unit-disk" : "unit-disk-a" + double_to_string(alpha_);
}

double UnitDisk::distance(const Value& a, const Value& b) const {
  const Vec2 p = as_vec2(a), q = as_vec2(b);
  return std::hypot(p.x - q.x, p.y - q.y);
}

std::vector<Value> UnitDisk::epsilon_net(double eps) const {
  if (!(eps > 0.0)) throw std::invalid_argument("epsilon_net: eps must be > 0");
  // Square grid of pitch h: any point of a cell is within h/sqrt(2) of the
  // center, so pitch h = eps*sqrt(2) (slightly shrunk) covers at radius eps.
  // Centers outside the disk are projected onto it; projection onto a convex
  // set cannot increase the distance to points inside.
  const double h = eps * std::sqrt(2.0) * (1.0 - 1e-9);
  const std::int64_t m = static_cast<std::int64_t>(std::ceil(1.0 / h)) + 1;
  std::vector<Value> net;
  for (std::int64_t j = -m; j <= m; ++j) {
    for (std::int64_t i = -m; i <= m; ++i) {
      const double cx = static_cast<double>(i) * h;
      const double cy = static_cast<double>(j) * h;
      // Nearest point of the cell [cx +/- h/2] x [cy +/- h/2] to the origin.
      const double qx = std::max(0.0, std::abs(cx) - h / 2.0);
      const double qy = std::max(0.0, std::abs(cy) - h / 2.0);
      if (qx * qx + qy * qy > 1.0) continue;  // cell misses the disk
      const double r = std::hypot(cx, cy);
      if (r <= 1.0) {
        net.push_back(Vec2{cx, cy});
      } else {
        net.push_back(Vec2{cx / r, cy / r});
      }
    }
  }
  return net;
}

namespace {

struct GridPoint {
  std::int64_t i, j;  // coordinates in units of the level pitch
  std::int64_t r2;    // i*i + j*j
};

// Angle order on the circle starting at (1,0) counterclockwise, compared
// exactly with integer arithmetic.
int half_of(const GridPoint& p) { return (p.j > 0 || (p.j == 0 && p.i > 0)) ? 0 : 1; }

bool angle_less(const GridPoint& a, const GridPoint& b) {
  const int ha = half_of(a), hb = half_of(b);
  if (ha != hb) return ha < hb;
  const std::int64_t cross = a.i * b.j - a.j * b.i;
  return cross > 0;
}

}  // namespace

void UnitDisk::extend_dense(std::size_t count) const {
  if (dense_cache_.empty()) dense_cache_.push_back(Vec2{0.0, 0.0});
  while (dense_cache_.size() < count) {
    const int level = next_level_++;
    const std::int64_t n = 1ll << level;  // pitch 2^-level, coordinates i/n
    std::vector<GridPoint> pts;
    for (std::int64_t j = -n; j <= n; ++j) {
      for (std::int64_t i = -n; i <= n; ++i) {
        if (i == 0 && j == 0) continue;
        if (level > 0 && i % 2 == 0 && j % 2 == 0) continue;  // seen earlier
        if (i * i + j * j > n * n) continue;  // outside the disk
        pts.push_back(GridPoint{i, j, i * i + j * j});
      }
    }
    std::sort(pts.begin(), pts.end(), [](const GridPoint& a, const GridPoint& b) {
      if (a.r2 != b.r2) return a.r2 < b.r2;
      return angle_less(a, b);
    });
    const double pitch = std::ldexp(1.0, -level);
    for (const GridPoint& p : pts) {
      dense_cache_.push_back(
          Vec2{static_cast<double>(p.i) * pitch, static_cast<double>(p.j) * pitch});
    }
  }
}

Value UnitDisk::dense_value(std::size_t i) const {
  static std::mutex mu;
  std::scoped_lock lock(mu);
  extend_dense(i + 1);
  return dense_cache_[i];
}

// ---- FiniteLabels ----------------------------------------------------------

FiniteLabels::FiniteLabels(std::int64_t n) : n_(n) {
  if (n < 1) throw std::invalid_argument("FiniteLabels: need n >= 1");
  alpha_ = 1.0;
  diameter_ = 1.0;
  anchor_ = std::int64_t{0};
}

std::string FiniteLabels::name() const { return "labels-" + std::to_string(n_); }

double FiniteLabels::distance(const Value& a, const Value& b) const {
  return as_index(a) == as_index(b) ? 0.0 : 1.0;
}

std::vector<Value> FiniteLabels::epsilon_net(double eps) const {
  if (!(eps > 0.0)) throw std::invalid_argument("epsilon_net: eps must be > 0");
  std::vector<Value> net;
  net.reserve(static_cast<std::size_t>(n_));
  for (std::int64_t i = 0; i < n_; ++i) net.push_back(i);
  return net;
}

// ---- CountableClassification ----------------------------------------------

CountableClassification::CountableClassification() {
  alpha_ = 1.0;
  diameter_ = 1.0;
  anchor_ = std::int64_t{0};
}

std::string CountableClassification::name() const { return "countable-classification"; }

double CountableClassification::distance(const Value& a, const Value& b) const {
  return as_index(a) == as_index(b) ? 0.0 : 1.0;
}

Value CountableClassification::dense_value(std::size_t i) const {
  return static_cast<std::int64_t>(i);
}

// ---- Pathological space -----------------------------------------------------

namespace {

std::int64_t patho_n(int k) {
  // n_k = 2k(k-1) + 2^k - 1
  return 2ll * k * (k - 1) + (1ll << k) - 1;
}

}  // namespace

PathoPartition patho_partition(int k) {
  if (k < 1) throw std::invalid_argument("patho_partition: k must be >= 1");
  PathoPartition p;
  p.n_k = patho_n(k);
  p.i_begin = p.n_k;
  p.i_end = p.n_k + 4ll * k;
  p.j_begin = p.i_end;
  p.j_end = patho_n(k + 1);
  return p;
}

int patho_block_of(std::int64_t value) {
  if (value < 0) throw std::invalid_argument("patho_block_of: negative value");
  if (value == 0) return 0;
  int k = 1;
  while (k < 62 && patho_n(k + 1) <= value) ++k;  // n_63 would overflow int64
  return k;
}

double patho_loss(std::int64_t i, std::int64_t j) {
  if (i == j) return 0.0;
  if (i == 0 || j == 0) return 1.0;
  const int ki = patho_block_of(i);
  const int kj = patho_block_of(j);
  if (ki != kj) return 1.0;
  const PathoPartition part = patho_partition(ki);
  // Orient the pair as (element of I_k, element of J_k).
  std::int64_t a = i, b = j;
  if (a >= part.j_begin) std::swap(a, b);
  const bool a_in_I = a < part.i_end;
  const bool b_in_J = b >= part.j_begin;
  if (!a_in_I || !b_in_J) return 1.0;  // same-side pair (I x I or J x J)
  const std::int64_t off = a - part.n_k;
  const std::int64_t u = off / 4;
  const std::int64_t r = off % 4;
  const std::int64_t bit = (b - part.j_begin) >> u & 1;
  if (r <= 1) return (1.0 + static_cast<double>(bit)) / 2.0;
  return (2.0 - static_cast<double>(bit)) / 2.0;
}

PathologicalSpace::PathologicalSpace() {
  alpha_ = 1.0;
  diameter_ = 1.0;
  anchor_ = std::int64_t{0};
}

std::string PathologicalSpace::name() const { return "pathological"; }

double PathologicalSpace::distance(const Value& a, const Value& b) const {
  return patho_loss(as_index(a), as_index(b));
}

Value PathologicalSpace::dense_value(std::size_t i) const {
  return static_cast<std::int64_t>(i);
}

// ---- cell bases ---------------------------------------------------------

bool RealLine::cell_contains(std::size_t cell, const Value& x) const {
  const auto [d, za] = cantor_unpair(cell);
  if (d >= 63) return false;  // narrower than representable spacing
  const std::int64_t a = unzigzag(za);
  const double width = std::ldexp(1.0, -static_cast<int>(d));
  const double lo = static_cast<double>(a) * width;
  const double v = as_real(x);
  return lo <= v && v < lo + width;
}

namespace {

// Heap decomposition: index -> (depth, offset) for an arity^depth-per-level
// complete tree, cell 0 the root.
std::pair<int, std::uint64_t> heap_cell(std::size_t cell, std::uint64_t arity) {
  int d = 0;
  std::uint64_t level = 1, first = 0;
  while (cell >= first + level) {
    first += level;
    if (level > (std::uint64_t{1} << 62) / arity) return {-1, 0};
    level *= arity;
    ++d;
  }
  return {d, cell - first};
}

}  // namespace

bool UnitInterval::cell_contains(std::size_t cell, const Value& x) const {
  const auto [d, a] = heap_cell(cell, 2);
  if (d < 0) return false;
  const double width = std::ldexp(1.0, -d);
  const double lo = static_cast<double>(a) * width;
  const double v = as_real(x);
  const bool top = (a + 1) == (std::uint64_t{1} << d);
  return lo <= v && (v < lo + width || (top && v <= 1.0));
}

bool UnitDisk::cell_contains(std::size_t cell, const Value& x) const {
  const auto [d, idx] = heap_cell(cell, 4);
  if (d < 0) return false;
  const std::uint64_t side = std::uint64_t{1} << d;
  const std::uint64_t a = idx / side, b = idx % side;
  const double width = std::ldexp(2.0, -d);  // squares tile [-1,1]^2
  const double lox = -1.0 + static_cast<double>(a) * width;
  const double loy = -1.0 + static_cast<double>(b) * width;
  const Vec2 v = as_vec2(x);
  const bool in_x = lox <= v.x && (v.x < lox + width || (a + 1 == side && v.x <= 1.0));
  const bool in_y = loy <= v.y && (v.y < loy + width || (b + 1 == side && v.y <= 1.0));
  return in_x && in_y;
}

bool FiniteLabels::cell_contains(std::size_t cell, const Value& x) const {
  return cell < static_cast<std::size_t>(n_) &&
         as_index(x) == static_cast<std::int64_t>(cell);
}

bool CountableClassification::cell_contains(std::size_t cell, const Value& x) const {
  return as_index(x) == static_cast<std::int64_t>(cell);
}

bool PathologicalSpace::cell_contains(std::size_t cell, const Value& x) const {
  return as_index(x) == static_cast<std::int64_t>(cell);
}

// ---- registry ---------------------------------------------------------------

std::shared_ptr<const ValueSpace> make_space(const std::string& name) {
  if (name == "real-line") return std::make_shared<RealLine>(1.0);
  if (name == "real-line-a2") return std::make_shared<RealLine>(2.0);
  if (name == "unit-interval") return std::make_shared<UnitInterval>(1.0);
  if (name == "unit-disk") return std::make_shared<UnitDisk>(1.0);
  if (name == "labels-2") return std::make_shared<FiniteLabels>(2);
  if (name == "labels-3") return std::make_shared<FiniteLabels>(3);
  if (name == "labels-10") return std::make_shared<FiniteLabels>(10);
  if (name == "countable-classification") return std::make_shared<CountableClassification>();
  if (name == "pathological") return std::make_shared<PathologicalSpace>();
  throw std::invalid_argument("unknown space: " + name);
}

}  // namespace metreg
