// Metric/loss abstractions for instance and value spaces.
//
// A ValueSpace is a metric rho together with a power exponent alpha >= 1;
// the loss is loss(a,b) = rho(a,b)^alpha. Optional capabilities: a sup-loss
// bound (absent = unbounded loss), an epsilon-net provider (totally bounded
// spaces), and a dense sequence y^0, y^1, ... used by the mean-estimation
// and countable-family learners.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "metreg/value.hpp"

namespace metreg {

// Ceiling with a tiny downward nudge first, so float noise in expressions
// like e^2 never bumps the result up a step.
std::int64_t nudged_ceil(double x);

// d^alpha with exact fast paths for the common exponents.
double power_loss(double distance, double alpha);

// The constant c with (a+b)^alpha <= (1+eps) a^alpha + c b^alpha for all
// a,b >= 0, namely c = (1 + 1/((1+eps)^{1/alpha} - 1))^alpha. Also satisfies
// c <= (4 alpha / eps)^alpha. Requires alpha >= 1 and 0 < eps <= 1.
double relaxed_triangle_constant(double alpha, double eps);

// Cantor pairing bijection N^2 <-> N and the zigzag bijection Z <-> N,
// used to index countable cell bases.
std::uint64_t cantor_pair(std::uint64_t a, std::uint64_t b);
std::pair<std::uint64_t, std::uint64_t> cantor_unpair(std::uint64_t z);
std::uint64_t zigzag(std::int64_t a);
std::int64_t unzigzag(std::uint64_t z);

class MissingCapability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValueSpace {
 public:
  virtual ~ValueSpace() = default;

  virtual std::string name() const = 0;
  virtual double distance(const Value& a, const Value& b) const = 0;

  double loss(const Value& a, const Value& b) const {
    return power_loss(distance(a, b), alpha_);
  }

  double alpha() const { return alpha_; }

  // Supremum of the loss (absent = unbounded).
  std::optional<double> diameter() const { return diameter_; }
  double sup_loss() const;  // throws MissingCapability when unbounded

  // Finite cover of the space at metric radius <= eps.
  virtual bool has_net() const { return false; }
  virtual std::vector<Value> epsilon_net(double eps) const;

  // Dense sequence y^0, y^1, ...; y^0 always equals anchor().
  virtual bool has_dense_sequence() const { return false; }
  virtual Value dense_value(std::size_t i) const;

  // Countable basis of measurable cells (dyadic intervals, quadtree squares,
  // or singletons) used by the countable function family.
  virtual bool has_cell_basis() const { return false; }
  virtual bool cell_contains(std::size_t cell, const Value& x) const;

  const Value& anchor() const { return anchor_; }

 protected:
  double alpha_{1.0};
  std::optional<double> diameter_{};
  Value anchor_{0.0};
};

// The real line with loss |a-b|^alpha; unbounded, dense sequence = 0 then
// the signed dyadic rationals in diagonal order (0, 1, -1, 1/2, -1/2, 2, ...).
class RealLine final : public ValueSpace {
 public:
  explicit RealLine(double alpha = 1.0);
  std::string name() const override;
  double distance(const Value& a, const Value& b) const override;
  bool has_dense_sequence() const override { return true; }
  Value dense_value(std::size_t i) const override;
  // Cells: [a 2^{-d}, (a+1) 2^{-d}) for d >= 0, a in Z, indexed by
  // cantor_pair(d, zigzag(a)).
  bool has_cell_basis() const override { return true; }
  bool cell_contains(std::size_t cell, const Value& x) const override;
};

// [0,1] with loss |a-b|^alpha; nets by uniform gridding; dense sequence
// 0, 1, then dyadic midpoints level by level.
class UnitInterval final : public ValueSpace {
 public:
  explicit UnitInterval(double alpha = 1.0);
  std::string name() const override;
  double distance(const Value& a, const Value& b) const override;
  bool has_net() const override { return true; }
  std::vector<Value> epsilon_net(double eps) const override;
  bool has_dense_sequence() const override { return true; }
  Value dense_value(std::size_t i) const override;
  // Cells: heap order over dyadic subintervals; cell 0 = [0,1], cells 1,2 the
  // halves, 3..6 the quarters, and so on (the top-end cell is right-closed).
  bool has_cell_basis() const override { return true; }
  bool cell_contains(std::size_t cell, const Value& x) const override;
};

// Closed unit disk in the plane with Euclidean metric loss; nets by square
// gridding projected onto the disk; dense sequence = center, then dyadic
// grid points emitted level by level, each level ordered by radius then
// angle (so (0,0) is y^0 and (1,0) is y^1).
class UnitDisk final : public ValueSpace {
 public:
  explicit UnitDisk(double alpha = 1.0);
  std::string name() const override;
  double distance(const Value& a, const Value& b) const override;
  bool has_net() const override { return true; }
  std::vector<Value> epsilon_net(double eps) const override;
  bool has_dense_sequence() const override { return true; }
  Value dense_value(std::size_t i) const override;
  // Cells: quadtree squares over [-1,1]^2 in heap order (cell 0 = the whole
  // square, then the four quadrants, then sixteen, ...).
  bool has_cell_basis() const override { return true; }
  bool cell_contains(std::size_t cell, const Value& x) const override;

 private:
  void extend_dense(std::size_t count) const;
  mutable std::vector<Vec2> dense_cache_;
  mutable int next_level_{0};
};

// {0, ..., n-1} with 0-1 loss; its own epsilon-net.
class FiniteLabels final : public ValueSpace {
 public:
  explicit FiniteLabels(std::int64_t n);
  std::string name() const override;
  double distance(const Value& a, const Value& b) const override;
  bool has_net() const override { return true; }
  std::vector<Value> epsilon_net(double eps) const override;
  // Cells: singletons {0}, {1}, ...; empty beyond the label count.
  bool has_cell_basis() const override { return true; }
  bool cell_contains(std::size_t cell, const Value& x) const override;
  std::int64_t size() const { return n_; }

 private:
  std::int64_t n_;
};

// The naturals with 0-1 loss: bounded loss but not totally bounded.
class CountableClassification final : public ValueSpace {
 public:
  CountableClassification();
  std::string name() const override;
  double distance(const Value& a, const Value& b) const override;
  bool has_dense_sequence() const override { return true; }
  Value dense_value(std::size_t i) const override;
  bool has_cell_basis() const override { return true; }  // singletons
  bool cell_contains(std::size_t cell, const Value& x) const override;
};

// ---- Pathological countable metric space --------------------------------
//
// The naturals, partitioned as {0} together with blocks I_k (size 4k) and
// J_k (size 2^k) for k >= 1, where n_k = 2k(k-1) + 2^k - 1 and
// I_k = [n_k, n_k + 4k), J_k = [n_k + 4k, n_{k+1}). Within a block pair,
// for i = n_k + 4u + r in I_k and j in J_k with b = bit u of j - n_k - 4k:
// the loss is (1+b)/2 when r in {0,1} and (2-b)/2 when r in {2,3}; every
// other distinct pair has loss 1. All values lie in {0, 1/2, 1} and the
// result is a genuine metric.

struct PathoPartition {
  std::int64_t n_k;      // block start
  std::int64_t i_begin;  // I_k = [i_begin, i_end)
  std::int64_t i_end;
  std::int64_t j_begin;  // J_k = [j_begin, j_end)
  std::int64_t j_end;
};

PathoPartition patho_partition(int k);
double patho_loss(std::int64_t i, std::int64_t j);
// Block index k with value in I_k or J_k; 0 for the special point 0.
int patho_block_of(std::int64_t value);

class PathologicalSpace final : public ValueSpace {
 public:
  PathologicalSpace();
  std::string name() const override;
  double distance(const Value& a, const Value& b) const override;
  bool has_dense_sequence() const override { return true; }
  Value dense_value(std::size_t i) const override;
  bool has_cell_basis() const override { return true; }  // singletons
  bool cell_contains(std::size_t cell, const Value& x) const override;
};

// Registry used by the CLI and scenario code.
std::shared_ptr<const ValueSpace> make_space(const std::string& name);

}  // namespace metreg
