#include "metreg/c1nn.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace metreg {

C1nnProcess::C1nnProcess(Metric metric, double delta, RngStream rng)
    : metric_(std::move(metric)), delta_(delta), rng_(std::move(rng)) {
  if (!(delta_ > 0.0 && delta_ <= 1.0))
    throw std::invalid_argument("C1nnProcess: delta must be in (0,1]");
}

std::size_t C1nnProcess::nearest_open(const Value& x) const {
  if (dataset_.empty())
    throw std::logic_error("C1nnProcess: dataset exhausted during search");
  double best = std::numeric_limits<double>::infinity();
  std::size_t who = 0;
  for (const std::size_t u : dataset_) {
    const double d = metric_(x, instances_[u - 1]);
    if (d < best) {  // dataset_ is increasing, so '<' keeps the smallest time
      best = d;
      who = u;
    }
  }
  return who;
}

C1nnStep C1nnProcess::step(const Value& x) {
  instances_.push_back(x);
  const std::size_t t = instances_.size();
  children_.push_back(0);
  revealed_.push_back(0);
  depth_.push_back(0);
  parent_.push_back(0);

  C1nnStep out;
  out.t = t;

  auto [it, fresh] = seen_.try_emplace(x, t);
  if (!fresh) {
    // Memorization: answer from the first occurrence, state untouched.
    const std::size_t u = it->second;
    out.duplicate = true;
    out.source = u;
    out.prior_occurrences = ++occurrence_count_[u];
    first_occurrence_.push_back(u);
    prior_occurrences_.push_back(out.prior_occurrences);
    return out;
  }
  first_occurrence_.push_back(t);
  prior_occurrences_.push_back(0);
  occurrence_count_[t] = 0;

  if (t == 1) {
    dataset_.push_back(1);
    events_.push_back({C1nnEventKind::kAccept, 1, 1, 0, 0, false, false});
    return out;  // source 0, depth 0
  }

  // Search for an open parent, closing saturated candidates along the way.
  std::size_t phi = 0;
  for (;;) {
    phi = nearest_open(x);
    if (children_[phi - 1] == 0) break;  // free slot: accept directly
    if (children_[phi - 1] != 1 || revealed_[phi - 1])
      throw std::logic_error("C1nnProcess: challenged a closed point");
    revealed_[phi - 1] = 1;
    const bool coin = rng_.bernoulli(delta_);
    coin_log_.push_back(coin ? 1 : 0);
    std::erase(dataset_, phi);
    if (coin) {
      // Second child accepted; the parent retires saturated.
      children_[phi - 1] = 2;
      events_.push_back({C1nnEventKind::kRetirement, t, phi, 0, 2, true, true});
      break;
    }
    events_.push_back({C1nnEventKind::kRejectionRemoval, t, phi, 0, 1, false, true});
  }

  if (children_[phi - 1] == 0) ++children_[phi - 1];  // first child
  depth_[t - 1] = depth_[phi - 1] + 1;
  parent_[t - 1] = phi;
  dataset_.push_back(t);
  events_.push_back(
      {C1nnEventKind::kAccept, t, t, phi, children_[phi - 1], false, false});

  // The newest point is open with no children, so the dataset can never
  // run dry; fail loudly if that ever stops being true.
  if (dataset_.empty()) throw std::logic_error("C1nnProcess: empty dataset");

  out.source = phi;
  out.depth = depth_[t - 1];
  return out;
}

std::size_t C1nnProcess::depth_of(std::size_t t) const {
  if (!is_new_instance(t))
    throw std::invalid_argument("depth_of: not a new-instance time");
  return depth_.at(t - 1);
}

std::size_t C1nnProcess::parent_of(std::size_t t) const {
  if (!is_new_instance(t))
    throw std::invalid_argument("parent_of: not a new-instance time");
  return parent_.at(t - 1);
}

std::size_t C1nnProcess::ancestor(std::size_t t, std::size_t steps) const {
  std::size_t v = t;
  for (std::size_t i = 0; i < steps && parent_.at(v - 1) != 0; ++i) v = parent_[v - 1];
  return v;
}

std::optional<std::string> c1nn_audit(const C1nnProcess& process) {
  const std::size_t T = process.time();
  std::vector<std::size_t> children(T + 1, 0);
  std::vector<bool> open(T + 1, false), closed(T + 1, false);
  std::size_t open_count = 0, unsaturated = 0, coins_seen = 0;
  const auto& log = process.events();
  auto fail = [](std::size_t t, const std::string& what) {
    std::ostringstream os;
    os << "round " << t << ": " << what;
    return std::optional<std::string>(os.str());
  };

  for (std::size_t idx = 0; idx < log.size(); ++idx) {
    const C1nnEvent& e = log[idx];
    if (e.coin_consumed) {
      if (coins_seen >= process.coin_log().size() ||
          process.coin_log()[coins_seen] != (e.coin ? 1 : 0))
        return fail(e.t, "coin log out of step with the event log");
      ++coins_seen;
    }
    switch (e.kind) {
      case C1nnEventKind::kAccept: {
        if (open[e.u] || closed[e.u]) return fail(e.t, "accepted point not fresh");
        if (e.u == 1) {
          if (e.parent != 0) return fail(e.t, "root must have no parent");
        } else {
          if (e.parent == 0 || e.parent >= e.u)
            return fail(e.t, "accepted edge must point to an earlier round");
          if (open[e.parent]) {
            if (children[e.parent] != 0)
              return fail(e.t, "open parent already had a child");
            children[e.parent] = 1;
            --unsaturated;
          } else if (closed[e.parent]) {
            // Only legal straight after that parent's retirement this round.
            if (idx == 0 || log[idx - 1].kind != C1nnEventKind::kRetirement ||
                log[idx - 1].u != e.parent || log[idx - 1].t != e.t)
              return fail(e.t, "closed parent without an immediate retirement");
          } else {
            return fail(e.t, "parent never entered the dataset");
          }
          if (children[e.parent] != e.children)
            return fail(e.t, "recorded parent child count mismatch");
          if (process.depth_of(e.u) != process.depth_of(e.parent) + 1)
            return fail(e.t, "depth does not increment along the edge");
          if (process.parent_of(e.u) != e.parent)
            return fail(e.t, "stored parent disagrees with the event log");
        }
        open[e.u] = true;
        ++open_count;
        ++unsaturated;
        break;
      }
      case C1nnEventKind::kRejectionRemoval: {
        if (!open[e.u]) return fail(e.t, "removed a point that was not open");
        if (children[e.u] != 1 || e.children != 1)
          return fail(e.t, "rejection removal requires exactly one child");
        if (!e.coin_consumed || e.coin) return fail(e.t, "rejection without a failed coin");
        open[e.u] = false;
        closed[e.u] = true;
        --open_count;
        // The search continues on the shrunken dataset, which must survive.
        if (open_count == 0) return fail(e.t, "dataset ran empty during search");
        break;
      }
      case C1nnEventKind::kRetirement: {
        if (!open[e.u]) return fail(e.t, "retired a point that was not open");
        if (children[e.u] != 1) return fail(e.t, "retirement requires a prior child");
        if (e.children != 2) return fail(e.t, "retirement must record two children");
        if (!e.coin_consumed || !e.coin) return fail(e.t, "retirement without a passed coin");
        children[e.u] = 2;
        open[e.u] = false;
        closed[e.u] = true;  // the paired accept follows immediately
        --open_count;
        break;
      }
    }
  }

  if (coins_seen != process.coin_log().size())
    return fail(T, "coin log longer than the consuming events");
  if (unsaturated == 0 && T > 0)
    return fail(T, "no unsaturated point left in the dataset");

  // Cross-check the replayed dataset and counters against the live state.
  std::vector<std::size_t> replayed;
  for (std::size_t u = 1; u <= T; ++u) {
    if (open[u]) replayed.push_back(u);
    if (!open[u] && !closed[u]) continue;  // duplicates never enter the log
    if (children[u] != process.children_count(u))
      return fail(T, "final child count mismatch");
    if (children[u] > 2) return fail(T, "child count exceeded two");
  }
  if (replayed != process.dataset()) return fail(T, "final dataset mismatch");

  for (std::size_t t = 1; t <= T; ++t)
    if (!process.is_new_instance(t)) {
      const std::size_t u = process.first_occurrence(t);
      if (u >= t || !process.is_new_instance(u))
        return fail(t, "duplicate must point at an earlier first occurrence");
      if (open[t] || closed[t] || process.children_count(t) != 0)
        return fail(t, "duplicate round touched the tree");
    }

  return std::nullopt;
}

C1nnLearner::C1nnLearner(std::shared_ptr<const ValueSpace> instance_space,
                         double delta, RngStream rng, Value default_prediction)
    : process_([space = std::move(instance_space)](const Value& a, const Value& b) {
                 return space->distance(a, b);
               },
               delta, std::move(rng)),
      delta_(delta),
      default_prediction_(std::move(default_prediction)) {}

std::string C1nnLearner::name() const {
  return "c1nn(delta=" + std::to_string(delta_) + ")";
}

Value C1nnLearner::predict(const Value& x) {
  const C1nnStep s = process_.step(x);
  if (s.source == 0) return default_prediction_;
  return responses_.at(s.source - 1);
}

void C1nnLearner::observe(const Value& y) {
  responses_.push_back(y);
  if (responses_.size() != process_.time())
    throw std::logic_error("C1nnLearner: observe/predict out of sync");
}

}  // namespace metreg
