#include "gl0/constraint.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "gl0/error.hpp"

namespace gl0 {

namespace {

// Penalty arithmetic is carried out on exact integers whenever the partition
// admits an integer form, so feasibility, projection and the stationarity
// program all agree on borderline budgets.
constexpr std::int64_t kPartitionScaleLimit = std::int64_t{1} << 50;

int sign(double x) { return (x > 0.0) - (x < 0.0); }

void check_dim(std::span<const double> v, const GroupPartition& part,
               const char* what) {
  require(v.size() == part.dim(), Errc::dimension_mismatch,
          fmt::format("{}: length {} does not match partition dimension {}", what,
                      v.size(), part.dim()));
}

}  // namespace

GroupPartition::GroupPartition(std::vector<std::size_t> dims,
                               std::vector<double> penalties, double budget)
    : dims_(std::move(dims)), penalties_(std::move(penalties)), budget_(budget) {
  require(!dims_.empty(), Errc::invalid_argument, "partition: no groups");
  require(dims_.size() == penalties_.size(), Errc::invalid_argument,
          fmt::format("partition: {} group sizes but {} penalties", dims_.size(),
                      penalties_.size()));
  require(std::isfinite(budget_) && budget_ > 0.0, Errc::invalid_argument,
          fmt::format("partition: budget must be positive and finite, got {}",
                      budget_));
  offsets_.reserve(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    require(dims_[i] > 0, Errc::invalid_argument,
            fmt::format("partition: group {} has size 0", i));
    require(std::isfinite(penalties_[i]) && penalties_[i] > 0.0,
            Errc::invalid_argument,
            fmt::format("partition: penalty[{}] = {} is not positive", i,
                        penalties_[i]));
    offsets_.push_back(total_);
    total_ += dims_[i];
  }
  integer_ = scale_to_integers(penalties_, budget_, 1'000'000, kPartitionScaleLimit);
}

GroupPartition GroupPartition::uniform(std::size_t d, std::size_t group_size,
                                       double budget) {
  require(group_size > 0 && d % group_size == 0, Errc::invalid_argument,
          fmt::format("partition: dimension {} is not a multiple of group size {}",
                      d, group_size));
  const std::size_t n = d / group_size;
  return {std::vector<std::size_t>(n, group_size),
          std::vector<double>(n, static_cast<double>(group_size)), budget};
}

double GroupPartition::budget_for_sparsity(double sparsity, std::size_t d) {
  require(sparsity > 0.0 && sparsity < 1.0, Errc::invalid_argument,
          fmt::format("sparsity must lie in (0, 1), got {}", sparsity));
  return (1.0 - sparsity) * static_cast<double>(d);
}

GroupPartition::Stripped GroupPartition::strip_oversized(
    std::vector<std::size_t> dims, std::vector<double> penalties, double budget) {
  require(dims.size() == penalties.size(), Errc::invalid_argument,
          "partition: group sizes and penalties differ in length");
  std::vector<std::size_t> kept_dims;
  std::vector<double> kept_penalties;
  std::vector<std::size_t> retained;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (penalties[i] <= budget) {
      kept_dims.push_back(dims[i]);
      kept_penalties.push_back(penalties[i]);
      retained.push_back(i);
    }
  }
  return {GroupPartition(std::move(kept_dims), std::move(kept_penalties), budget),
          std::move(retained)};
}

bool GroupPartition::fits(std::span<const std::size_t> groups) const {
  if (integer_) {
    std::int64_t used = 0;
    for (auto g : groups) used += integer_->weights[g];
    return used <= integer_->capacity;
  }
  double used = 0.0;
  for (auto g : groups) used += penalties_[g];
  return used <= budget_;
}

void validate_box(const BoxParams& box, std::optional<double> alpha) {
  require(box.beta > 0.0, Errc::infeasible_config,
          fmt::format("box radius beta must be positive, got {}", box.beta));
  require(box.kappa > 0.0, Errc::infeasible_config,
          fmt::format("kappa must be positive, got {}", box.kappa));
  if (alpha && box.bounded()) {
    require(*alpha > 0.0, Errc::infeasible_config,
            fmt::format("smoothing radius alpha must be positive, got {}", *alpha));
    require(box.kappa > box.beta + *alpha / 2.0, Errc::infeasible_config,
            fmt::format("kappa = {} must exceed beta + alpha/2 = {}", box.kappa,
                        box.beta + *alpha / 2.0));
  }
}

bool group_nonzero(std::span<const double> w, const GroupPartition& part,
                   std::size_t group) {
  const auto block = part.block(w, group);
  return std::any_of(block.begin(), block.end(), [](double x) { return x != 0.0; });
}

double active_penalty(std::span<const double> w, const GroupPartition& part) {
  check_dim(w, part, "active_penalty");
  double total = 0.0;
  for (std::size_t i = 0; i < part.groups(); ++i) {
    if (group_nonzero(w, part, i)) total += part.penalties()[i];
  }
  return total;
}

std::size_t active_groups(std::span<const double> w, const GroupPartition& part) {
  check_dim(w, part, "active_groups");
  std::size_t count = 0;
  for (std::size_t i = 0; i < part.groups(); ++i) count += group_nonzero(w, part, i);
  return count;
}

namespace {

std::vector<std::size_t> nonzero_groups(std::span<const double> w,
                                        const GroupPartition& part) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < part.groups(); ++i) {
    if (group_nonzero(w, part, i)) out.push_back(i);
  }
  return out;
}

bool in_box(std::span<const double> w, const BoxParams& box) {
  return std::all_of(w.begin(), w.end(),
                     [&](double x) { return std::abs(x) <= box.beta; });
}

}  // namespace

bool is_feasible(std::span<const double> w, const GroupPartition& part,
                 const BoxParams& box) {
  check_dim(w, part, "is_feasible");
  return in_box(w, box) && part.fits(nonzero_groups(w, part));
}

Projection project_detailed(std::span<const double> w, const GroupPartition& part,
                            const BoxParams& box, const BnbOptions& options) {
  check_dim(w, part, "project");
  for (double x : w) {
    require(!std::isnan(x), Errc::invalid_argument, "project: input contains NaN");
  }
  const std::size_t n = part.groups();
  Projection out;
  out.gains.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // x^2 - max(|x| - beta, 0)^2 per component, written without cancellation.
    double gain = 0.0;
    for (double x : part.block(w, i)) {
      const double a = std::abs(x);
      gain += a <= box.beta ? a * a : box.beta * (2.0 * a - box.beta);
    }
    out.gains[i] = gain;
  }

  // Groups heavier than the budget are zero in every point of C and never
  // enter the knapsack.
  KnapsackInstance inst;
  std::vector<std::size_t> items;
  const auto& integer = part.integer_form();
  inst.capacity = integer ? static_cast<double>(integer->capacity) : part.budget();
  for (std::size_t i = 0; i < n; ++i) {
    const double weight =
        integer ? static_cast<double>(integer->weights[i]) : part.penalties()[i];
    if (weight > inst.capacity) continue;
    items.push_back(i);
    inst.values.push_back(out.gains[i]);
    inst.weights.push_back(weight);
  }
  out.selection.selection.assign(n, 0);
  out.selection.objective = 0.0;
  if (!items.empty()) {
    const KnapsackSolution reduced = solve_bnb(inst, options);
    out.selection.objective = reduced.objective;
    for (std::size_t k = 0; k < items.size(); ++k) {
      out.selection.selection[items[k]] = reduced.selection[k];
    }
  }

  out.point.assign(w.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.selection.selection[i]) continue;
    const std::size_t off = part.offset(i);
    for (std::size_t j = 0; j < part.size(i); ++j) {
      const double x = w[off + j];
      out.point[off + j] = sign(x) * std::min(std::abs(x), box.beta);
    }
  }
  return out;
}

std::vector<double> project(std::span<const double> w, const GroupPartition& part,
                            const BoxParams& box) {
  return project_detailed(w, part, box).point;
}

namespace {

// Maximal feasible supersets of `base` built from `candidates`, by
// depth-first search in increasing index order.
class MaximalSetEnumerator {
 public:
  MaximalSetEnumerator(const GroupPartition& part, std::vector<std::size_t> base,
                       std::vector<std::size_t> candidates)
      : part_(part), current_(std::move(base)), candidates_(std::move(candidates)) {}

  std::vector<std::vector<std::size_t>> run() {
    recurse(0);
    for (auto& x : found_) std::sort(x.begin(), x.end());
    std::sort(found_.begin(), found_.end());
    return std::move(found_);
  }

 private:
  void recurse(std::size_t pos) {
    if (pos == candidates_.size()) {
      if (is_maximal()) found_.push_back(current_);
      return;
    }
    current_.push_back(candidates_[pos]);
    if (part_.fits(current_)) recurse(pos + 1);
    current_.pop_back();
    recurse(pos + 1);
  }

  bool is_maximal() {
    for (auto c : candidates_) {
      if (std::find(current_.begin(), current_.end(), c) != current_.end()) continue;
      current_.push_back(c);
      const bool extendable = part_.fits(current_);
      current_.pop_back();
      if (extendable) return false;
    }
    return true;
  }

  const GroupPartition& part_;
  std::vector<std::size_t> current_;
  std::vector<std::size_t> candidates_;
  std::vector<std::vector<std::size_t>> found_;
};

}  // namespace

IndexSets index_sets(std::span<const double> w, const GroupPartition& part,
                     bool enumerate_maximal) {
  check_dim(w, part, "index_sets");
  IndexSets sets;
  sets.nonzero = nonzero_groups(w, part);
  require(part.fits(sets.nonzero), Errc::infeasible_point,
          "index_sets: point violates the group budget");
  std::vector<std::size_t> probe = sets.nonzero;
  for (std::size_t j = 0; j < part.groups(); ++j) {
    if (std::binary_search(sets.nonzero.begin(), sets.nonzero.end(), j)) continue;
    probe.push_back(j);
    if (part.fits(probe)) sets.addable.push_back(j);
    probe.pop_back();
  }
  const std::size_t free_count = part.groups() - sets.nonzero.size();
  if (enumerate_maximal && free_count <= kMaximalSetEnumerationLimit) {
    sets.maximal = MaximalSetEnumerator(part, sets.nonzero, sets.addable).run();
  }
  return sets;
}

namespace {

struct StationarityTerms {
  double fixed = 0.0;               // squared residual forced on I
  std::vector<double> free_cost;    // ||G^i||^2 for every group
};

StationarityTerms stationarity_terms(std::span<const double> g,
                                     std::span<const double> w,
                                     const GroupPartition& part, const BoxParams& box,
                                     const IndexSets& sets) {
  StationarityTerms t;
  t.free_cost.assign(part.groups(), 0.0);
  for (std::size_t i = 0; i < part.groups(); ++i) {
    const std::size_t off = part.offset(i);
    double total = 0.0;
    for (std::size_t j = 0; j < part.size(i); ++j) total += g[off + j] * g[off + j];
    t.free_cost[i] = total;
  }
  for (std::size_t i : sets.nonzero) {
    const std::size_t off = part.offset(i);
    for (std::size_t j = 0; j < part.size(i); ++j) {
      const double wi = w[off + j];
      const double gi = g[off + j];
      const bool boundary_absorbs =
          std::abs(wi) == box.beta && sign(gi) == -sign(wi);
      if (!boundary_absorbs) t.fixed += gi * gi;
    }
  }
  return t;
}

// min sum cost_i z_i over z on the addable groups, subject to the budget and
// maximality of I ∪ {i : z_i = 1}. Integer penalties make maximality exact:
// a group j outside the set must satisfy used + p_j >= floor(m) + 1.
class StationarityProgram {
 public:
  StationarityProgram(const IntegerScaling& scaled, std::int64_t base_used,
                      std::vector<std::size_t> candidates,
                      std::span<const double> cost, bool bound_pruning)
      : weights_(scaled.weights),
        capacity_(scaled.capacity),
        base_used_(base_used),
        cost_(cost),
        bound_pruning_(bound_pruning) {
    // Cheap groups first so a good incumbent appears early.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return cost[a] < cost[b]; });
    candidates_ = std::move(candidates);
    chosen_.assign(candidates_.size(), 0);
  }

  double solve() {
    recurse(0, base_used_, 0.0);
    return best_;
  }

 private:
  void recurse(std::size_t pos, std::int64_t used, double partial) {
    if (bound_pruning_ && partial >= best_) return;
    if (pos == candidates_.size()) {
      if (maximal(used) && partial < best_) best_ = partial;
      return;
    }
    const std::size_t g = candidates_[pos];
    if (used + weights_[g] <= capacity_) {
      chosen_[pos] = 1;
      recurse(pos + 1, used + weights_[g], partial + cost_[g]);
      chosen_[pos] = 0;
    }
    recurse(pos + 1, used, partial);
  }

  [[nodiscard]] bool maximal(std::int64_t used) const {
    for (std::size_t k = 0; k < candidates_.size(); ++k) {
      if (chosen_[k]) continue;
      if (used + weights_[candidates_[k]] < capacity_ + 1) return false;
    }
    return true;
  }

  std::span<const std::int64_t> weights_;
  std::int64_t capacity_;
  std::int64_t base_used_;
  std::span<const double> cost_;
  bool bound_pruning_;
  std::vector<std::size_t> candidates_;
  std::vector<std::uint8_t> chosen_;
  double best_ = std::numeric_limits<double>::infinity();
};

}  // namespace

double stationarity_distance(std::span<const double> gradient,
                             std::span<const double> w, const GroupPartition& part,
                             const BoxParams& box, StationarityMethod method) {
  check_dim(gradient, part, "stationarity_distance(G)");
  check_dim(w, part, "stationarity_distance(w)");
  require(is_feasible(w, part, box), Errc::infeasible_point,
          "stationarity_distance: w is not in C ∩ box");

  const bool enumerate = method == StationarityMethod::enumerate;
  const IndexSets sets = index_sets(w, part, enumerate);
  const StationarityTerms terms = stationarity_terms(gradient, w, part, box, sets);

  if (enumerate) {
    require(sets.maximal.has_value(), Errc::limit_exceeded,
            fmt::format("stationarity_distance: {} free groups exceed the "
                        "enumeration limit {}",
                        part.groups() - sets.nonzero.size(),
                        kMaximalSetEnumerationLimit));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& x : *sets.maximal) {
      double extra = 0.0;
      for (std::size_t i : x) {
        if (!std::binary_search(sets.nonzero.begin(), sets.nonzero.end(), i)) {
          extra += terms.free_cost[i];
        }
      }
      best = std::min(best, extra);
    }
    return std::sqrt(terms.fixed + best);
  }

  // Y = {I}: every group outside I is unconstrained in the cone.
  if (sets.closed_form()) return std::sqrt(terms.fixed);

  const auto& scaled = part.integer_form();
  require(scaled.has_value(), Errc::invalid_argument,
          "stationarity_distance: penalties have no exact rational form; the "
          "integer program needs rational penalties");
  std::int64_t base_used = 0;
  for (std::size_t i : sets.nonzero) base_used += scaled->weights[i];
  const std::size_t free_count = part.groups() - sets.nonzero.size();
  StationarityProgram program(*scaled, base_used, sets.addable, terms.free_cost,
                              free_count > kMaximalSetEnumerationLimit);
  return std::sqrt(terms.fixed + program.solve());
}

bool frechet_cone_contains(std::span<const double> y, std::span<const double> w,
                           const GroupPartition& part, const BoxParams& box) {
  check_dim(y, part, "frechet_cone_contains(y)");
  require(is_feasible(w, part, box), Errc::infeasible_point,
          "frechet_cone_contains: w is not in C ∩ box");
  const IndexSets sets = index_sets(w, part);
  auto check_group = [&](std::size_t i) {
    const std::size_t off = part.offset(i);
    for (std::size_t j = 0; j < part.size(i); ++j) {
      const double wi = w[off + j];
      const double yi = y[off + j];
      if (wi == box.beta) {
        if (yi < 0.0) return false;
      } else if (wi == -box.beta) {
        if (yi > 0.0) return false;
      } else if (yi != 0.0) {
        return false;
      }
    }
    return true;
  };
  for (std::size_t i : sets.nonzero) {
    if (!check_group(i)) return false;
  }
  for (std::size_t i : sets.addable) {
    if (!check_group(i)) return false;
  }
  return true;
}

}  // namespace gl0
