#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "gl0/knapsack.hpp"

namespace gl0 {

/// Partition of R^d into contiguous groups w^i of size dims[i], with penalty
/// penalties[i] and aggregate budget m. A point is in C when the penalties of
/// its nonzero groups sum to at most m.
class GroupPartition {
 public:
  /// Rejects empty partitions, nonpositive sizes and nonpositive or non-finite
  /// penalties. A group whose penalty exceeds the budget is kept but is zero
  /// in every point of C.
  GroupPartition(std::vector<std::size_t> dims, std::vector<double> penalties,
                 double budget);

  /// Groups of equal size `group_size` with p_i = d_i; d must be divisible.
  static GroupPartition uniform(std::size_t d, std::size_t group_size,
                                double budget);

  /// Budget from a sparsity level s in (0, 1): m = (1 - s) * d.
  static double budget_for_sparsity(double sparsity, std::size_t d);

  struct Stripped;
  /// Drops groups whose penalty exceeds the budget; such groups are zero in
  /// every point of C. The returned map lists the retained original indices.
  static Stripped strip_oversized(std::vector<std::size_t> dims,
                                  std::vector<double> penalties, double budget);

  [[nodiscard]] std::size_t groups() const noexcept { return dims_.size(); }
  [[nodiscard]] std::size_t dim() const noexcept { return total_; }
  [[nodiscard]] double budget() const noexcept { return budget_; }
  [[nodiscard]] std::span<const std::size_t> dims() const noexcept { return dims_; }
  [[nodiscard]] std::span<const double> penalties() const noexcept {
    return penalties_;
  }
  [[nodiscard]] std::size_t offset(std::size_t group) const { return offsets_[group]; }
  [[nodiscard]] std::size_t size(std::size_t group) const { return dims_[group]; }

  /// Exact integer form of the penalties and budget, when they are rational
  /// with a common denominator of at most 10^6. Feasibility tests, the
  /// projection knapsack and the stationarity program all use it when present.
  [[nodiscard]] const std::optional<IntegerScaling>& integer_form() const noexcept {
    return integer_;
  }

  /// True when the penalties of `groups` fit within the budget.
  [[nodiscard]] bool fits(std::span<const std::size_t> groups) const;

  template <class T>
  [[nodiscard]] std::span<T> block(std::span<T> w, std::size_t group) const {
    return w.subspan(offsets_[group], dims_[group]);
  }

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> penalties_;
  std::vector<std::size_t> offsets_;
  double budget_;
  std::size_t total_ = 0;
  std::optional<IntegerScaling> integer_;
};

struct GroupPartition::Stripped {
  GroupPartition partition;
  std::vector<std::size_t> retained;
};

/// Box radius beta (possibly infinite) and the radius kappa of the l-inf ball
/// on which the loss is Lipschitz.
struct BoxParams {
  double beta = std::numeric_limits<double>::infinity();
  double kappa = std::numeric_limits<double>::infinity();

  [[nodiscard]] bool bounded() const noexcept { return std::isfinite(beta); }
};

/// Rejects nonpositive beta, and kappa <= beta + alpha / 2 when alpha is given.
void validate_box(const BoxParams& box, std::optional<double> alpha = std::nullopt);

/// True iff some component of group i is not exactly zero.
bool group_nonzero(std::span<const double> w, const GroupPartition& part,
                   std::size_t group);

/// Sum of penalties over nonzero groups.
double active_penalty(std::span<const double> w, const GroupPartition& part);
std::size_t active_groups(std::span<const double> w, const GroupPartition& part);

bool is_feasible(std::span<const double> w, const GroupPartition& part,
                 const BoxParams& box);

struct Projection {
  std::vector<double> point;
  KnapsackSolution selection;
  std::vector<double> gains;
};

/// Euclidean projection onto C intersected with the box. Group i is kept with
/// gain ||w^i||^2 - ||max(|w^i| - beta, 0)||^2 when the knapsack selects it,
/// and its components are clamped to [-beta, beta].
Projection project_detailed(std::span<const double> w, const GroupPartition& part,
                            const BoxParams& box, const BnbOptions& options = {});

std::vector<double> project(std::span<const double> w, const GroupPartition& part,
                            const BoxParams& box);

/// I(w), J(w) and, when requested and small enough, the family Y of maximal
/// feasible supersets of I(w). All indices are zero-based and increasing.
struct IndexSets {
  std::vector<std::size_t> nonzero;     // I
  std::vector<std::size_t> addable;     // J
  std::optional<std::vector<std::vector<std::size_t>>> maximal;  // Y

  /// The closed-form normal cone applies when Y = {I}, i.e. J is empty.
  [[nodiscard]] bool closed_form() const noexcept { return addable.empty(); }
};

inline constexpr std::size_t kMaximalSetEnumerationLimit = 25;

/// Throws infeasible_point if w is not in C. Y is enumerated only when
/// `enumerate_maximal` is set and |[n] \ I| <= 25.
IndexSets index_sets(std::span<const double> w, const GroupPartition& part,
                     bool enumerate_maximal = false);

enum class StationarityMethod {
  automatic,    // closed form when J is empty, otherwise the integer program
  integer_program,
  enumerate,    // explicit minimum over Y (oracle route)
};

/// dist(0, G + N(w, C ∩ box)), the limiting normal cone distance.
double stationarity_distance(std::span<const double> gradient,
                             std::span<const double> w, const GroupPartition& part,
                             const BoxParams& box,
                             StationarityMethod method = StationarityMethod::automatic);

/// Membership of y in the regular (Fréchet) normal cone of C ∩ box at w.
bool frechet_cone_contains(std::span<const double> y, std::span<const double> w,
                           const GroupPartition& part, const BoxParams& box);

}  // namespace gl0
