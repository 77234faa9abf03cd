#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gl0 {

/// 0-1 knapsack instance: maximize sum(values[i] * z[i]) subject to
/// sum(weights[i] * z[i]) <= capacity.
///
/// Values are the per-group gains of a projection and may be zero; weights
/// are the group penalties and must be strictly positive and no larger than
/// the capacity.
struct KnapsackInstance {
  std::vector<double> values;
  std::vector<double> weights;
  double capacity = 0.0;

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }

  /// Throws Error(invalid_argument) describing the first violated invariant.
  void validate() const;
};

struct KnapsackSolution {
  std::vector<std::uint8_t> selection;
  double objective = 0.0;

  /// Selected item indices in increasing order.
  [[nodiscard]] std::vector<std::size_t> selected() const;
  [[nodiscard]] std::string bits() const;
};

/// Objective of a selection, summed in increasing item order.
double selection_value(std::span<const double> values,
                       std::span<const std::uint8_t> selection);

/// True when selection `a` is preferred to `b` among equally valued
/// selections: fewer items first, then the lexicographically smaller sorted
/// index list.
bool tie_preferred(std::span<const std::uint8_t> a,
                   std::span<const std::uint8_t> b);

struct BnbOptions {
  bool dominance_pruning = true;
  /// Absolute slack (scaled by max(1, |incumbent|)) for bound-based pruning.
  double tolerance = 1e-12;
};

struct BnbStats {
  std::uint64_t nodes = 0;
  std::uint64_t bound_prunes = 0;
  std::uint64_t dominance_prunes = 0;
};

/// Exact branch-and-bound. Nodes branch on the critical item of the
/// ratio-sorted free items; the lower bound is the Greedy-Split solution and
/// the upper bound is the fractional critical-item relaxation. Among optimal
/// selections the one ranked first by tie_preferred() is returned.
KnapsackSolution solve_bnb(const KnapsackInstance& inst,
                           const BnbOptions& options = {},
                           BnbStats* stats = nullptr);

/// Weight-indexed dynamic program. Weights and capacity must be positive
/// integers (see scale_to_integers()) and capacity at most kDpCapacityLimit.
KnapsackSolution solve_dp(const KnapsackInstance& inst);

/// Enumerates all 2^n selections; n must not exceed kExhaustiveLimit.
KnapsackSolution solve_exhaustive(const KnapsackInstance& inst);

inline constexpr std::size_t kExhaustiveLimit = 25;
inline constexpr std::int64_t kDpCapacityLimit = 10'000'000;

/// Integer form of rational weights: weights[i] * scale and floor(capacity *
/// scale), where scale is the least common denominator of the weights'
/// best rational approximations.
struct IntegerScaling {
  std::vector<std::int64_t> weights;
  std::int64_t capacity = 0;
  std::int64_t scale = 1;
};

/// Returns nullopt when a weight has no rational approximation with
/// denominator <= max_denominator within relative tolerance 1e-12, or when the
/// scaled capacity exceeds capacity_limit.
std::optional<IntegerScaling> scale_to_integers(
    std::span<const double> weights, double capacity,
    std::int64_t max_denominator = 1'000'000,
    std::int64_t capacity_limit = kDpCapacityLimit);

/// Plain-text instance format: item count, values, weights and capacity on
/// four lines (whitespace separated).
KnapsackInstance parse_knapsack_instance(const std::string& text);
std::string format_knapsack_instance(const KnapsackInstance& inst);

}  // namespace gl0
