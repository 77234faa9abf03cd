#include "gl0/knapsack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "gl0/error.hpp"

namespace gl0 {

void KnapsackInstance::validate() const {
  require(values.size() == weights.size(), Errc::invalid_argument,
          fmt::format("knapsack: {} values but {} weights", values.size(),
                      weights.size()));
  require(std::isfinite(capacity) && capacity > 0.0, Errc::invalid_argument,
          fmt::format("knapsack: capacity must be positive and finite, got {}",
                      capacity));
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(std::isfinite(values[i]) && values[i] >= 0.0,
            Errc::invalid_argument,
            fmt::format("knapsack: value[{}] = {} is negative or not finite",
                        i, values[i]));
    require(std::isfinite(weights[i]) && weights[i] > 0.0,
            Errc::invalid_argument,
            fmt::format("knapsack: weight[{}] = {} is not positive", i,
                        weights[i]));
    require(weights[i] <= capacity, Errc::invalid_argument,
            fmt::format("knapsack: weight[{}] = {} exceeds capacity {}", i,
                        weights[i], capacity));
  }
}

std::vector<std::size_t> KnapsackSolution::selected() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < selection.size(); ++i) {
    if (selection[i]) out.push_back(i);
  }
  return out;
}

std::string KnapsackSolution::bits() const {
  std::string s;
  s.reserve(selection.size());
  for (auto b : selection) s.push_back(b ? '1' : '0');
  return s;
}

double selection_value(std::span<const double> values,
                       std::span<const std::uint8_t> selection) {
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (selection[i]) total += values[i];
  }
  return total;
}

bool tie_preferred(std::span<const std::uint8_t> a,
                   std::span<const std::uint8_t> b) {
  const auto count_a = std::count(a.begin(), a.end(), std::uint8_t{1});
  const auto count_b = std::count(b.begin(), b.end(), std::uint8_t{1});
  if (count_a != count_b) return count_a < count_b;
  // Equal cardinality: the first differing index decides, and the list that
  // contains it is the lexicographically smaller one.
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return false;
}

namespace {

double scaled_tolerance(double tolerance, double reference) {
  return tolerance * std::max(1.0, std::abs(reference));
}

// True when (value_a, sel_a) should replace (value_b, sel_b).
bool better(double value_a, std::span<const std::uint8_t> sel_a,
            double value_b, std::span<const std::uint8_t> sel_b,
            double tolerance) {
  const double tol = scaled_tolerance(tolerance, value_b);
  if (value_a > value_b + tol) return true;
  if (value_a < value_b - tol) return false;
  return tie_preferred(sel_a, sel_b);
}

class BranchAndBound {
 public:
  BranchAndBound(const KnapsackInstance& inst, const BnbOptions& options)
      : inst_(inst), options_(options), n_(inst.size()) {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) {
                       return inst_.values[a] * inst_.weights[b] >
                              inst_.values[b] * inst_.weights[a];
                     });
    status_.assign(n_, kFree);
    // Zero-valued items never belong to the preferred optimum.
    for (std::size_t i = 0; i < n_; ++i) {
      if (inst_.values[i] == 0.0) status_[i] = kOut;
    }
    best_.selection.assign(n_, 0);
    best_.objective = 0.0;
    scratch_.assign(n_, 0);
  }

  KnapsackSolution run(BnbStats* stats) {
    explore(inst_.capacity, 0.0);
    if (stats) *stats = stats_;
    return best_;
  }

 private:
  static constexpr std::int8_t kFree = -1;
  static constexpr std::int8_t kOut = 0;
  static constexpr std::int8_t kIn = 1;

  void offer(const std::vector<std::uint8_t>& selection) {
    const double value = selection_value(inst_.values, selection);
    if (better(value, selection, best_.objective, best_.selection,
               options_.tolerance)) {
      best_.selection = selection;
      best_.objective = value;
    }
  }

  // Item j may replace item k in any solution without losing value: j weighs
  // no more and is worth no less, with one of the two strict. Equal values
  // only count when the swap also yields the tie-preferred selection.
  [[nodiscard]] bool dominates(std::size_t j, std::size_t k) const {
    const double yj = inst_.values[j], yk = inst_.values[k];
    const double pj = inst_.weights[j], pk = inst_.weights[k];
    if (yj > yk && pj <= pk) return true;
    if (yj == yk && pj < pk) return j < k;
    return false;
  }

  void explore(double residual, double fixed_value) {
    ++stats_.nodes;

    // Greedy-Split over free items in ratio order.
    double room = residual;
    double prefix_value = 0.0;
    std::size_t critical = n_;
    for (std::size_t idx : order_) {
      if (status_[idx] != kFree) continue;
      if (inst_.weights[idx] <= room) {
        room -= inst_.weights[idx];
        prefix_value += inst_.values[idx];
      } else {
        critical = idx;
        break;
      }
    }

    // Candidate: fixed items plus the greedy prefix.
    {
      double r = residual;
      for (std::size_t i = 0; i < n_; ++i) scratch_[i] = status_[i] == kIn;
      for (std::size_t idx : order_) {
        if (status_[idx] != kFree) continue;
        if (idx == critical) break;
        if (inst_.weights[idx] <= r) {
          r -= inst_.weights[idx];
          scratch_[idx] = 1;
        }
      }
      offer(scratch_);
    }
    if (critical == n_) return;

    const double upper = fixed_value + prefix_value +
                         room * (inst_.values[critical] / inst_.weights[critical]);
    if (upper < best_.objective -
                    scaled_tolerance(options_.tolerance, best_.objective)) {
      ++stats_.bound_prunes;
      return;
    }

    const std::size_t s = critical;

    // Branch z_s = 1.
    if (inst_.weights[s] <= residual) {
      bool abandon = false;
      if (options_.dominance_pruning) {
        for (std::size_t i = 0; i < n_ && !abandon; ++i) {
          if (status_[i] == kOut && inst_.values[i] > 0.0 && dominates(i, s)) {
            abandon = true;
          }
        }
      }
      if (abandon) {
        ++stats_.dominance_prunes;
      } else {
        status_[s] = kIn;
        explore(residual - inst_.weights[s], fixed_value + inst_.values[s]);
        status_[s] = kFree;
      }
    }

    // Branch z_s = 0.
    {
      bool abandon = false;
      if (options_.dominance_pruning) {
        for (std::size_t i = 0; i < n_ && !abandon; ++i) {
          if (status_[i] == kIn && dominates(s, i)) abandon = true;
        }
      }
      if (abandon) {
        ++stats_.dominance_prunes;
      } else {
        status_[s] = kOut;
        explore(residual, fixed_value);
        status_[s] = kFree;
      }
    }
  }

  const KnapsackInstance& inst_;
  BnbOptions options_;
  std::size_t n_;
  std::vector<std::size_t> order_;
  std::vector<std::int8_t> status_;
  std::vector<std::uint8_t> scratch_;
  KnapsackSolution best_;
  BnbStats stats_;
};

bool is_integral(double x) { return std::isfinite(x) && std::floor(x) == x; }

}  // namespace

KnapsackSolution solve_bnb(const KnapsackInstance& inst,
                           const BnbOptions& options, BnbStats* stats) {
  inst.validate();
  BranchAndBound solver(inst, options);
  return solver.run(stats);
}

KnapsackSolution solve_dp(const KnapsackInstance& inst) {
  inst.validate();
  require(is_integral(inst.capacity), Errc::invalid_argument,
          fmt::format("solve_dp: capacity {} is not an integer", inst.capacity));
  for (std::size_t i = 0; i < inst.size(); ++i) {
    require(is_integral(inst.weights[i]), Errc::invalid_argument,
            fmt::format("solve_dp: weight[{}] = {} is not an integer", i,
                        inst.weights[i]));
  }
  require(inst.capacity <= static_cast<double>(kDpCapacityLimit),
          Errc::limit_exceeded,
          fmt::format("solve_dp: capacity {} exceeds the limit {}",
                      inst.capacity, kDpCapacityLimit));

  const std::size_t n = inst.size();
  const auto cap = static_cast<std::size_t>(inst.capacity);
  constexpr std::size_t kMaxCells = 20'000'000;
  require((n + 1) * (cap + 1) <= kMaxCells, Errc::limit_exceeded,
          fmt::format("solve_dp: table of {} x {} cells exceeds {}", n + 1,
                      cap + 1, kMaxCells));

  // best value and item count over suffix j..n-1 at capacity c.
  const std::size_t stride = cap + 1;
  std::vector<double> value((n + 1) * stride, 0.0);
  std::vector<std::uint32_t> count((n + 1) * stride, 0);
  constexpr double kTol = 1e-12;
  auto prefer = [&](double va, std::uint32_t ca, double vb, std::uint32_t cb) {
    const double tol = scaled_tolerance(kTol, vb);
    if (va > vb + tol) return 1;
    if (va < vb - tol) return -1;
    if (ca != cb) return ca < cb ? 1 : -1;
    return 0;
  };

  for (std::size_t j = n; j-- > 0;) {
    const auto w = static_cast<std::size_t>(inst.weights[j]);
    const double v = inst.values[j];
    for (std::size_t c = 0; c <= cap; ++c) {
      double bv = value[(j + 1) * stride + c];
      std::uint32_t bc = count[(j + 1) * stride + c];
      if (w <= c) {
        const double tv = v + value[(j + 1) * stride + c - w];
        const std::uint32_t tc = count[(j + 1) * stride + c - w] + 1;
        if (prefer(tv, tc, bv, bc) >= 0) {
          bv = tv;
          bc = tc;
        }
      }
      value[j * stride + c] = bv;
      count[j * stride + c] = bc;
    }
  }

  KnapsackSolution sol;
  sol.selection.assign(n, 0);
  std::size_t c = cap;
  for (std::size_t j = 0; j < n; ++j) {
    const auto w = static_cast<std::size_t>(inst.weights[j]);
    if (w > c) continue;
    const double tv = inst.values[j] + value[(j + 1) * stride + c - w];
    const std::uint32_t tc = count[(j + 1) * stride + c - w] + 1;
    if (prefer(tv, tc, value[(j + 1) * stride + c], count[(j + 1) * stride + c]) >=
        0) {
      sol.selection[j] = 1;
      c -= w;
    }
  }
  sol.objective = selection_value(inst.values, sol.selection);
  return sol;
}

KnapsackSolution solve_exhaustive(const KnapsackInstance& inst) {
  if (!inst.values.empty()) inst.validate();
  const std::size_t n = inst.size();
  require(n <= kExhaustiveLimit, Errc::limit_exceeded,
          fmt::format("solve_exhaustive: {} items exceed the limit {}", n,
                      kExhaustiveLimit));

  KnapsackSolution best;
  best.selection.assign(n, 0);
  best.objective = 0.0;
  std::vector<std::uint8_t> sel(n, 0);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 1; mask < total; ++mask) {
    double weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sel[i] = static_cast<std::uint8_t>((mask >> (n - 1 - i)) & 1U);
      if (sel[i]) weight += inst.weights[i];
    }
    if (weight > inst.capacity) continue;
    const double value = selection_value(inst.values, sel);
    if (better(value, sel, best.objective, best.selection, 1e-12)) {
      best.selection = sel;
      best.objective = value;
    }
  }
  return best;
}

namespace {

// Best rational approximation p/q of x with q <= max_den (continued fractions).
std::optional<std::pair<std::int64_t, std::int64_t>> rational_approximation(
    double x, std::int64_t max_den, double rel_tol) {
  if (!(x > 0.0) || !std::isfinite(x)) return std::nullopt;
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_d = std::floor(r);
    if (a_d > 9.0e15) break;
    const auto a = static_cast<std::int64_t>(a_d);
    const std::int64_t p2 = a * p1 + p0;
    const std::int64_t q2 = a * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double approx = static_cast<double>(p1) / static_cast<double>(q1);
    if (std::abs(approx - x) <= rel_tol * x) return std::pair{p1, q1};
    const double frac = r - a_d;
    if (frac <= 0.0) break;
    r = 1.0 / frac;
  }
  if (q1 > 0 && std::abs(static_cast<double>(p1) / static_cast<double>(q1) - x) <=
                    rel_tol * x) {
    return std::pair{p1, q1};
  }
  return std::nullopt;
}

}  // namespace

std::optional<IntegerScaling> scale_to_integers(std::span<const double> weights,
                                                double capacity,
                                                std::int64_t max_denominator,
                                                std::int64_t capacity_limit) {
  constexpr double kRelTol = 1e-12;
  std::int64_t lcd = 1;
  std::vector<std::pair<std::int64_t, std::int64_t>> fractions;
  fractions.reserve(weights.size());
  for (double w : weights) {
    auto frac = rational_approximation(w, max_denominator, kRelTol);
    if (!frac) return std::nullopt;
    fractions.push_back(*frac);
    const std::int64_t g = std::gcd(lcd, frac->second);
    const std::int64_t next = (lcd / g) * frac->second;
    if (next > capacity_limit) return std::nullopt;
    lcd = next;
  }
  const double scaled_cap = capacity * static_cast<double>(lcd);
  if (!std::isfinite(scaled_cap) ||
      scaled_cap > static_cast<double>(capacity_limit)) {
    return std::nullopt;
  }
  IntegerScaling out;
  out.scale = lcd;
  const double rounded = std::round(scaled_cap);
  out.capacity = static_cast<std::int64_t>(
      std::abs(scaled_cap - rounded) <= 1e-9 * std::max(1.0, scaled_cap)
          ? rounded
          : std::floor(scaled_cap));
  out.weights.reserve(weights.size());
  for (const auto& [p, q] : fractions) out.weights.push_back(p * (lcd / q));
  return out;
}

KnapsackInstance parse_knapsack_instance(const std::string& text) {
  std::istringstream in(text);
  std::string token;
  auto next_number = [&](const char* what) {
    require(static_cast<bool>(in >> token), Errc::parse_error,
            fmt::format("knapsack instance: missing {}", what));
    try {
      std::size_t used = 0;
      double v = std::stod(token, &used);
      require(used == token.size(), Errc::parse_error,
              fmt::format("knapsack instance: bad number '{}'", token));
      return v;
    } catch (const std::logic_error&) {
      fail(Errc::parse_error, fmt::format("knapsack instance: bad number '{}'", token));
    }
  };
  const double n_d = next_number("item count");
  require(n_d >= 0 && std::floor(n_d) == n_d, Errc::parse_error,
          "knapsack instance: item count must be a nonnegative integer");
  const auto n = static_cast<std::size_t>(n_d);
  KnapsackInstance inst;
  inst.values.reserve(n);
  inst.weights.reserve(n);
  for (std::size_t i = 0; i < n; ++i) inst.values.push_back(next_number("value"));
  for (std::size_t i = 0; i < n; ++i) inst.weights.push_back(next_number("weight"));
  inst.capacity = next_number("capacity");
  require(!(in >> token), Errc::parse_error,
          fmt::format("knapsack instance: trailing token '{}'", token));
  return inst;
}

std::string format_knapsack_instance(const KnapsackInstance& inst) {
  std::string out = fmt::format("{}\n", inst.size());
  out += fmt::format("{:.17g}\n", fmt::join(inst.values, " "));
  out += fmt::format("{:.17g}\n", fmt::join(inst.weights, " "));
  out += fmt::format("{:.17g}\n", inst.capacity);
  return out;
}

}  // namespace gl0
