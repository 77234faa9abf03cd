#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gl0/rng.hpp"

namespace gl0 {

/// One draw of the random variable xi. Dataset-backed problems use `index`;
/// analytic problems carry their noise in `noise`.
struct Sample {
  std::size_t index = 0;
  std::vector<double> noise;
};

/// Lipschitz constant L0 of f over the kappa ball, the second moment Q of the
/// per-sample constants, and kappa itself. NaN marks an unknown constant.
struct ProblemMetadata {
  double lipschitz = std::numeric_limits<double>::quiet_NaN();
  double second_moment = std::numeric_limits<double>::quiet_NaN();
  double kappa = std::numeric_limits<double>::infinity();

  [[nodiscard]] bool known() const noexcept {
    return !std::isnan(lipschitz) && !std::isnan(second_moment);
  }
};

/// Contiguous range of groups forming one layer of a model. A layer whose
/// groups are all zero disconnects the model.
struct LayerBlock {
  std::string name;
  std::size_t first_group = 0;
  std::size_t group_count = 0;
};

/// f(w) = E[F(w, xi)] with per-sample value and backpropagation gradient.
/// Implementations are immutable after construction and safe to share across
/// threads.
class StochasticProblem {
 public:
  virtual ~StochasticProblem() = default;

  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual std::size_t dim() const = 0;
  [[nodiscard]] virtual double value(std::span<const double> w,
                                     const Sample& xi) const = 0;
  /// Writes the bp gradient of F(., xi) at w into `out` (length dim()).
  virtual void gradient_into(std::span<const double> w, const Sample& xi,
                             std::span<double> out) const = 0;
  [[nodiscard]] virtual Sample sample_xi(Stream& stream) const = 0;

  /// Per-sample Lipschitz constant L0(xi) when known in closed form.
  [[nodiscard]] virtual std::optional<double> sample_lipschitz(const Sample&) const {
    return std::nullopt;
  }
  /// Size of the finite sample space, for problems backed by a dataset.
  [[nodiscard]] virtual std::optional<std::size_t> dataset_size() const {
    return std::nullopt;
  }
  [[nodiscard]] virtual Sample sample_at(std::size_t index) const;
  /// Random starting point w0 (before projection).
  [[nodiscard]] virtual std::vector<double> initial_point(Stream& stream) const;
  /// Group ranges per model layer; empty for problems without layers.
  [[nodiscard]] virtual std::vector<LayerBlock> layer_blocks() const { return {}; }

  [[nodiscard]] std::vector<double> bp_gradient(std::span<const double> w,
                                                const Sample& xi) const;

  [[nodiscard]] const ProblemMetadata& metadata() const noexcept { return meta_; }
  void set_metadata(const ProblemMetadata& meta) { meta_ = meta; }
  void set_lipschitz(double lipschitz, double second_moment) {
    meta_.lipschitz = lipschitz;
    meta_.second_moment = second_moment;
  }

 protected:
  ProblemMetadata meta_;
};

/// Closed forms for the smoothed function f_alpha(w) = E[f(w + u)], u uniform
/// on the l-inf ball of radius alpha / 2.
class SmoothedClosedForm {
 public:
  virtual ~SmoothedClosedForm() = default;
  [[nodiscard]] virtual double smoothed_value(std::span<const double> w,
                                              double alpha) const = 0;
  [[nodiscard]] virtual std::vector<double> smoothed_gradient(
      std::span<const double> w, double alpha) const = 0;
  /// f(w) itself (the noiseless expectation).
  [[nodiscard]] virtual double expected_value(std::span<const double> w) const = 0;
};

/// F(w, xi) = c * ||w - center||_1 + noise * xi with xi ~ N(0, 1).
/// L0 = c * sqrt(d).
class AbsSumProblem final : public StochasticProblem, public SmoothedClosedForm {
 public:
  AbsSumProblem(std::size_t d, double c, double kappa, double noise = 0.0,
                std::vector<double> center = {});

  [[nodiscard]] std::string name() const override { return "abs_sum"; }
  [[nodiscard]] std::size_t dim() const override { return d_; }
  [[nodiscard]] double value(std::span<const double> w, const Sample& xi) const override;
  void gradient_into(std::span<const double> w, const Sample& xi,
                     std::span<double> out) const override;
  [[nodiscard]] Sample sample_xi(Stream& stream) const override;
  [[nodiscard]] std::optional<double> sample_lipschitz(const Sample&) const override;
  [[nodiscard]] std::vector<double> initial_point(Stream& stream) const override;

  [[nodiscard]] double smoothed_value(std::span<const double> w,
                                      double alpha) const override;
  [[nodiscard]] std::vector<double> smoothed_gradient(std::span<const double> w,
                                                      double alpha) const override;
  [[nodiscard]] double expected_value(std::span<const double> w) const override;

  [[nodiscard]] std::span<const double> center() const noexcept { return center_; }

 private:
  std::size_t d_;
  double c_;
  double noise_;
  std::vector<double> center_;
};

/// F(w, xi) = 0.5 * ||w - center - noise * xi||^2 with xi uniform on [-1, 1]^d.
/// L0 is the supremum of the gradient norm over the kappa ball.
class QuadraticProblem final : public StochasticProblem, public SmoothedClosedForm {
 public:
  QuadraticProblem(std::size_t d, double kappa, double noise = 0.0,
                   std::vector<double> center = {});

  [[nodiscard]] std::string name() const override { return "quadratic"; }
  [[nodiscard]] std::size_t dim() const override { return d_; }
  [[nodiscard]] double value(std::span<const double> w, const Sample& xi) const override;
  void gradient_into(std::span<const double> w, const Sample& xi,
                     std::span<double> out) const override;
  [[nodiscard]] Sample sample_xi(Stream& stream) const override;
  [[nodiscard]] std::optional<double> sample_lipschitz(const Sample& xi) const override;
  [[nodiscard]] std::vector<double> initial_point(Stream& stream) const override;

  [[nodiscard]] double smoothed_value(std::span<const double> w,
                                      double alpha) const override;
  [[nodiscard]] std::vector<double> smoothed_gradient(std::span<const double> w,
                                                      double alpha) const override;
  [[nodiscard]] double expected_value(std::span<const double> w) const override;

 private:
  std::size_t d_;
  double noise_;
  std::vector<double> center_;
};

/// F(w, xi) = max_k (<a_k, w> + b_k) + noise * xi, xi ~ N(0, 1). The gradient
/// selects the first maximizing piece. L0 = max_k ||a_k||_2.
class MaxAffineProblem final : public StochasticProblem {
 public:
  MaxAffineProblem(std::vector<std::vector<double>> slopes,
                   std::vector<double> offsets, double kappa, double noise = 0.0);
  /// `pieces` random affine pieces with standard normal coefficients.
  static MaxAffineProblem random(std::size_t d, std::size_t pieces, double kappa,
                                 double noise, std::uint64_t seed);

  [[nodiscard]] std::string name() const override { return "max_affine"; }
  [[nodiscard]] std::size_t dim() const override { return d_; }
  [[nodiscard]] double value(std::span<const double> w, const Sample& xi) const override;
  void gradient_into(std::span<const double> w, const Sample& xi,
                     std::span<double> out) const override;
  [[nodiscard]] Sample sample_xi(Stream& stream) const override;
  [[nodiscard]] std::optional<double> sample_lipschitz(const Sample&) const override;
  [[nodiscard]] std::vector<double> initial_point(Stream& stream) const override;

 private:
  [[nodiscard]] std::size_t active_piece(std::span<const double> w) const;

  std::size_t d_;
  std::vector<std::vector<double>> slopes_;
  std::vector<double> offsets_;
  double noise_;
};

/// String-valued options for builtin_problem(), as read from a run spec.
using ProblemOptions = std::map<std::string, std::string>;

/// Factory for the named test problems: abs_sum, quadratic, max_affine,
/// tinynet_blobs and tinynet_idx. Relative dataset paths are resolved against
/// `base_dir`. Unknown names or options are rejected.
std::unique_ptr<StochasticProblem> builtin_problem(const std::string& name,
                                                   const ProblemOptions& options,
                                                   const std::string& base_dir = ".");

}  // namespace gl0
