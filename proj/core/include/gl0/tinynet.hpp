#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gl0/constraint.hpp"
#include "gl0/dataset.hpp"
#include "gl0/problem.hpp"

namespace gl0 {

enum class LayerKind { affine, relu, conv2d, maxpool2d };

/// affine(out), relu(), conv2d(out_channels, kernel) with stride 1 and no
/// padding, maxpool2d(window) with stride equal to the window.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::size_t size = 0;
  std::size_t kernel = 0;

  static LayerSpec affine(std::size_t out) { return {LayerKind::affine, out, 0}; }
  static LayerSpec relu() { return {LayerKind::relu, 0, 0}; }
  static LayerSpec conv2d(std::size_t out_channels, std::size_t kernel) {
    return {LayerKind::conv2d, out_channels, kernel};
  }
  static LayerSpec maxpool2d(std::size_t window) {
    return {LayerKind::maxpool2d, 0, window};
  }
};

struct TensorShape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  [[nodiscard]] std::size_t size() const noexcept { return channels * height * width; }
};

/// Small feed-forward network over a flat parameter vector, followed by a
/// cross-entropy head. Parameters of each neuron (affine) or filter (conv) are
/// stored contiguously as weights then bias, so every neuron and filter is one
/// group of the sparsity partition.
///
/// Backpropagation uses fixed selections at kinks: ReLU'(0) = 0 and the max
/// pool routes the gradient to the first maximal entry of each window in
/// row-major order.
class TinyNet {
 public:
  TinyNet(TensorShape input, std::vector<LayerSpec> layers, std::size_t classes);

  [[nodiscard]] std::size_t param_count() const noexcept { return params_; }
  [[nodiscard]] std::size_t classes() const noexcept { return classes_; }
  [[nodiscard]] const TensorShape& input_shape() const noexcept { return input_; }

  /// Group sizes, one per neuron or filter, in parameter order.
  [[nodiscard]] std::vector<std::size_t> group_dims() const;
  [[nodiscard]] std::vector<LayerBlock> layer_blocks() const;
  /// Partition with p_i = d_i and budget (1 - sparsity) * d.
  [[nodiscard]] GroupPartition partition(double sparsity) const;

  struct Forward {
    std::vector<double> logits;
    double loss = 0.0;
  };
  [[nodiscard]] Forward forward(std::span<const double> w, std::span<const double> input,
                                int target) const;
  [[nodiscard]] std::vector<double> logits(std::span<const double> w,
                                           std::span<const double> input) const;
  [[nodiscard]] double loss(std::span<const double> w, std::span<const double> input,
                            int target) const;
  /// Loss and bp gradient in one pass; `grad` has length param_count().
  double loss_and_gradient(std::span<const double> w, std::span<const double> input,
                           int target, std::span<double> grad) const;

  /// Kaiming-uniform weights (bound sqrt(6 / fan_in)) and zero biases.
  [[nodiscard]] std::vector<double> kaiming_init(Stream& stream) const;

  struct Layer {
    LayerSpec spec;
    TensorShape in;
    TensorShape out;
    std::size_t param_offset = 0;
    std::size_t param_count = 0;
    std::size_t groups = 0;
    std::size_t group_size = 0;
  };
  [[nodiscard]] std::span<const Layer> layers() const noexcept { return layers_; }

 private:
  struct Tape;
  void run_forward(std::span<const double> w, std::span<const double> input,
                   Tape& tape) const;

  TensorShape input_;
  std::size_t classes_;
  std::vector<Layer> layers_;
  std::size_t params_ = 0;
};

/// Cross-entropy loss at `target` and its gradient with respect to logits.
double cross_entropy(std::span<const double> logits, int target,
                     std::span<double> grad = {});

/// Empirical risk over a dataset: F(w, xi) is the network loss on sample xi,
/// drawn uniformly. L0 and Q are unknown until estimated.
class TinyNetProblem final : public StochasticProblem {
 public:
  TinyNetProblem(std::shared_ptr<const TinyNet> net, std::shared_ptr<const Dataset> data,
                 double kappa, std::string label = "tinynet");

  [[nodiscard]] std::string name() const override { return label_; }
  [[nodiscard]] std::size_t dim() const override { return net_->param_count(); }
  [[nodiscard]] double value(std::span<const double> w, const Sample& xi) const override;
  void gradient_into(std::span<const double> w, const Sample& xi,
                     std::span<double> out) const override;
  [[nodiscard]] Sample sample_xi(Stream& stream) const override;
  [[nodiscard]] std::optional<std::size_t> dataset_size() const override {
    return data_->count;
  }
  [[nodiscard]] Sample sample_at(std::size_t index) const override;
  [[nodiscard]] std::vector<double> initial_point(Stream& stream) const override;
  [[nodiscard]] std::vector<LayerBlock> layer_blocks() const override {
    return net_->layer_blocks();
  }

  [[nodiscard]] const TinyNet& net() const noexcept { return *net_; }
  [[nodiscard]] const Dataset& data() const noexcept { return *data_; }

  [[nodiscard]] double accuracy(std::span<const double> w) const;
  [[nodiscard]] double mean_loss(std::span<const double> w) const;

 private:
  std::shared_ptr<const TinyNet> net_;
  std::shared_ptr<const Dataset> data_;
  std::string label_;
};

}  // namespace gl0
