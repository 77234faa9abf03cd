#include "gl0/tinynet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "gl0/error.hpp"

namespace gl0 {

struct TinyNet::Tape {
  // acts[0] is the input; acts[l + 1] is the output of layer l.
  std::vector<std::vector<double>> acts;
  // Flat index into acts[l] of the selected maximum for each pooled output.
  std::vector<std::vector<std::size_t>> argmax;
};

TinyNet::TinyNet(TensorShape input, std::vector<LayerSpec> layers, std::size_t classes)
    : input_(input), classes_(classes) {
  require(input.size() > 0, Errc::invalid_argument, "tinynet: empty input shape");
  require(classes >= 2, Errc::invalid_argument, "tinynet: need at least 2 classes");
  require(!layers.empty(), Errc::invalid_argument, "tinynet: no layers");
  TensorShape cur = input;
  for (const auto& spec : layers) {
    Layer layer;
    layer.spec = spec;
    layer.in = cur;
    layer.param_offset = params_;
    switch (spec.kind) {
      case LayerKind::affine: {
        require(spec.size > 0, Errc::invalid_argument, "tinynet: affine width is 0");
        layer.out = {1, 1, spec.size};
        layer.groups = spec.size;
        layer.group_size = cur.size() + 1;
        break;
      }
      case LayerKind::conv2d: {
        require(spec.size > 0 && spec.kernel > 0, Errc::invalid_argument,
                "tinynet: conv needs filters and kernel > 0");
        require(cur.height >= spec.kernel && cur.width >= spec.kernel,
                Errc::invalid_argument,
                fmt::format("tinynet: kernel {} exceeds input {}x{}", spec.kernel,
                            cur.height, cur.width));
        layer.out = {spec.size, cur.height - spec.kernel + 1, cur.width - spec.kernel + 1};
        layer.groups = spec.size;
        layer.group_size = cur.channels * spec.kernel * spec.kernel + 1;
        break;
      }
      case LayerKind::relu:
        layer.out = cur;
        break;
      case LayerKind::maxpool2d: {
        require(spec.kernel > 0 && cur.height >= spec.kernel && cur.width >= spec.kernel,
                Errc::invalid_argument, "tinynet: pool window does not fit");
        layer.out = {cur.channels, cur.height / spec.kernel, cur.width / spec.kernel};
        break;
      }
    }
    layer.param_count = layer.groups * layer.group_size;
    params_ += layer.param_count;
    cur = layer.out;
    layers_.push_back(layer);
  }
  require(cur.size() == classes, Errc::invalid_argument,
          fmt::format("tinynet: output size {} differs from {} classes", cur.size(),
                      classes));
}

std::vector<std::size_t> TinyNet::group_dims() const {
  std::vector<std::size_t> dims;
  for (const auto& layer : layers_) {
    dims.insert(dims.end(), layer.groups, layer.group_size);
  }
  return dims;
}

std::vector<LayerBlock> TinyNet::layer_blocks() const {
  std::vector<LayerBlock> blocks;
  std::size_t first = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.groups == 0) continue;
    const char* kind = layer.spec.kind == LayerKind::conv2d ? "conv" : "affine";
    blocks.push_back({fmt::format("{}{}", kind, l), first, layer.groups});
    first += layer.groups;
  }
  return blocks;
}

GroupPartition TinyNet::partition(double sparsity) const {
  const auto dims = group_dims();
  std::vector<double> penalties(dims.begin(), dims.end());
  return {dims, std::move(penalties),
          GroupPartition::budget_for_sparsity(sparsity, params_)};
}

void TinyNet::run_forward(std::span<const double> w, std::span<const double> input,
                          Tape& tape) const {
  require(w.size() == params_, Errc::dimension_mismatch,
          fmt::format("tinynet: {} parameters given, {} expected", w.size(), params_));
  require(input.size() == input_.size(), Errc::dimension_mismatch,
          fmt::format("tinynet: input has {} features, {} expected", input.size(),
                      input_.size()));
  tape.acts.assign(layers_.size() + 1, {});
  tape.argmax.assign(layers_.size(), {});
  tape.acts[0].assign(input.begin(), input.end());

  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const auto& x = tape.acts[l];
    auto& y = tape.acts[l + 1];
    y.assign(layer.out.size(), 0.0);
    const double* p = w.data() + layer.param_offset;
    switch (layer.spec.kind) {
      case LayerKind::affine: {
        const std::size_t n_in = layer.in.size();
        for (std::size_t o = 0; o < layer.groups; ++o) {
          const double* row = p + o * layer.group_size;
          double acc = row[n_in];
          for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * x[i];
          y[o] = acc;
        }
        break;
      }
      case LayerKind::conv2d: {
        const std::size_t k = layer.spec.kernel;
        const auto [c_in, h_in, w_in] = layer.in;
        const auto [f_out, h_out, w_out] = layer.out;
        for (std::size_t f = 0; f < f_out; ++f) {
          const double* filt = p + f * layer.group_size;
          const double bias = filt[c_in * k * k];
          for (std::size_t r = 0; r < h_out; ++r) {
            for (std::size_t c = 0; c < w_out; ++c) {
              double acc = bias;
              for (std::size_t ch = 0; ch < c_in; ++ch) {
                for (std::size_t i = 0; i < k; ++i) {
                  for (std::size_t j = 0; j < k; ++j) {
                    acc += filt[(ch * k + i) * k + j] *
                           x[(ch * h_in + r + i) * w_in + c + j];
                  }
                }
              }
              y[(f * h_out + r) * w_out + c] = acc;
            }
          }
        }
        break;
      }
      case LayerKind::relu:
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
        break;
      case LayerKind::maxpool2d: {
        const std::size_t k = layer.spec.kernel;
        const auto [c_in, h_in, w_in] = layer.in;
        const auto [c_out, h_out, w_out] = layer.out;
        auto& sel = tape.argmax[l];
        sel.assign(y.size(), 0);
        for (std::size_t ch = 0; ch < c_out; ++ch) {
          for (std::size_t r = 0; r < h_out; ++r) {
            for (std::size_t c = 0; c < w_out; ++c) {
              std::size_t best = (ch * h_in + r * k) * w_in + c * k;
              for (std::size_t i = 0; i < k; ++i) {
                for (std::size_t j = 0; j < k; ++j) {
                  const std::size_t idx = (ch * h_in + r * k + i) * w_in + c * k + j;
                  if (x[idx] > x[best]) best = idx;  // strict: first maximum wins
                }
              }
              const std::size_t out = (ch * h_out + r) * w_out + c;
              sel[out] = best;
              y[out] = x[best];
            }
          }
        }
        break;
      }
    }
  }
}

double cross_entropy(std::span<const double> logits, int target, std::span<double> grad) {
  require(target >= 0 && static_cast<std::size_t>(target) < logits.size(),
          Errc::invalid_argument,
          fmt::format("cross_entropy: label {} outside [0, {})", target, logits.size()));
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - top);
  const double log_norm = top + std::log(sum);
  if (!grad.empty()) {
    for (std::size_t c = 0; c < logits.size(); ++c) {
      grad[c] = std::exp(logits[c] - log_norm);
    }
    grad[static_cast<std::size_t>(target)] -= 1.0;
  }
  return log_norm - logits[static_cast<std::size_t>(target)];
}

TinyNet::Forward TinyNet::forward(std::span<const double> w, std::span<const double> input,
                                  int target) const {
  Tape tape;
  run_forward(w, input, tape);
  Forward out;
  out.logits = std::move(tape.acts.back());
  out.loss = cross_entropy(out.logits, target);
  return out;
}

std::vector<double> TinyNet::logits(std::span<const double> w,
                                    std::span<const double> input) const {
  Tape tape;
  run_forward(w, input, tape);
  return std::move(tape.acts.back());
}

double TinyNet::loss(std::span<const double> w, std::span<const double> input,
                     int target) const {
  return forward(w, input, target).loss;
}

double TinyNet::loss_and_gradient(std::span<const double> w, std::span<const double> input,
                                  int target, std::span<double> grad) const {
  require(grad.size() == params_, Errc::dimension_mismatch,
          "tinynet: gradient buffer has wrong length");
  Tape tape;
  run_forward(w, input, tape);
  std::vector<double> delta(classes_);
  const double loss = cross_entropy(tape.acts.back(), target, delta);
  std::fill(grad.begin(), grad.end(), 0.0);

  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Layer& layer = layers_[l];
    const auto& x = tape.acts[l];
    std::vector<double> back(layer.in.size(), 0.0);
    const double* p = w.data() + layer.param_offset;
    double* g = grad.data() + layer.param_offset;
    switch (layer.spec.kind) {
      case LayerKind::affine: {
        const std::size_t n_in = layer.in.size();
        for (std::size_t o = 0; o < layer.groups; ++o) {
          const double d = delta[o];
          const double* row = p + o * layer.group_size;
          double* grow = g + o * layer.group_size;
          for (std::size_t i = 0; i < n_in; ++i) {
            grow[i] += d * x[i];
            back[i] += d * row[i];
          }
          grow[n_in] += d;
        }
        break;
      }
      case LayerKind::conv2d: {
        const std::size_t k = layer.spec.kernel;
        const auto [c_in, h_in, w_in] = layer.in;
        const auto [f_out, h_out, w_out] = layer.out;
        for (std::size_t f = 0; f < f_out; ++f) {
          const double* filt = p + f * layer.group_size;
          double* gfilt = g + f * layer.group_size;
          for (std::size_t r = 0; r < h_out; ++r) {
            for (std::size_t c = 0; c < w_out; ++c) {
              const double d = delta[(f * h_out + r) * w_out + c];
              if (d == 0.0) continue;
              gfilt[c_in * k * k] += d;
              for (std::size_t ch = 0; ch < c_in; ++ch) {
                for (std::size_t i = 0; i < k; ++i) {
                  for (std::size_t j = 0; j < k; ++j) {
                    const std::size_t xi = (ch * h_in + r + i) * w_in + c + j;
                    const std::size_t wi = (ch * k + i) * k + j;
                    gfilt[wi] += d * x[xi];
                    back[xi] += d * filt[wi];
                  }
                }
              }
            }
          }
        }
        break;
      }
      case LayerKind::relu:
        for (std::size_t i = 0; i < x.size(); ++i) back[i] = x[i] > 0.0 ? delta[i] : 0.0;
        break;
      case LayerKind::maxpool2d: {
        const auto& sel = tape.argmax[l];
        for (std::size_t o = 0; o < sel.size(); ++o) back[sel[o]] += delta[o];
        break;
      }
    }
    delta = std::move(back);
  }
  return loss;
}

std::vector<double> TinyNet::kaiming_init(Stream& stream) const {
  std::vector<double> w(params_, 0.0);
  for (const auto& layer : layers_) {
    if (layer.groups == 0) continue;
    const std::size_t fan_in = layer.group_size - 1;
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (std::size_t gi = 0; gi < layer.groups; ++gi) {
      double* row = w.data() + layer.param_offset + gi * layer.group_size;
      for (std::size_t i = 0; i < fan_in; ++i) row[i] = stream.uniform(-bound, bound);
    }
  }
  return w;
}

TinyNetProblem::TinyNetProblem(std::shared_ptr<const TinyNet> net,
                               std::shared_ptr<const Dataset> data, double kappa,
                               std::string label)
    : net_(std::move(net)), data_(std::move(data)), label_(std::move(label)) {
  require(net_ != nullptr && data_ != nullptr, Errc::invalid_argument,
          "tinynet problem: null network or dataset");
  require(data_->count > 0, Errc::invalid_argument, "tinynet problem: empty dataset");
  require(data_->features == net_->input_shape().size(), Errc::dimension_mismatch,
          fmt::format("tinynet problem: dataset has {} features, network expects {}",
                      data_->features, net_->input_shape().size()));
  for (int y : data_->labels) {
    require(y >= 0 && static_cast<std::size_t>(y) < net_->classes(),
            Errc::invalid_argument,
            fmt::format("tinynet problem: label {} outside [0, {})", y, net_->classes()));
  }
  meta_.kappa = kappa;
}

double TinyNetProblem::value(std::span<const double> w, const Sample& xi) const {
  return net_->loss(w, data_->row(xi.index), data_->labels[xi.index]);
}

void TinyNetProblem::gradient_into(std::span<const double> w, const Sample& xi,
                                   std::span<double> out) const {
  net_->loss_and_gradient(w, data_->row(xi.index), data_->labels[xi.index], out);
}

Sample TinyNetProblem::sample_xi(Stream& stream) const {
  return sample_at(stream.uniform_index(data_->count));
}

Sample TinyNetProblem::sample_at(std::size_t index) const {
  require(index < data_->count, Errc::invalid_argument,
          fmt::format("tinynet problem: sample {} out of range", index));
  Sample s;
  s.index = index;
  return s;
}

std::vector<double> TinyNetProblem::initial_point(Stream& stream) const {
  auto w = net_->kaiming_init(stream);
  const double kappa = meta_.kappa;
  if (std::isfinite(kappa)) {
    // Stay strictly inside the kappa box.
    const double cap = 0.5 * kappa;
    for (auto& x : w) x = std::clamp(x, -cap, cap);
  }
  return w;
}

double TinyNetProblem::accuracy(std::span<const double> w) const {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data_->count; ++i) {
    const auto z = net_->logits(w, data_->row(i));
    const auto best = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    correct += best == data_->labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(data_->count);
}

double TinyNetProblem::mean_loss(std::span<const double> w) const {
  double total = 0.0;
  for (std::size_t i = 0; i < data_->count; ++i) {
    total += net_->loss(w, data_->row(i), data_->labels[i]);
  }
  return total / static_cast<double>(data_->count);
}

}  // namespace gl0
