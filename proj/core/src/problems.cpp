#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "gl0/dataset.hpp"
#include "gl0/error.hpp"
#include "gl0/problem.hpp"
#include "gl0/tinynet.hpp"

namespace gl0 {

Sample StochasticProblem::sample_at(std::size_t index) const {
  fail(Errc::invalid_argument,
       fmt::format("{}: no finite sample space (index {})", name(), index));
}

std::vector<double> StochasticProblem::initial_point(Stream& stream) const {
  std::vector<double> w(dim());
  const double r = std::isfinite(meta_.kappa) ? meta_.kappa : 1.0;
  for (auto& x : w) x = stream.uniform(-r, r);
  return w;
}

std::vector<double> StochasticProblem::bp_gradient(std::span<const double> w,
                                                   const Sample& xi) const {
  std::vector<double> g(dim());
  gradient_into(w, xi, g);
  return g;
}

namespace {

std::vector<double> default_center(std::vector<double> center, std::size_t d) {
  if (center.empty()) return std::vector<double>(d, 0.0);
  require(center.size() == d, Errc::dimension_mismatch,
          fmt::format("center has length {} but d = {}", center.size(), d));
  return center;
}

void check_w(std::span<const double> w, std::size_t d, const char* who) {
  require(w.size() == d, Errc::dimension_mismatch,
          fmt::format("{}: point has length {} but d = {}", who, w.size(), d));
}

}  // namespace

// ---------------------------------------------------------------- abs_sum

AbsSumProblem::AbsSumProblem(std::size_t d, double c, double kappa, double noise,
                             std::vector<double> center)
    : d_(d), c_(c), noise_(noise), center_(default_center(std::move(center), d)) {
  require(d > 0, Errc::invalid_argument, "abs_sum: d must be positive");
  require(c > 0.0, Errc::invalid_argument, "abs_sum: c must be positive");
  require(noise >= 0.0, Errc::invalid_argument, "abs_sum: noise must be >= 0");
  const double l0 = c * std::sqrt(static_cast<double>(d));
  meta_ = {l0, l0 * l0, kappa};
}

double AbsSumProblem::value(std::span<const double> w, const Sample& xi) const {
  check_w(w, d_, "abs_sum");
  double total = 0.0;
  for (std::size_t j = 0; j < d_; ++j) total += std::abs(w[j] - center_[j]);
  const double eps = xi.noise.empty() ? 0.0 : xi.noise[0];
  return c_ * total + noise_ * eps;
}

void AbsSumProblem::gradient_into(std::span<const double> w, const Sample&,
                                  std::span<double> out) const {
  check_w(w, d_, "abs_sum");
  for (std::size_t j = 0; j < d_; ++j) {
    const double x = w[j] - center_[j];
    out[j] = c_ * static_cast<double>((x > 0.0) - (x < 0.0));
  }
}

Sample AbsSumProblem::sample_xi(Stream& stream) const {
  Sample s;
  if (noise_ > 0.0) s.noise = {stream.normal()};
  return s;
}

std::optional<double> AbsSumProblem::sample_lipschitz(const Sample&) const {
  return meta_.lipschitz;
}

std::vector<double> AbsSumProblem::initial_point(Stream& stream) const {
  return StochasticProblem::initial_point(stream);
}

double AbsSumProblem::smoothed_value(std::span<const double> w, double alpha) const {
  check_w(w, d_, "abs_sum");
  const double a = alpha / 2.0;
  double total = 0.0;
  for (std::size_t j = 0; j < d_; ++j) {
    const double x = std::abs(w[j] - center_[j]);
    total += x >= a ? x : (x * x + a * a) / (2.0 * a);
  }
  return c_ * total;
}

std::vector<double> AbsSumProblem::smoothed_gradient(std::span<const double> w,
                                                     double alpha) const {
  check_w(w, d_, "abs_sum");
  std::vector<double> g(d_);
  const double a = alpha / 2.0;
  for (std::size_t j = 0; j < d_; ++j) {
    g[j] = c_ * std::clamp((w[j] - center_[j]) / a, -1.0, 1.0);
  }
  return g;
}

double AbsSumProblem::expected_value(std::span<const double> w) const {
  check_w(w, d_, "abs_sum");
  double total = 0.0;
  for (std::size_t j = 0; j < d_; ++j) total += std::abs(w[j] - center_[j]);
  return c_ * total;
}

// -------------------------------------------------------------- quadratic

QuadraticProblem::QuadraticProblem(std::size_t d, double kappa, double noise,
                                   std::vector<double> center)
    : d_(d), noise_(noise), center_(default_center(std::move(center), d)) {
  require(d > 0, Errc::invalid_argument, "quadratic: d must be positive");
  require(noise >= 0.0, Errc::invalid_argument, "quadratic: noise must be >= 0");
  require(std::isfinite(kappa) && kappa > 0.0, Errc::invalid_argument,
          "quadratic: kappa must be positive and finite");
  double sq = 0.0;
  for (double c : center_) sq += (kappa + std::abs(c)) * (kappa + std::abs(c));
  const double l0 = std::sqrt(sq) + noise * std::sqrt(static_cast<double>(d));
  meta_ = {l0, l0 * l0, kappa};
}

double QuadraticProblem::value(std::span<const double> w, const Sample& xi) const {
  check_w(w, d_, "quadratic");
  double total = 0.0;
  for (std::size_t j = 0; j < d_; ++j) {
    const double shift = xi.noise.empty() ? 0.0 : noise_ * xi.noise[j];
    const double r = w[j] - center_[j] - shift;
    total += r * r;
  }
  return 0.5 * total;
}

void QuadraticProblem::gradient_into(std::span<const double> w, const Sample& xi,
                                     std::span<double> out) const {
  check_w(w, d_, "quadratic");
  for (std::size_t j = 0; j < d_; ++j) {
    const double shift = xi.noise.empty() ? 0.0 : noise_ * xi.noise[j];
    out[j] = w[j] - center_[j] - shift;
  }
}

Sample QuadraticProblem::sample_xi(Stream& stream) const {
  Sample s;
  if (noise_ > 0.0) {
    s.noise.resize(d_);
    for (auto& e : s.noise) e = stream.uniform(-1.0, 1.0);
  }
  return s;
}

std::optional<double> QuadraticProblem::sample_lipschitz(const Sample& xi) const {
  const double kappa = meta_.kappa;
  double sq = 0.0;
  for (std::size_t j = 0; j < d_; ++j) {
    const double shift = xi.noise.empty() ? 0.0 : noise_ * xi.noise[j];
    const double r = kappa + std::abs(center_[j] + shift);
    sq += r * r;
  }
  return std::sqrt(sq);
}

std::vector<double> QuadraticProblem::initial_point(Stream& stream) const {
  return StochasticProblem::initial_point(stream);
}

double QuadraticProblem::smoothed_value(std::span<const double> w, double alpha) const {
  const auto d = static_cast<double>(d_);
  return expected_value(w) + d * alpha * alpha / 24.0;
}

std::vector<double> QuadraticProblem::smoothed_gradient(std::span<const double> w,
                                                        double) const {
  check_w(w, d_, "quadratic");
  std::vector<double> g(d_);
  for (std::size_t j = 0; j < d_; ++j) g[j] = w[j] - center_[j];
  return g;
}

double QuadraticProblem::expected_value(std::span<const double> w) const {
  check_w(w, d_, "quadratic");
  double total = 0.0;
  for (std::size_t j = 0; j < d_; ++j) {
    total += (w[j] - center_[j]) * (w[j] - center_[j]);
  }
  // E[(noise * xi_j)^2] = noise^2 / 3 for xi_j uniform on [-1, 1].
  return 0.5 * total + noise_ * noise_ * static_cast<double>(d_) / 6.0;
}

// ------------------------------------------------------------- max_affine

MaxAffineProblem::MaxAffineProblem(std::vector<std::vector<double>> slopes,
                                   std::vector<double> offsets, double kappa,
                                   double noise)
    : slopes_(std::move(slopes)), offsets_(std::move(offsets)), noise_(noise) {
  require(!slopes_.empty(), Errc::invalid_argument, "max_affine: no pieces");
  require(slopes_.size() == offsets_.size(), Errc::invalid_argument,
          "max_affine: slopes and offsets differ in count");
  d_ = slopes_.front().size();
  require(d_ > 0, Errc::invalid_argument, "max_affine: d must be positive");
  double l0 = 0.0;
  for (const auto& a : slopes_) {
    require(a.size() == d_, Errc::dimension_mismatch,
            "max_affine: slope vectors differ in length");
    l0 = std::max(l0, std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0)));
  }
  meta_ = {l0, l0 * l0, kappa};
}

MaxAffineProblem MaxAffineProblem::random(std::size_t d, std::size_t pieces,
                                          double kappa, double noise,
                                          std::uint64_t seed) {
  Stream stream(seed, 0, 0, StreamTag::generic);
  std::vector<std::vector<double>> slopes(pieces, std::vector<double>(d));
  std::vector<double> offsets(pieces);
  for (std::size_t k = 0; k < pieces; ++k) {
    for (auto& a : slopes[k]) a = stream.normal();
    offsets[k] = stream.normal();
  }
  return {std::move(slopes), std::move(offsets), kappa, noise};
}

std::size_t MaxAffineProblem::active_piece(std::span<const double> w) const {
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < slopes_.size(); ++k) {
    const double v =
        std::inner_product(slopes_[k].begin(), slopes_[k].end(), w.begin(), offsets_[k]);
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  return best;
}

double MaxAffineProblem::value(std::span<const double> w, const Sample& xi) const {
  check_w(w, d_, "max_affine");
  const std::size_t k = active_piece(w);
  const double eps = xi.noise.empty() ? 0.0 : xi.noise[0];
  return std::inner_product(slopes_[k].begin(), slopes_[k].end(), w.begin(),
                            offsets_[k]) +
         noise_ * eps;
}

void MaxAffineProblem::gradient_into(std::span<const double> w, const Sample&,
                                     std::span<double> out) const {
  check_w(w, d_, "max_affine");
  const auto& a = slopes_[active_piece(w)];
  std::copy(a.begin(), a.end(), out.begin());
}

Sample MaxAffineProblem::sample_xi(Stream& stream) const {
  Sample s;
  if (noise_ > 0.0) s.noise = {stream.normal()};
  return s;
}

std::optional<double> MaxAffineProblem::sample_lipschitz(const Sample&) const {
  return meta_.lipschitz;
}

std::vector<double> MaxAffineProblem::initial_point(Stream& stream) const {
  return StochasticProblem::initial_point(stream);
}

// ---------------------------------------------------------------- factory

namespace {

class OptionReader {
 public:
  OptionReader(const std::string& problem, const ProblemOptions& options)
      : problem_(problem), options_(options) {}

  double number(const std::string& key, double fallback) {
    used_.push_back(key);
    auto it = options_.find(key);
    if (it == options_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos == it->second.size()) return v;
    } catch (const std::logic_error&) {
    }
    fail(Errc::parse_error, fmt::format("{}: option {} = '{}' is not a number",
                                        problem_, key, it->second));
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    const double v = number(key, static_cast<double>(fallback));
    require(v >= 0 && std::floor(v) == v, Errc::parse_error,
            fmt::format("{}: option {} must be a nonnegative integer", problem_, key));
    return static_cast<std::size_t>(v);
  }

  std::string text(const std::string& key, const std::string& fallback) {
    used_.push_back(key);
    auto it = options_.find(key);
    return it == options_.end() ? fallback : it->second;
  }

  std::vector<double> list(const std::string& key) {
    used_.push_back(key);
    std::vector<double> out;
    auto it = options_.find(key);
    if (it == options_.end()) return out;
    std::string s = it->second;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) {
      try {
        std::size_t pos = 0;
        out.push_back(std::stod(tok, &pos));
        if (pos != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::logic_error&) {
        fail(Errc::parse_error,
             fmt::format("{}: bad number '{}' in option {}", problem_, tok, key));
      }
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : options_) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        fail(Errc::parse_error,
             fmt::format("{}: unknown option '{}'", problem_, key));
      }
    }
  }

 private:
  std::string problem_;
  const ProblemOptions& options_;
  std::vector<std::string> used_;
};

std::vector<double> broadcast(std::vector<double> v, std::size_t d) {
  if (v.size() == 1 && d > 1) return std::vector<double>(d, v[0]);
  return v;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return p.string();
  return (std::filesystem::path(base_dir) / p).string();
}

/// conv(4, 3) -> relu -> maxpool(2) -> affine(hidden) -> relu -> affine(classes)
std::shared_ptr<TinyNet> default_tinynet(TensorShape input, std::size_t classes,
                                         std::size_t filters, std::size_t kernel,
                                         std::size_t hidden) {
  return std::make_shared<TinyNet>(
      input,
      std::vector<LayerSpec>{LayerSpec::conv2d(filters, kernel), LayerSpec::relu(),
                             LayerSpec::maxpool2d(2), LayerSpec::affine(hidden),
                             LayerSpec::relu(), LayerSpec::affine(classes)},
      classes);
}

}  // namespace

std::unique_ptr<StochasticProblem> builtin_problem(const std::string& name,
                                                   const ProblemOptions& options,
                                                   const std::string& base_dir) {
  OptionReader opt(name, options);
  std::unique_ptr<StochasticProblem> problem;
  const double kappa = opt.number("kappa", 1.0);

  if (name == "abs_sum") {
    const std::size_t d = opt.count("d", 4);
    const double c = opt.number("c", 1.0);
    const double noise = opt.number("noise", 0.0);
    auto center = broadcast(opt.list("center"), d);
    problem = std::make_unique<AbsSumProblem>(d, c, kappa, noise, std::move(center));
  } else if (name == "quadratic") {
    const std::size_t d = opt.count("d", 4);
    const double noise = opt.number("noise", 0.0);
    auto center = broadcast(opt.list("center"), d);
    problem = std::make_unique<QuadraticProblem>(d, kappa, noise, std::move(center));
  } else if (name == "max_affine") {
    const std::size_t d = opt.count("d", 4);
    const std::size_t pieces = opt.count("pieces", 3);
    const double noise = opt.number("noise", 0.0);
    const auto seed = static_cast<std::uint64_t>(opt.count("problem_seed", 1));
    problem = std::make_unique<MaxAffineProblem>(
        MaxAffineProblem::random(d, pieces, kappa, noise, seed));
  } else if (name == "tinynet_blobs") {
    const std::size_t points = opt.count("points", 1000);
    const std::size_t classes = opt.count("classes", 3);
    const double spread = opt.number("spread", 0.3);
    const std::size_t side = opt.count("side", 10);
    const auto seed = static_cast<std::uint64_t>(opt.count("data_seed", 1));
    const std::size_t filters = opt.count("filters", 2);
    const std::size_t kernel = opt.count("kernel", 3);
    const std::size_t hidden = opt.count("hidden", 8);
    auto data = std::make_shared<Dataset>(
        make_blobs(points, classes, spread, seed, side * side));
    data->rows = side;
    data->cols = side;
    auto net = default_tinynet({1, side, side}, classes, filters, kernel, hidden);
    problem = std::make_unique<TinyNetProblem>(net, data, kappa, name);
  } else if (name == "tinynet_idx") {
    const std::string images = opt.text("images", "");
    const std::string labels = opt.text("labels", "");
    require(!images.empty() && !labels.empty(), Errc::parse_error,
            "tinynet_idx: options 'images' and 'labels' are required");
    const std::size_t limit = opt.count("limit", 0);
    const std::size_t filters = opt.count("filters", 6);
    const std::size_t kernel = opt.count("kernel", 5);
    const std::size_t hidden = opt.count("hidden", 32);
    Dataset loaded = load_idx(resolve(base_dir, images), resolve(base_dir, labels));
    if (limit > 0 && limit < loaded.count) {
      loaded.count = limit;
      loaded.x.resize(limit * loaded.features);
      loaded.labels.resize(limit);
    }
    auto data = std::make_shared<Dataset>(std::move(loaded));
    auto net = default_tinynet({1, data->rows, data->cols}, data->classes, filters,
                               kernel, hidden);
    problem = std::make_unique<TinyNetProblem>(net, data, kappa, name);
  } else {
    fail(Errc::invalid_argument, fmt::format("unknown problem '{}'", name));
  }
  opt.reject_unknown();
  return problem;
}

}  // namespace gl0
