#include "freemesh/tinynet.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

namespace freemesh::nn {

namespace {

constexpr std::uint8_t kMagic[4] = {'F', 'M', 'N', 'N'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint64_t kMaxLayerWidth = 1u << 20;

void check_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw ShapeError("an Mlp needs at least an input and an output size");
  for (auto s : sizes) {
    if (s == 0) throw ShapeError("layer sizes must be positive");
  }
}

}  // namespace

Mlp::Mlp(std::vector<std::size_t> sizes, std::mt19937_64& rng) : sizes_(std::move(sizes)) {
  check_sizes(sizes_);
  params_.reserve(2 * layer_count());
  for (std::size_t k = 0; k < layer_count(); ++k) {
    const auto in = static_cast<Eigen::Index>(sizes_[k]);
    const auto out = static_cast<Eigen::Index>(sizes_[k + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix w(out, in);
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) w(r, c) = u(rng);
    }
    Matrix b(out, 1);
    for (Eigen::Index r = 0; r < out; ++r) b(r, 0) = u(rng);
    params_.push_back(std::move(w));
    params_.push_back(std::move(b));
  }
}

Mlp Mlp::zeros(std::vector<std::size_t> sizes) {
  check_sizes(sizes);
  Mlp net;
  net.sizes_ = std::move(sizes);
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    const auto in = static_cast<Eigen::Index>(net.sizes_[k]);
    const auto out = static_cast<Eigen::Index>(net.sizes_[k + 1]);
    net.params_.push_back(Matrix::Zero(out, in));
    net.params_.push_back(Matrix::Zero(out, 1));
  }
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.size());
  return n;
}

void Mlp::check_input(const Matrix& input) const {
  if (sizes_.empty()) throw ShapeError("Mlp has no layers");
  if (static_cast<std::size_t>(input.rows()) != input_size()) {
    throw ShapeError("Mlp input has " + std::to_string(input.rows()) + " rows, expected " +
                     std::to_string(input_size()));
  }
}

Matrix Mlp::forward(const Matrix& input) {
  check_input(input);
  const std::size_t layers = layer_count();
  acts_.resize(layers);
  pre_.resize(layers);
  acts_[0] = input;
  for (std::size_t k = 0; k < layers; ++k) {
    pre_[k].noalias() = weight(k) * acts_[k];
    pre_[k].colwise() += bias(k).col(0);
    if (k + 1 < layers) acts_[k + 1] = pre_[k].cwiseMax(0.0);
  }
  return pre_.back();
}

Matrix Mlp::predict(const Matrix& input) const {
  check_input(input);
  Matrix a = input;
  for (std::size_t k = 0; k < layer_count(); ++k) {
    Matrix z = weight(k) * a;
    z.colwise() += bias(k).col(0);
    a = (k + 1 < layer_count()) ? Matrix(z.cwiseMax(0.0)) : std::move(z);
  }
  return a;
}

Gradients Mlp::backward(const Matrix& grad_output, bool with_params) const {
  if (acts_.empty()) throw std::logic_error("Mlp::backward called without a recorded forward pass");
  if (grad_output.rows() != pre_.back().rows() || grad_output.cols() != pre_.back().cols()) {
    throw ShapeError("backward: gradient shape does not match the recorded output");
  }
  Gradients g;
  if (with_params) g.params.resize(params_.size());
  Matrix delta = grad_output;
  for (std::size_t k = layer_count(); k-- > 0;) {
    if (with_params) {
      g.params[2 * k].noalias() = delta * acts_[k].transpose();
      g.params[2 * k + 1] = delta.rowwise().sum();
    }
    Matrix upstream;
    upstream.noalias() = weight(k).transpose() * delta;
    if (k > 0) {
      // ReLU: gradient flows only where the pre-activation was positive.
      delta = upstream.cwiseProduct((pre_[k - 1].array() > 0.0).cast<double>().matrix());
    } else {
      g.input = std::move(upstream);
    }
  }
  return g;
}

Adam::Adam(const std::vector<Matrix>& params, AdamConfig cfg) : cfg_(cfg) {
  for (const auto& p : params) {
    m_.push_back(Matrix::Zero(p.rows(), p.cols()));
    v_.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

void Adam::step(std::vector<Matrix>& params, const std::vector<Matrix>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ShapeError("Adam::step: parameter block count mismatch");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].rows() != m_[i].rows() || params[i].cols() != m_[i].cols() ||
        grads[i].rows() != m_[i].rows() || grads[i].cols() != m_[i].cols()) {
      throw ShapeError("Adam::step: block " + std::to_string(i) + " shape mismatch");
    }
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grads[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grads[i].cwiseProduct(grads[i]);
    params[i].array() -=
        cfg_.learning_rate * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + cfg_.epsilon);
  }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (n > remaining()) throw FormatError("unexpected end of stream");
  auto s = bytes_.subspan(pos_, n);
  pos_ += n;
  return s;
}

std::uint32_t ByteReader::u32() {
  auto s = take(4);
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(s[static_cast<std::size_t>(k)]) << (8 * k);
  return v;
}

std::uint64_t ByteReader::u64() {
  auto s = take(8);
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(s[static_cast<std::size_t>(k)]) << (8 * k);
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::vector<std::uint8_t> save_weights(const Mlp& net) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(net.sizes().size()));
  for (auto s : net.sizes()) put_u64(out, s);
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    const Matrix& w = net.weight(k);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) put_f64(out, w(r, c));
    }
    const Matrix& b = net.bias(k);
    for (Eigen::Index r = 0; r < b.rows(); ++r) put_f64(out, b(r, 0));
  }
  return out;
}

Mlp load_weights(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  auto magic = in.take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("not a weight stream (bad magic)");
  if (in.u32() != kFormatVersion) throw FormatError("unsupported weight stream version");
  const std::uint32_t count = in.u32();
  if (count < 2 || count > 64) throw FormatError("corrupt layer count");
  std::vector<std::size_t> sizes;
  std::uint64_t payload = 0;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint64_t s = in.u64();
    if (s == 0 || s > kMaxLayerWidth) throw FormatError("corrupt layer size");
    if (k > 0) payload += (sizes.back() + 1) * s;
    sizes.push_back(static_cast<std::size_t>(s));
  }
  if (in.remaining() != payload * 8) {
    throw FormatError("weight payload is " + std::to_string(in.remaining()) + " bytes, expected " +
                      std::to_string(payload * 8));
  }
  Mlp net = Mlp::zeros(sizes);
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    Matrix& w = net.weight(k);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = in.f64();
    }
    Matrix& b = net.bias(k);
    for (Eigen::Index r = 0; r < b.rows(); ++r) b(r, 0) = in.f64();
  }
  return net;
}

}  // namespace freemesh::nn
