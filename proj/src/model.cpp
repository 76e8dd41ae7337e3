#include "monoseg/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "monoseg/proxy.hpp"
#include "monoseg/rng.hpp"

namespace monoseg {

namespace {

// Mean of the (2r+1)^2 window clipped to the image, via a summed-area table.
Grid<double> box_blur(const Image& img, int radius) {
  int h = img.rows(), w = img.cols();
  // sat(i, j) = sum of img over [0, i) x [0, j)
  std::vector<double> sat(std::size_t(h + 1) * (w + 1), 0.0);
  auto s = [&](int i, int j) -> double& {
    return sat[std::size_t(i) * (w + 1) + j];
  };
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      s(i + 1, j + 1) = img(i, j) + s(i, j + 1) + s(i + 1, j) - s(i, j);

  Grid<double> out(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      int i0 = std::max(0, i - radius), i1 = std::min(h - 1, i + radius);
      int j0 = std::max(0, j - radius), j1 = std::min(w - 1, j + radius);
      double sum = s(i1 + 1, j1 + 1) - s(i0, j1 + 1) - s(i1 + 1, j0) + s(i0, j0);
      out(i, j) = sum / double((i1 - i0 + 1) * (j1 - j0 + 1));
    }
  return out;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

FeatureStack compute_features(const Image& image) {
  int h = image.rows(), w = image.cols();
  Grid<double> blur2 = box_blur(image, 2);
  Grid<double> blur5 = box_blur(image, 5);
  FeatureStack f(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      double* p = f.at(i, j);
      p[0] = image(i, j);
      p[1] = blur2(i, j);
      p[2] = blur5(i, j);
      p[3] = (j + 0.5) / double(w);
      p[4] = (i + 0.5) / double(h);
      p[5] = 1.0;
    }
  return f;
}

std::vector<double> ModelParams::flatten() const {
  std::vector<double> v;
  v.reserve(kNumParams);
  v.insert(v.end(), w1.begin(), w1.end());
  v.insert(v.end(), b1.begin(), b1.end());
  v.insert(v.end(), w2.begin(), w2.end());
  v.push_back(b2);
  return v;
}

ModelParams ModelParams::unflatten(const std::vector<double>& v) {
  if (v.size() != std::size_t(kNumParams))
    throw std::invalid_argument("parameter vector has wrong length");
  ModelParams p;
  auto it = v.begin();
  std::copy(it, it + p.w1.size(), p.w1.begin());
  it += p.w1.size();
  std::copy(it, it + p.b1.size(), p.b1.begin());
  it += p.b1.size();
  std::copy(it, it + p.w2.size(), p.w2.begin());
  it += p.w2.size();
  p.b2 = *it;
  return p;
}

ModelParams init_params(std::uint64_t seed) {
  SplitMix64 rng(derive_key(seed, hash_str("model_init")));
  ModelParams p;
  double bound1 = 1.0 / std::sqrt(double(kNumFeatures));
  double bound2 = 1.0 / std::sqrt(double(kHiddenUnits));
  for (double& v : p.w1) v = rng.next_uniform(-bound1, bound1);
  for (double& v : p.b1) v = rng.next_uniform(-bound1, bound1);
  for (double& v : p.w2) v = rng.next_uniform(-bound2, bound2);
  p.b2 = rng.next_uniform(-bound2, bound2);
  return p;
}

ScoreMap model_forward(const FeatureStack& f, const ModelParams& p) {
  ScoreMap m(f.rows(), f.cols());
  for (int i = 0; i < f.rows(); ++i)
    for (int j = 0; j < f.cols(); ++j) {
      const double* x = f.at(i, j);
      double z2 = p.b2;
      for (int h = 0; h < kHiddenUnits; ++h) {
        double z1 = p.b1[h];
        for (int k = 0; k < kNumFeatures; ++k)
          z1 += p.w1[h * kNumFeatures + k] * x[k];
        if (z1 > 0.0) z2 += p.w2[h] * z1;
      }
      m(i, j) = std::clamp(sigmoid(z2), kScoreClampLo, kScoreClampHi);
    }
  return m;
}

ScoreMap model_forward(const Image& image, const ModelParams& p) {
  return model_forward(compute_features(image), p);
}

ModelParams model_backward(const FeatureStack& f, const ModelParams& p,
                           const GradientMap& upstream) {
  require_same_shape(f, upstream);
  ModelParams g;  // zero-initialized
  std::array<double, kHiddenUnits> a1;
  for (int i = 0; i < f.rows(); ++i)
    for (int j = 0; j < f.cols(); ++j) {
      double up = upstream(i, j);
      if (up == 0.0) continue;
      const double* x = f.at(i, j);
      double z2 = p.b2;
      for (int h = 0; h < kHiddenUnits; ++h) {
        double z1 = p.b1[h];
        for (int k = 0; k < kNumFeatures; ++k)
          z1 += p.w1[h * kNumFeatures + k] * x[k];
        a1[h] = z1 > 0.0 ? z1 : 0.0;
        z2 += p.w2[h] * a1[h];
      }
      double s = sigmoid(z2);
      if (s <= kScoreClampLo || s >= kScoreClampHi) continue;  // clamp active
      double g2 = up * s * (1.0 - s);
      g.b2 += g2;
      for (int h = 0; h < kHiddenUnits; ++h) {
        g.w2[h] += g2 * a1[h];
        if (a1[h] <= 0.0) continue;  // ReLU off (subgradient 0 at 0)
        double g1 = g2 * p.w2[h];
        g.b1[h] += g1;
        for (int k = 0; k < kNumFeatures; ++k)
          g.w1[h * kNumFeatures + k] += g1 * x[k];
      }
    }
  return g;
}

void optimizer_step(ModelParams& params, const ModelParams& grads,
                    OptimizerState& state) {
  if (state.m1.empty()) {
    state.m1.assign(kNumParams, 0.0);
    state.m2.assign(kNumParams, 0.0);
  }
  std::vector<double> theta = params.flatten();
  std::vector<double> g = grads.flatten();
  state.step += 1;
  double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
  double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
  for (int k = 0; k < kNumParams; ++k) {
    state.m1[k] = state.beta1 * state.m1[k] + (1.0 - state.beta1) * g[k];
    state.m2[k] = state.beta2 * state.m2[k] + (1.0 - state.beta2) * g[k] * g[k];
    double mhat = state.m1[k] / bc1;
    double vhat = state.m2[k] / bc2;
    theta[k] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.eps);
    theta[k] -= state.learning_rate * state.weight_decay * theta[k];
  }
  params = ModelParams::unflatten(theta);
}

namespace {

constexpr char kMagic[8] = {'M', 'S', 'E', 'G', 'M', 'L', 'P', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(char((bits >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
  return v;
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& p) {
  std::string buf;
  buf.append(kMagic, sizeof kMagic);
  put_u32(buf, kVersion);
  put_u32(buf, kNumParams);
  for (double v : p.flatten()) put_f64(buf, v);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(buf.data(), std::streamsize(buf.size()));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  const std::size_t expect = 16 + std::size_t(kNumParams) * 8;
  if (buf.size() != expect)
    throw std::runtime_error("checkpoint has wrong size: " + path);
  if (std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("checkpoint has bad magic: " + path);
  const unsigned char* raw = reinterpret_cast<const unsigned char*>(buf.data());
  if (get_u32(raw + 8) != kVersion)
    throw std::runtime_error("unsupported checkpoint version: " + path);
  if (get_u32(raw + 12) != kNumParams)
    throw std::runtime_error("checkpoint parameter count mismatch: " + path);
  std::vector<double> v(kNumParams);
  for (int k = 0; k < kNumParams; ++k) v[k] = get_f64(raw + 16 + 8 * k);
  return ModelParams::unflatten(v);
}

}  // namespace monoseg
