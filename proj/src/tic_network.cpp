#include "dyncal/tic_network.hpp"

#include <cmath>
#include <string>

#include "dyncal/error.hpp"

namespace dyncal {

namespace {

void require_finite(const std::vector<float>& v) {
  for (float x : v)
    if (!std::isfinite(x)) throw NumericalError("numerical failure");
}

void add_positional_encoding(std::vector<float>& x, std::size_t n, std::size_t d) {
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = 0; i < d; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d));
      x[p * d + i] += static_cast<float>(std::sin(static_cast<double>(p) * freq));
      if (i + 1 < d) x[p * d + i + 1] += static_cast<float>(std::cos(static_cast<double>(p) * freq));
    }
  }
}

void gelu(std::vector<float>& v, bool tanh_approx) {
  if (tanh_approx) {
    const float c = std::sqrt(2.0f / static_cast<float>(kPi));
    for (float& x : v) x = 0.5f * x * (1.0f + std::tanh(c * (x + 0.044715f * x * x * x)));
  } else {
    const float r = 1.0f / std::sqrt(2.0f);
    for (float& x : v) x = 0.5f * x * (1.0f + std::erf(x * r));
  }
}

}  // namespace

std::vector<float> tic_features(const Window& window) {
  if (window.empty()) throw DataError("empty window");
  const std::size_t s_count = window.front().sensor_count();
  const std::size_t width = s_count * 12;
  std::vector<float> f(window.size() * width);
  for (std::size_t t = 0; t < window.size(); ++t) {
    const ImuFrame& frame = window[t];
    if (frame.sensor_count() != s_count) throw DataError("window sensor count changes over time");
    float* row = f.data() + t * width;
    for (std::size_t s = 0; s < s_count; ++s) {
      for (int k = 0; k < 3; ++k)
        row[s * 3 + k] = static_cast<float>(frame.sensors[s].accel[k]) / kAccelScale;
      const auto rm = frame.sensors[s].orientation.row_major();
      for (int k = 0; k < 9; ++k) row[s_count * 3 + s * 9 + k] = static_cast<float>(rm[k]);
    }
  }
  return f;
}

TicNetwork::TicNetwork(WeightBundle weights, const KernelTable& kernels)
    : weights_(std::move(weights)), dims_(validate_weights(weights_)), kernels_(&kernels) {
  embed_w_ = weights_.at("embed.weight").data.data();
  embed_b_ = weights_.at("embed.bias").data.data();
  for (std::uint32_t b = 0; b < dims_.encoder_blocks; ++b)
    encoder_.push_back(bind_block("enc" + std::to_string(b)));
  tpm_d_ = bind_block("tpm_d.enc");
  tpm_o_ = bind_block("tpm_o.enc");
  out_d_w_ = weights_.at("tpm_d.out.weight").data.data();
  out_d_b_ = weights_.at("tpm_d.out.bias").data.data();
  out_o_w_ = weights_.at("tpm_o.out.weight").data.data();
  out_o_b_ = weights_.at("tpm_o.out.bias").data.data();
}

TicNetwork::Block TicNetwork::bind_block(const std::string& p) const {
  auto get = [&](const std::string& n) { return weights_.at(p + n).data.data(); };
  return Block{get(".attn.q.weight"), get(".attn.q.bias"), get(".attn.k.weight"),
               get(".attn.k.bias"),   get(".attn.v.weight"), get(".attn.v.bias"),
               get(".attn.out.weight"), get(".attn.out.bias"), get(".ln1.gamma"),
               get(".ln1.beta"),      get(".ln2.gamma"),     get(".ln2.beta"),
               get(".ffn.w1"),        get(".ffn.b1"),        get(".ffn.w2"),
               get(".ffn.b2")};
}

void TicNetwork::attention(const Block& b, const std::vector<float>& in, std::vector<float>& out,
                           std::size_t n) const {
  const KernelTable& k = *kernels_;
  const std::size_t d = dims_.d_model;
  const std::size_t hd = d / dims_.heads;
  const float scale = 1.0f / std::sqrt(static_cast<float>(hd));

  std::vector<float> q(n * d), key(n * d), v(n * d), ctx(n * d, 0.0f), scores(n);
  k.linear(in.data(), n, d, b.q_w, b.q_b, d, q.data());
  k.linear(in.data(), n, d, b.k_w, b.k_b, d, key.data());
  k.linear(in.data(), n, d, b.v_w, b.v_b, d, v.data());
  for (std::size_t h = 0; h < dims_.heads; ++h) {
    const std::size_t off = h * hd;
    for (std::size_t i = 0; i < n; ++i) {
      const float* qi = q.data() + i * d + off;
      for (std::size_t j = 0; j < n; ++j) scores[j] = k.dot(qi, key.data() + j * d + off, hd) * scale;
      k.softmax(scores.data(), n);
      float* ci = ctx.data() + i * d + off;
      for (std::size_t j = 0; j < n; ++j) k.axpy(scores[j], v.data() + j * d + off, ci, hd);
    }
  }
  out.resize(n * d);
  k.linear(ctx.data(), n, d, b.o_w, b.o_b, d, out.data());
}

void TicNetwork::feed_forward(const Block& b, const std::vector<float>& in, std::vector<float>& out,
                              std::size_t n) const {
  const KernelTable& k = *kernels_;
  const std::size_t d = dims_.d_model, f = dims_.ffn;
  std::vector<float> hidden(n * f);
  k.linear(in.data(), n, d, b.w1, b.b1, f, hidden.data());
  gelu(hidden, (weights_.flags & kFlagGeluTanh) != 0);
  out.resize(n * d);
  k.linear(hidden.data(), n, f, b.w2, b.b2, d, out.data());
}

void TicNetwork::run_block(const Block& b, std::vector<float>& x, std::size_t n) const {
  const KernelTable& k = *kernels_;
  const std::size_t d = dims_.d_model;
  std::vector<float> normed(n * d), sub;
  auto norm_rows = [&](const std::vector<float>& src, std::vector<float>& dst, const float* g,
                       const float* beta) {
    for (std::size_t r = 0; r < n; ++r)
      k.layernorm(src.data() + r * d, g, beta, dst.data() + r * d, d, kLayerNormEps);
  };

  if (weights_.flags & kFlagPreNorm) {
    norm_rows(x, normed, b.ln1_g, b.ln1_b);
    attention(b, normed, sub, n);
    k.add(sub.data(), x.data(), n * d);
    norm_rows(x, normed, b.ln2_g, b.ln2_b);
    feed_forward(b, normed, sub, n);
    k.add(sub.data(), x.data(), n * d);
  } else {
    attention(b, x, sub, n);
    k.add(sub.data(), x.data(), n * d);
    norm_rows(x, x, b.ln1_g, b.ln1_b);
    feed_forward(b, x, sub, n);
    k.add(sub.data(), x.data(), n * d);
    norm_rows(x, x, b.ln2_g, b.ln2_b);
  }
  require_finite(x);
}

std::vector<float> TicNetwork::head(const Block& b, const float* out_w, const float* out_b,
                                    std::vector<float> x, std::size_t n) const {
  const KernelTable& k = *kernels_;
  const std::size_t d = dims_.d_model;
  run_block(b, x, n);
  std::vector<float> pooled(d, 0.0f);
  for (std::size_t r = 0; r < n; ++r) k.add(x.data() + r * d, pooled.data(), d);
  const float inv = 1.0f / static_cast<float>(n);
  for (float& v : pooled) v *= inv;
  std::vector<float> out(dims_.output_width());
  k.linear(pooled.data(), 1, d, out_w, out_b, out.size(), out.data());
  require_finite(out);
  return out;
}

TicRawOutput TicNetwork::forward_features(const std::vector<float>& features, std::size_t n) const {
  if (n < 2) throw DataError("window needs at least 2 frames");
  if (features.size() != n * dims_.input_width())
    throw DataError("feature width does not match the network input (" +
                    std::to_string(dims_.input_width()) + " per frame)");
  const std::size_t d = dims_.d_model;
  std::vector<float> x(n * d);
  kernels_->linear(features.data(), n, dims_.input_width(), embed_w_, embed_b_, d, x.data());
  if (weights_.flags & kFlagPositionalEncoding) add_positional_encoding(x, n, d);
  require_finite(x);
  for (const Block& b : encoder_) run_block(b, x, n);

  TicRawOutput out;
  out.drift = head(tpm_d_, out_d_w_, out_d_b_, x, n);
  out.offset = head(tpm_o_, out_o_w_, out_o_b_, std::move(x), n);
  return out;
}

TicRawOutput TicNetwork::forward(const Window& window) const {
  if (window.size() < 2) throw DataError("window needs at least 2 frames");
  if (window.front().sensor_count() != dims_.sensors) {
    throw DataError("window has " + std::to_string(window.front().sensor_count()) +
                    " sensors but the weights expect " + std::to_string(dims_.sensors));
  }
  return forward_features(tic_features(window), window.size());
}

}  // namespace dyncal
