#include "oracle/tic_oracle.hpp"

#include <cmath>
#include <string>

namespace dyncal::test {

namespace {

using Mat = std::vector<std::vector<double>>;

struct Params {
  const WeightBundle& w;
  std::size_t d, f, sensors;
  bool pre_norm, tanh_gelu;

  std::vector<double> vec(const std::string& name) const {
    const Tensor& t = w.at(name);
    return {t.data.begin(), t.data.end()};
  }
  Mat mat(const std::string& name) const {
    const Tensor& t = w.at(name);
    Mat m(t.shape[0], std::vector<double>(t.shape[1]));
    for (std::size_t r = 0; r < t.shape[0]; ++r)
      for (std::size_t c = 0; c < t.shape[1]; ++c) m[r][c] = t.data[r * t.shape[1] + c];
    return m;
  }
};

Mat affine(const Mat& x, const Mat& w, const std::vector<double>& b) {
  Mat y(x.size(), std::vector<double>(w.size()));
  for (std::size_t r = 0; r < x.size(); ++r)
    for (std::size_t o = 0; o < w.size(); ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < x[r].size(); ++i) s += w[o][i] * x[r][i];
      y[r][o] = s;
    }
  return y;
}

Mat layer_norm(const Mat& x, const std::vector<double>& g, const std::vector<double>& b) {
  Mat y = x;
  for (auto& row : y) {
    double mean = 0, var = 0;
    for (double v : row) mean += v;
    mean /= row.size();
    for (double v : row) var += (v - mean) * (v - mean);
    var /= row.size();
    const double inv = 1.0 / std::sqrt(var + 1e-5);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = (row[i] - mean) * inv * g[i] + b[i];
  }
  return y;
}

void add_into(Mat& x, const Mat& y) {
  for (std::size_t r = 0; r < x.size(); ++r)
    for (std::size_t c = 0; c < x[r].size(); ++c) x[r][c] += y[r][c];
}

Mat self_attention(const Params& p, const std::string& pre, const Mat& x) {
  const Mat q = affine(x, p.mat(pre + ".attn.q.weight"), p.vec(pre + ".attn.q.bias"));
  const Mat k = affine(x, p.mat(pre + ".attn.k.weight"), p.vec(pre + ".attn.k.bias"));
  const Mat v = affine(x, p.mat(pre + ".attn.v.weight"), p.vec(pre + ".attn.v.bias"));
  const std::size_t n = x.size(), heads = 8, hd = p.d / heads;
  Mat ctx(n, std::vector<double>(p.d, 0.0));
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> a(n);
      double mx = -1e300;
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t c = h * hd; c < (h + 1) * hd; ++c) s += q[i][c] * k[j][c];
        a[j] = s / std::sqrt(static_cast<double>(hd));
        mx = std::max(mx, a[j]);
      }
      double z = 0;
      for (double& e : a) z += (e = std::exp(e - mx));
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t c = h * hd; c < (h + 1) * hd; ++c) ctx[i][c] += a[j] / z * v[j][c];
    }
  }
  return affine(ctx, p.mat(pre + ".attn.out.weight"), p.vec(pre + ".attn.out.bias"));
}

Mat ffn(const Params& p, const std::string& pre, const Mat& x) {
  Mat h = affine(x, p.mat(pre + ".ffn.w1"), p.vec(pre + ".ffn.b1"));
  for (auto& row : h)
    for (double& v : row) {
      if (p.tanh_gelu)
        v = 0.5 * v * (1 + std::tanh(std::sqrt(2 / M_PI) * (v + 0.044715 * v * v * v)));
      else
        v = 0.5 * v * (1 + std::erf(v / std::sqrt(2.0)));
    }
  return affine(h, p.mat(pre + ".ffn.w2"), p.vec(pre + ".ffn.b2"));
}

Mat encoder_block(const Params& p, const std::string& pre, Mat x) {
  const auto g1 = p.vec(pre + ".ln1.gamma"), b1 = p.vec(pre + ".ln1.beta");
  const auto g2 = p.vec(pre + ".ln2.gamma"), b2 = p.vec(pre + ".ln2.beta");
  if (p.pre_norm) {
    add_into(x, self_attention(p, pre, layer_norm(x, g1, b1)));
    add_into(x, ffn(p, pre, layer_norm(x, g2, b2)));
    return x;
  }
  add_into(x, self_attention(p, pre, x));
  x = layer_norm(x, g1, b1);
  add_into(x, ffn(p, pre, x));
  return layer_norm(x, g2, b2);
}

std::vector<double> pooled_head(const Params& p, const std::string& name, Mat x) {
  x = encoder_block(p, name + ".enc", std::move(x));
  Mat mean(1, std::vector<double>(p.d, 0.0));
  for (const auto& row : x)
    for (std::size_t c = 0; c < p.d; ++c) mean[0][c] += row[c] / x.size();
  return affine(mean, p.mat(name + ".out.weight"), p.vec(name + ".out.bias"))[0];
}

}  // namespace

OracleOutput tic_oracle_forward(const WeightBundle& weights, const Window& window) {
  const Tensor& embed = weights.at("embed.weight");
  Params p{weights, embed.shape[0], weights.at("enc0.ffn.w1").shape[0], embed.shape[1] / 12,
           (weights.flags & kFlagPreNorm) != 0, (weights.flags & kFlagGeluTanh) != 0};

  const std::size_t n = window.size(), s = p.sensors;
  Mat in(n, std::vector<double>(s * 12));
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t k = 0; k < s; ++k) {
      const auto& r = window[t].sensors[k];
      for (int i = 0; i < 3; ++i) in[t][k * 3 + i] = r.accel[i] / 30.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) in[t][s * 3 + k * 9 + i * 3 + j] = r.orientation.matrix()(i, j);
    }

  Mat x = affine(in, p.mat("embed.weight"), p.vec("embed.bias"));
  if (weights.flags & kFlagPositionalEncoding) {
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t i = 0; i < p.d; ++i) {
        const double angle = t / std::pow(10000.0, static_cast<double>(i - i % 2) / p.d);
        x[t][i] += (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
      }
  }
  for (int b = 0; weights.find("enc" + std::to_string(b) + ".ffn.w1"); ++b)
    x = encoder_block(p, "enc" + std::to_string(b), std::move(x));
  return {pooled_head(p, "tpm_d", x), pooled_head(p, "tpm_o", x)};
}

}  // namespace dyncal::test
