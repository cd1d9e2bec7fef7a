#pragma once

#include <vector>

#include "dyncal/kernels.hpp"
#include "dyncal/sensor_model.hpp"
#include "dyncal/weights.hpp"

namespace dyncal {

/// Raw head outputs: sensors x 6 values each, in sensor order.
struct TicRawOutput {
  std::vector<float> drift;
  std::vector<float> offset;
};

/// Per-frame network input: S*3 accelerations divided by 30 followed by
/// S*9 row-major orientation entries. Returns n x (S*12), row-major.
std::vector<float> tic_features(const Window& window);

constexpr float kAccelScale = 30.0f;
constexpr float kLayerNormEps = 1e-5f;

/// Transformer calibration network: linear embedding (+ optional sinusoidal
/// positional encoding), three encoder blocks, then two heads that each run
/// one more encoder block, average over time and map to S rotations in 6D.
///
/// Immutable after construction; forward() is reentrant.
class TicNetwork {
 public:
  /// Validates the bundle; throws DataError on any mismatch.
  explicit TicNetwork(WeightBundle weights, const KernelTable& kernels = dyncal::kernels());
  TicNetwork(const TicNetwork&) = delete;
  TicNetwork& operator=(const TicNetwork&) = delete;

  const TicDims& dims() const { return dims_; }
  const KernelTable& kernel_table() const { return *kernels_; }
  std::uint8_t flags() const { return weights_.flags; }

  /// Runs the network on a window of n >= 2 frames. Throws DataError on a
  /// sensor-count mismatch and NumericalError("numerical failure") when an
  /// activation becomes non-finite.
  TicRawOutput forward(const Window& window) const;
  TicRawOutput forward_features(const std::vector<float>& features, std::size_t frames) const;

 private:
  struct Block {
    const float *q_w, *q_b, *k_w, *k_b, *v_w, *v_b, *o_w, *o_b;
    const float *ln1_g, *ln1_b, *ln2_g, *ln2_b;
    const float *w1, *b1, *w2, *b2;
  };

  Block bind_block(const std::string& prefix) const;
  void run_block(const Block& b, std::vector<float>& x, std::size_t n) const;
  void attention(const Block& b, const std::vector<float>& in, std::vector<float>& out,
                 std::size_t n) const;
  void feed_forward(const Block& b, const std::vector<float>& in, std::vector<float>& out,
                    std::size_t n) const;
  std::vector<float> head(const Block& b, const float* out_w, const float* out_b,
                          std::vector<float> x, std::size_t n) const;

  WeightBundle weights_;
  TicDims dims_;
  const KernelTable* kernels_;
  std::vector<Block> encoder_;
  Block tpm_d_{}, tpm_o_{};
  const float *embed_w_ = nullptr, *embed_b_ = nullptr;
  const float *out_d_w_ = nullptr, *out_d_b_ = nullptr, *out_o_w_ = nullptr, *out_o_b_ = nullptr;
};

}  // namespace dyncal
