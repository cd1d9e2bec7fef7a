#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace dyncal {

struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<float> data;

  std::size_t numel() const;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Header flag bits of the weight file.
enum WeightFlags : std::uint8_t {
  kFlagPositionalEncoding = 1u << 0,  ///< add sinusoidal positional encoding
  kFlagPreNorm = 1u << 1,             ///< pre-norm blocks (post-norm when clear)
  kFlagGeluTanh = 1u << 2,            ///< tanh GELU approximation (erf GELU when clear)
};
constexpr std::uint8_t kKnownFlags = kFlagPositionalEncoding | kFlagPreNorm | kFlagGeluTanh;
constexpr std::uint8_t kDefaultFlags = kFlagPositionalEncoding | kFlagPreNorm;

/// Architecture sizes implied by a bundle's tensor shapes.
struct TicDims {
  std::uint32_t sensors = 6;
  std::uint32_t d_model = 256;
  std::uint32_t ffn = 512;
  std::uint32_t heads = 8;
  std::uint32_t encoder_blocks = 3;

  std::uint32_t input_width() const { return sensors * 12; }
  std::uint32_t output_width() const { return sensors * 6; }
};

/// Named f32 tensors plus header flags. Tensor order is preserved through
/// save/load so files round-trip byte for byte.
class WeightBundle {
 public:
  std::uint8_t flags = kDefaultFlags;

  void add(std::string name, Tensor tensor);
  const Tensor* find(const std::string& name) const;
  /// Throws DataError("missing tensor: <name>") when absent.
  const Tensor& at(const std::string& name) const;
  bool erase(const std::string& name);

  const std::vector<NamedTensor>& tensors() const { return tensors_; }

 private:
  std::vector<NamedTensor> tensors_;
};

/// Required tensor names with their expected shapes, in canonical order.
std::vector<std::pair<std::string, std::vector<std::uint32_t>>> expected_tensors(const TicDims& dims);

/// Checks flags, presence, shapes and finiteness; returns the inferred sizes.
TicDims validate_weights(const WeightBundle& bundle);

WeightBundle read_weights(std::istream& in);
void write_weights(const WeightBundle& bundle, std::ostream& out);
WeightBundle load_weights(const std::filesystem::path& path);
void save_weights(const WeightBundle& bundle, const std::filesystem::path& path);

/// Deterministic untrained weights.
///
/// Tensors are filled in canonical order from one std::mt19937 seeded with
/// `seed`; each draw u = next() / 2^32 maps to (2u - 1) * scale with
/// scale = 1/sqrt(fan_in) for matrices and biases, and layer norms get
/// gamma = 1 + 0.1 (2u - 1), beta = 0.1 (2u - 1).
WeightBundle seeded_weights(const TicDims& dims, std::uint32_t seed,
                            std::uint8_t flags = kDefaultFlags);

}  // namespace dyncal
