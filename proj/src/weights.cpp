#include "dyncal/weights.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "binary_io.hpp"
#include "dyncal/error.hpp"

namespace dyncal {

namespace {

constexpr char kMagic[5] = "TICW";
constexpr std::uint32_t kVersion = 1;

std::string shape_str(const std::vector<std::uint32_t>& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ']';
  return os.str();
}

void append_block(std::vector<std::pair<std::string, std::vector<std::uint32_t>>>& out,
                  const std::string& p, std::uint32_t d, std::uint32_t f) {
  for (const char* proj : {"q", "k", "v", "out"}) {
    out.push_back({p + ".attn." + proj + ".weight", {d, d}});
    out.push_back({p + ".attn." + proj + ".bias", {d}});
  }
  for (const char* ln : {"ln1", "ln2"}) {
    out.push_back({p + "." + ln + ".gamma", {d}});
    out.push_back({p + "." + ln + ".beta", {d}});
  }
  out.push_back({p + ".ffn.w1", {f, d}});
  out.push_back({p + ".ffn.b1", {f}});
  out.push_back({p + ".ffn.w2", {d, f}});
  out.push_back({p + ".ffn.b2", {d}});
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (std::uint32_t d : shape) n *= d;
  return n;
}

void WeightBundle::add(std::string name, Tensor tensor) {
  for (NamedTensor& t : tensors_) {
    if (t.name == name) {
      t.tensor = std::move(tensor);
      return;
    }
  }
  tensors_.push_back({std::move(name), std::move(tensor)});
}

const Tensor* WeightBundle::find(const std::string& name) const {
  for (const NamedTensor& t : tensors_)
    if (t.name == name) return &t.tensor;
  return nullptr;
}

const Tensor& WeightBundle::at(const std::string& name) const {
  if (const Tensor* t = find(name)) return *t;
  throw DataError("missing tensor: " + name);
}

bool WeightBundle::erase(const std::string& name) {
  for (auto it = tensors_.begin(); it != tensors_.end(); ++it) {
    if (it->name == name) {
      tensors_.erase(it);
      return true;
    }
  }
  return false;
}

std::vector<std::pair<std::string, std::vector<std::uint32_t>>> expected_tensors(const TicDims& dims) {
  std::vector<std::pair<std::string, std::vector<std::uint32_t>>> out;
  const std::uint32_t d = dims.d_model, f = dims.ffn;
  out.push_back({"embed.weight", {d, dims.input_width()}});
  out.push_back({"embed.bias", {d}});
  for (std::uint32_t b = 0; b < dims.encoder_blocks; ++b) append_block(out, "enc" + std::to_string(b), d, f);
  for (const char* head : {"tpm_d", "tpm_o"}) {
    append_block(out, std::string(head) + ".enc", d, f);
    out.push_back({std::string(head) + ".out.weight", {dims.output_width(), d}});
    out.push_back({std::string(head) + ".out.bias", {dims.output_width()}});
  }
  return out;
}

TicDims validate_weights(const WeightBundle& bundle) {
  if (bundle.flags & ~kKnownFlags)
    throw DataError("unsupported flags 0x" + std::to_string(static_cast<int>(bundle.flags)));
  const Tensor& embed = bundle.at("embed.weight");
  if (embed.shape.size() != 2 || embed.shape[1] == 0 || embed.shape[1] % 12 != 0)
    throw DataError("wrong shape for tensor 'embed.weight': got " + shape_str(embed.shape));
  const Tensor& w1 = bundle.at("enc0.ffn.w1");
  if (w1.shape.size() != 2) throw DataError("wrong shape for tensor 'enc0.ffn.w1': got " + shape_str(w1.shape));

  TicDims dims;
  dims.d_model = embed.shape[0];
  dims.sensors = embed.shape[1] / 12;
  dims.ffn = w1.shape[0];
  if (dims.d_model == 0 || dims.d_model % dims.heads != 0)
    throw DataError("model width " + std::to_string(dims.d_model) + " is not divisible by " +
                    std::to_string(dims.heads) + " heads");

  for (const auto& [name, shape] : expected_tensors(dims)) {
    const Tensor& t = bundle.at(name);
    if (t.shape != shape) {
      throw DataError("wrong shape for tensor '" + name + "': expected " + shape_str(shape) +
                      ", got " + shape_str(t.shape));
    }
  }
  for (const NamedTensor& t : bundle.tensors()) {
    if (t.tensor.data.size() != t.tensor.numel())
      throw DataError("tensor '" + t.name + "' data size does not match its shape");
    for (float v : t.tensor.data)
      if (!std::isfinite(v)) throw DataError("non-finite value in tensor '" + t.name + "'");
  }
  return dims;
}

WeightBundle read_weights(std::istream& in) {
  detail::expect_magic(in, kMagic);
  const auto version = detail::get_le<std::uint32_t>(in, "version");
  if (version != kVersion) throw DataError("unsupported version " + std::to_string(version));
  WeightBundle bundle;
  bundle.flags = detail::get_le<std::uint8_t>(in, "flags");
  const auto count = detail::get_le<std::uint32_t>(in, "tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = detail::get_le<std::uint16_t>(in, "tensor name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw DataError("truncated record: tensor name");
    Tensor t;
    const auto rank = detail::get_le<std::uint8_t>(in, "tensor rank");
    t.shape.resize(rank);
    for (std::uint32_t& d : t.shape) d = detail::get_le<std::uint32_t>(in, "tensor dims");
    const std::size_t n = t.numel();
    if (n > (std::size_t{1} << 28)) throw DataError("tensor '" + name + "' is implausibly large");
    t.data.resize(n);
    detail::get_le_array(in, t.data.data(), n, ("tensor '" + name + "' data").c_str());
    bundle.add(std::move(name), std::move(t));
  }
  return bundle;
}

void write_weights(const WeightBundle& bundle, std::ostream& out) {
  out.write(kMagic, 4);
  detail::put_le<std::uint32_t>(out, kVersion);
  detail::put_le<std::uint8_t>(out, bundle.flags);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bundle.tensors().size()));
  for (const NamedTensor& t : bundle.tensors()) {
    if (t.name.size() > 0xffff) throw DataError("tensor name too long: " + t.name);
    if (t.tensor.shape.size() > 0xff) throw DataError("tensor rank too large: " + t.name);
    if (t.tensor.data.size() != t.tensor.numel())
      throw DataError("tensor '" + t.name + "' data size does not match its shape");
    detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.tensor.shape.size()));
    for (std::uint32_t d : t.tensor.shape) detail::put_le<std::uint32_t>(out, d);
    detail::put_le_array(out, t.tensor.data.data(), t.tensor.data.size());
  }
}

WeightBundle load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing file: " + path.string());
  try {
    WeightBundle b = read_weights(in);
    validate_weights(b);
    return b;
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_weights(const WeightBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  write_weights(bundle, out);
  if (!out) throw DataError("write failed: " + path.string());
}

WeightBundle seeded_weights(const TicDims& dims, std::uint32_t seed, std::uint8_t flags) {
  std::mt19937 rng(seed);
  auto draw = [&rng] { return 2.0 * (static_cast<double>(rng()) / 4294967296.0) - 1.0; };

  WeightBundle bundle;
  bundle.flags = flags;
  for (const auto& [name, shape] : expected_tensors(dims)) {
    Tensor t;
    t.shape = shape;
    t.data.resize(t.numel());
    if (ends_with(name, ".gamma")) {
      for (float& v : t.data) v = static_cast<float>(1.0 + 0.1 * draw());
    } else if (ends_with(name, ".beta")) {
      for (float& v : t.data) v = static_cast<float>(0.1 * draw());
    } else {
      // Biases share the fan-in of their weight matrix.
      std::uint32_t fan_in = shape.size() == 2 ? shape[1] : 0;
      if (fan_in == 0) {
        const std::string stem = name.substr(0, name.rfind('.'));
        const std::string wname = ends_with(name, ".b1")   ? stem + ".w1"
                                  : ends_with(name, ".b2") ? stem + ".w2"
                                                           : stem + ".weight";
        fan_in = bundle.at(wname).shape[1];
      }
      const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (float& v : t.data) v = static_cast<float>(scale * draw());
    }
    bundle.add(name, std::move(t));
  }
  return bundle;
}

}  // namespace dyncal
