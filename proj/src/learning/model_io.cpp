#include "rolle/learning/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rolle/errors.hpp"

namespace rolle::learning {
namespace {

constexpr char kMagic[4] = {'R', 'L', 'L', 'E'};
constexpr std::uint32_t kMaxExtent = 1u << 16;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint16_t u16() {
    need(2);
    const std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  int extent(const char* what) {
    const std::uint32_t v = u32();
    if (v == 0 || v > kMaxExtent) throw CorruptModelError(std::string("model file has invalid ") + what);
    return static_cast<int>(v);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw CorruptModelError("model file is truncated");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model<float>& m) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u16(out, kModelFormatVersion);
  const auto& s = m.spec();
  put_u32(out, static_cast<std::uint32_t>(s.in_channels));
  put_u32(out, static_cast<std::uint32_t>(s.in_height));
  put_u32(out, static_cast<std::uint32_t>(s.in_width));
  put_u32(out, static_cast<std::uint32_t>(s.convs.size()));
  for (const auto& c : s.convs) {
    put_u32(out, static_cast<std::uint32_t>(c.out_channels));
    put_u32(out, static_cast<std::uint32_t>(c.kernel));
    put_u32(out, static_cast<std::uint32_t>(c.stride));
  }
  put_u32(out, static_cast<std::uint32_t>(s.dense.size()));
  for (int d : s.dense) put_u32(out, static_cast<std::uint32_t>(d));
  out.reserve(out.size() + 4 * m.parameter_count());
  for (const auto& p : m.parameters())
    for (float v : p) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Model<float> deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw IncompatibleModelError("not a model file (bad magic)");
  Reader r(bytes.subspan(4));
  const std::uint16_t version = r.u16();
  if (version != kModelFormatVersion)
    throw IncompatibleModelError("unsupported model format version " + std::to_string(version) +
                                 " (supported: " + std::to_string(kModelFormatVersion) + ")");
  ModelSpec s;
  s.in_channels = r.extent("input channels");
  s.in_height = r.extent("input height");
  s.in_width = r.extent("input width");
  const std::uint32_t nconv = r.u32();
  if (nconv > 64) throw CorruptModelError("model file has invalid conv count");
  for (std::uint32_t i = 0; i < nconv; ++i) {
    ConvSpec c;
    c.out_channels = r.extent("conv channels");
    c.kernel = r.extent("conv kernel");
    c.stride = r.extent("conv stride");
    s.convs.push_back(c);
  }
  const std::uint32_t ndense = r.u32();
  if (ndense == 0 || ndense > 64) throw CorruptModelError("model file has invalid dense count");
  for (std::uint32_t i = 0; i < ndense; ++i) s.dense.push_back(r.extent("dense width"));
  Model<float> m;
  try {
    m = Model<float>(s);
  } catch (const ShapeError& e) {
    throw CorruptModelError(std::string("model file describes an invalid network: ") + e.what());
  }
  for (auto p : m.parameters())
    for (auto& v : p) v = r.f32();
  if (!r.done()) throw CorruptModelError("model file has trailing bytes");
  return m;
}

void save_model(const Model<float>& m, const std::filesystem::path& path) {
  const auto bytes = serialize_model(m);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw RecordError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  f.close();
  if (!f) throw RecordError("failed writing " + path.string());
}

Model<float> load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot open model file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace rolle::learning
