#include "tnt/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "tnt/io.hpp"

namespace tnt {
namespace {

constexpr char kMagic[4] = {'T', 'N', 'T', 'W'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  std::uint32_t u32(const char* what) {
    if (bytes_.size() - pos_ < 4) {
      fail(ErrorKind::kFormat, std::string("weight file truncated while reading ") + what);
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  bool at_end() const { return pos_ == bytes_.size(); }
  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_weights(const NetWeights& w, const std::filesystem::path& path) {
  std::string out(kMagic, 4);
  put_u32(out, kWeightsVersion);
  put_u32(out, static_cast<std::uint32_t>(w.config.T));
  put_u32(out, static_cast<std::uint32_t>(w.config.d_ap));
  put_u32(out, static_cast<std::uint32_t>(w.config.channels));
  put_u32(out, static_cast<std::uint32_t>(w.config.fc_hidden));
  w.for_each_tensor([&out](std::span<const float> data, const TensorDims& dims) {
    put_u32(out, static_cast<std::uint32_t>(dims.size()));
    for (std::uint32_t d : dims) put_u32(out, d);
    for (float f : data) put_f32(out, f);
  });
  write_file_atomic(path, out);
}

NetWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open weight file " + path.string());
  Reader r(std::string(std::istreambuf_iterator<char>(in), {}));
  if (r.bytes().size() < 4 || std::memcmp(r.bytes().data(), kMagic, 4) != 0) {
    fail(ErrorKind::kFormat, path.string() + " is not a weight file (bad magic)");
  }
  r.u32("magic");
  const std::uint32_t version = r.u32("version");
  if (version != kWeightsVersion) {
    fail(ErrorKind::kFormat, "unsupported weight file version " + std::to_string(version));
  }
  NetConfig cfg;
  cfg.T = static_cast<int>(r.u32("T"));
  cfg.d_ap = static_cast<int>(r.u32("d_ap"));
  cfg.channels = static_cast<int>(r.u32("channels"));
  cfg.fc_hidden = static_cast<int>(r.u32("fc_hidden"));
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail(ErrorKind::kFormat, std::string("weight file header: ") + e.what());
  }
  NetWeights w = NetWeights::zeros(cfg);
  w.for_each_tensor([&r](std::span<float> data, const TensorDims& dims) {
    const std::uint32_t rank = r.u32("tensor rank");
    bool same = rank == dims.size();
    for (std::uint32_t i = 0; i < rank; ++i) {
      const std::uint32_t d = r.u32("tensor dims");
      same = same && i < dims.size() && d == dims[i];
    }
    if (!same) fail(ErrorKind::kFormat, "tensor shape in weight file disagrees with its header");
    for (float& f : data) f = r.f32("tensor data");
  });
  if (!r.at_end()) fail(ErrorKind::kFormat, "trailing bytes after the last tensor");
  return w;
}

NetWeights load_weights(const std::filesystem::path& path, const NetConfig& expected) {
  NetWeights w = load_weights(path);
  const NetConfig& got = w.config;
  if (got.T != expected.T || got.d_ap != expected.d_ap || got.channels != expected.channels ||
      got.fc_hidden != expected.fc_hidden) {
    fail(ErrorKind::kShape,
         "weight file has T=" + std::to_string(got.T) + " d_ap=" + std::to_string(got.d_ap) +
             " C=" + std::to_string(got.channels) + " fc_hidden=" + std::to_string(got.fc_hidden) +
             ", config expects T=" + std::to_string(expected.T) +
             " d_ap=" + std::to_string(expected.d_ap) + " C=" + std::to_string(expected.channels) +
             " fc_hidden=" + std::to_string(expected.fc_hidden));
  }
  w.config.seed = expected.seed;
  return w;
}

}  // namespace tnt
