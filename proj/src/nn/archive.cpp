#include "mycloth/nn/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mycloth/common/error.hpp"
#include "mycloth/common/util.hpp"

namespace mycloth::nn {

static_assert(std::endian::native == std::endian::little, "archive format assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'M', 'Y', 'C', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    T value;
    read(&value, sizeof(T));
    return value;
  }

  void read(void* dst, std::size_t n) {
    if (n > bytes_.size() - pos_) throw LoadError("tensor archive is truncated");
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_tensors(const NamedTensors& tensors) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, tensors.size());
  for (const auto& [name, t] : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (int d : t.shape()) put<std::int32_t>(out, d);
    const auto* p = reinterpret_cast<const std::uint8_t*>(t.data());
    out.insert(out.end(), p, p + t.numel() * sizeof(Real));
  }
  return out;
}

NamedTensors decode_tensors(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  char magic[4];
  r.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw LoadError("not a tensor archive (bad magic)");
  auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw LoadError("unsupported tensor archive version " + std::to_string(version));
  auto count = r.get<std::uint64_t>();
  NamedTensors out;
  for (std::uint64_t i = 0; i < count; ++i) {
    auto name_len = r.get<std::uint32_t>();
    if (name_len > r.remaining()) throw LoadError("tensor archive is truncated");
    std::string name(name_len, '\0');
    r.read(name.data(), name_len);
    auto rank = r.get<std::uint32_t>();
    if (rank > 8) throw LoadError("tensor '" + name + "' has implausible rank");
    Shape shape(rank);
    std::size_t numel = 1;
    for (auto& d : shape) {
      d = r.get<std::int32_t>();
      if (d < 0) throw LoadError("tensor '" + name + "' has a negative dimension");
      numel *= static_cast<std::size_t>(d);
    }
    if (numel > r.remaining() / sizeof(Real)) throw LoadError("tensor archive is truncated");
    RealBuffer values(numel);
    r.read(values.data(), numel * sizeof(Real));
    if (!out.emplace(name, Tensor(shape, std::move(values))).second) {
      throw LoadError("duplicate tensor '" + name + "' in archive");
    }
  }
  if (!r.done()) throw LoadError("trailing bytes after tensor archive");
  return out;
}

void save_tensors(const std::filesystem::path& path, const NamedTensors& tensors) {
  atomic_write(path, encode_tensors(tensors));
}

NamedTensors load_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open tensor archive " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_tensors(bytes);
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

}  // namespace mycloth::nn
