#include "coprompt/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "coprompt/error.hpp"

namespace coprompt {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms unsupported");

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw Error("io", "truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void save_tensors(const std::filesystem::path& path,
                  const std::vector<ParamTensor>& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io", "cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_le<uint32_t>(out, kCheckpointVersion);
  write_le<uint64_t>(out, tensors.size());
  for (const ParamTensor& t : tensors) {
    write_le<uint32_t>(out, static_cast<uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    write_le<uint32_t>(out, static_cast<uint32_t>(t.shape.size()));
    for (int64_t d : t.shape) write_le<uint64_t>(out, static_cast<uint64_t>(d));
    for (double x : t.data) write_le<double>(out, x);
  }
  if (!out) throw Error("io", "short write to " + path.string());
}

std::vector<ParamTensor> load_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read checkpoint " + path.string());
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw Error("io", "bad checkpoint magic in " + path.string());
  }
  const uint32_t version = read_le<uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw Error("io", "unsupported checkpoint version " +
                          std::to_string(version));
  }
  const uint64_t count = read_le<uint64_t>(in);
  std::vector<ParamTensor> tensors;
  tensors.reserve(count);
  for (uint64_t k = 0; k < count; ++k) {
    ParamTensor t;
    const uint32_t name_len = read_le<uint32_t>(in);
    t.name.resize(name_len);
    in.read(t.name.data(), name_len);
    if (!in) throw Error("io", "truncated checkpoint");
    const uint32_t rank = read_le<uint32_t>(in);
    int64_t numel = 1;
    for (uint32_t r = 0; r < rank; ++r) {
      const int64_t d = static_cast<int64_t>(read_le<uint64_t>(in));
      t.shape.push_back(d);
      numel *= d;
    }
    t.data.resize(static_cast<size_t>(numel));
    for (double& x : t.data) x = read_le<double>(in);
    tensors.push_back(std::move(t));
  }
  return tensors;
}

TensorArchive::TensorArchive(std::vector<ParamTensor> tensors)
    : tensors_(std::move(tensors)) {}

const ParamTensor& TensorArchive::get(const std::string& name) const {
  for (const ParamTensor& t : tensors_) {
    if (t.name == name) return t;
  }
  throw Error("io", "checkpoint is missing tensor '" + name + "'");
}

bool TensorArchive::contains(const std::string& name) const {
  for (const ParamTensor& t : tensors_) {
    if (t.name == name) return true;
  }
  return false;
}

double TensorArchive::scalar(const std::string& name) const {
  const ParamTensor& t = get(name);
  if (t.data.size() != 1) {
    throw Error("io", "tensor '" + name + "' is not a scalar");
  }
  return t.data[0];
}

ParamTensor scalar_tensor(std::string name, double value) {
  ParamTensor t;
  t.name = std::move(name);
  t.data.push_back(value);
  return t;
}

}  // namespace coprompt
