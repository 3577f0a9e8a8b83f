#include "unotb/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "unotb/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint code assumes a little-endian host");

namespace unotb {

namespace {
constexpr char kMagic[6] = {'U', 'N', 'O', 'T', 'B', '1'};

void write_u32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t read_u32(std::istream& is, const std::string& path) {
  uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(v)))
    throw IoError("truncated checkpoint: " + path);
  return v;
}
}  // namespace

void save_checkpoint(
    const std::string& path,
    const std::vector<std::pair<std::string, const Tensor*>>& tensors) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  write_u32(os, static_cast<uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    write_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(os, static_cast<uint32_t>(t->rank()));
    for (const int64_t d : t->shape()) write_u32(os, static_cast<uint32_t>(d));
    os.write(reinterpret_cast<const char*>(t->data()),
             static_cast<std::streamsize>(t->size() * sizeof(double)));
  }
  if (!os) throw IoError("failed writing checkpoint: " + path);
}

std::vector<std::pair<std::string, Tensor>> load_checkpoint(
    const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[sizeof(kMagic)] = {};
  if (!is.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a checkpoint file (bad magic): " + path);
  const uint32_t count = read_u32(is, path);
  std::vector<std::pair<std::string, Tensor>> out;
  out.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t name_len = read_u32(is, path);
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len))
      throw IoError("truncated checkpoint: " + path);
    const uint32_t rank = read_u32(is, path);
    std::vector<int64_t> shape(rank);
    for (uint32_t r = 0; r < rank; ++r)
      shape[r] = static_cast<int64_t>(read_u32(is, path));
    Tensor t(shape);
    if (!is.read(reinterpret_cast<char*>(t.data()),
                 static_cast<std::streamsize>(t.size() * sizeof(double))))
      throw IoError("truncated checkpoint: " + path);
    out.emplace_back(std::move(name), std::move(t));
  }
  return out;
}

}  // namespace unotb
