#include "bernquant/tensor_io.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "bernquant/errors.h"

namespace bernquant {

static_assert(std::endian::native == std::endian::little,
              "tensor files are written in host order, which must be little-endian");

namespace {

constexpr char kMagic[4] = {'B', 'Q', 'T', '1'};

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw FormatError(path + ": truncated tensor file");
  return v;
}

}  // namespace

void save_tensor(const Tensor& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(kMagic, 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t e : t.extents()) put<std::uint64_t>(out, e);
  const auto v = t.values();
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!out) throw Error("failed writing " + path);
}

Tensor load_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open tensor file " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError(path + ": not a tensor file (bad magic)");
  const auto rank = get<std::uint32_t>(in, path);
  if (rank == 0 || rank > 16) throw FormatError(path + ": implausible rank " + std::to_string(rank));
  std::vector<std::size_t> extents(rank);
  std::uint64_t total = 1;
  for (auto& e : extents) {
    const auto v = get<std::uint64_t>(in, path);
    if (v == 0 || v > (1ULL << 32)) throw FormatError(path + ": implausible extent");
    e = static_cast<std::size_t>(v);
    total *= v;
    if (total > (1ULL << 34)) throw FormatError(path + ": tensor too large");
  }
  Tensor t(extents);
  auto v = t.values();
  if (!in.read(reinterpret_cast<char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(double))))
    throw FormatError(path + ": truncated tensor data");
  if (in.peek() != std::char_traits<char>::eof())
    throw FormatError(path + ": trailing bytes after tensor data");
  return t;
}

}  // namespace bernquant
