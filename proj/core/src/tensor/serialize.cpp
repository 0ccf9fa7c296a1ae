#include "dgc/tensor/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "dgc/error.hpp"

namespace dgc {

namespace io {

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw DataError("unexpected end of binary stream");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& os, float v) { write_u32(os, std::bit_cast<std::uint32_t>(v)); }

float read_f32(std::istream& is) { return std::bit_cast<float>(read_u32(is)); }

void write_magic(std::ostream& os, const char (&magic)[5]) { os.write(magic, 4); }

void expect_magic(std::istream& is, const char (&magic)[5]) {
  char got[4];
  if (!is.read(got, 4) || std::memcmp(got, magic, 4) != 0) {
    throw DataError(std::string("bad magic, expected ") + magic);
  }
}

}  // namespace io

void write_tensor(std::ostream& os, const Tensor& t) {
  io::write_magic(os, "TNSR");
  io::write_u32(os, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) io::write_u32(os, static_cast<std::uint32_t>(d));
  for (float v : t.data()) io::write_f32(os, v);
}

Tensor read_tensor(std::istream& is) {
  io::expect_magic(is, "TNSR");
  const auto rank = io::read_u32(is);
  if (rank > 8) throw DataError("tensor record rank too large");
  Shape shape(rank);
  for (auto& d : shape) d = io::read_u32(is);
  std::vector<float> data(static_cast<std::size_t>(shape_numel(shape)));
  for (auto& v : data) v = io::read_f32(is);
  return Tensor::from_data(shape, std::move(data));
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  write_tensor(os, t);
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read " + path.string());
  return read_tensor(is);
}

}  // namespace dgc
