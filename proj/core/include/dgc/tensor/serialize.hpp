#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "dgc/tensor/tensor.hpp"

namespace dgc {

// Binary tensor record: magic "TNSR", u32 rank, rank x u32 dims, then the
// values as little-endian float32 in row-major order.
void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

namespace io {

// Little-endian primitives shared by the binary file formats.
void write_u32(std::ostream& os, std::uint32_t v);
std::uint32_t read_u32(std::istream& is);
void write_f32(std::ostream& os, float v);
float read_f32(std::istream& is);
void write_magic(std::ostream& os, const char (&magic)[5]);
void expect_magic(std::istream& is, const char (&magic)[5]);

}  // namespace io

}  // namespace dgc
