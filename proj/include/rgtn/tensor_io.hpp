#pragma once
// RGT1 binary tensor files:
//   "RGT1" | u32 LE order N | N x u64 LE mode sizes | prod(I) x f64 LE values (row-major)

#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "rgtn/tensor.hpp"

namespace rgtn {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_rgt1(std::ostream& os, const DenseTensor& t);
DenseTensor read_rgt1(std::istream& is);

void save_tensor(const std::filesystem::path& path, const DenseTensor& t);
DenseTensor load_tensor(const std::filesystem::path& path);

}  // namespace rgtn
