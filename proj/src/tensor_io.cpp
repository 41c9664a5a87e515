#include "rgtn/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace rgtn {
namespace {

constexpr std::array<char, 4> kMagic{'R', 'G', 'T', '1'};
// Guards against absurd headers before allocating.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

template <typename T>
void put_le(std::ostream& os, T value) {
    std::array<unsigned char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename T>
T get_le(std::istream& is, const char* what) {
    std::array<unsigned char, sizeof(T)> bytes{};
    if (!is.read(reinterpret_cast<char*>(bytes.data()), bytes.size()))
        throw FormatError(std::string("RGT1: truncated ") + what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
    return value;
}

}  // namespace

void write_rgt1(std::ostream& os, const DenseTensor& t) {
    os.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.order()));
    for (std::size_t d : t.shape()) put_le<std::uint64_t>(os, d);
    for (double x : t.data()) put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(x));
    if (!os) throw FormatError("RGT1: write failed");
}

DenseTensor read_rgt1(std::istream& is) {
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), magic.size())) throw FormatError("RGT1: truncated magic");
    if (magic != kMagic) throw FormatError("RGT1: bad magic");
    const auto order = get_le<std::uint32_t>(is, "order");
    if (order == 0) throw FormatError("RGT1: order must be at least 1");
    Shape shape(order);
    std::uint64_t total = 1;
    for (auto& d : shape) {
        const auto v = get_le<std::uint64_t>(is, "shape");
        if (v == 0) throw FormatError("RGT1: zero mode size");
        total *= v;
        if (total > kMaxElements) throw FormatError("RGT1: tensor too large");
        d = static_cast<std::size_t>(v);
    }
    std::vector<double> data(static_cast<std::size_t>(total));
    for (auto& x : data) x = std::bit_cast<double>(get_le<std::uint64_t>(is, "payload"));
    return DenseTensor(std::move(shape), std::move(data));
}

void save_tensor(const std::filesystem::path& path, const DenseTensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path.string() + " for writing");
    write_rgt1(os, t);
}

DenseTensor load_tensor(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path.string());
    return read_rgt1(is);
}

}  // namespace rgtn
