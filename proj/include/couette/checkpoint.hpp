#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "couette/errors.hpp"
#include "couette/spectral_domain.hpp"

namespace couette {

/// Binary snapshot of a sheared-frame field. Layout (all little-endian):
///
///   offset  size  field
///   0       4     magic "CTL1"
///   4       8     nx  (int64)
///   12      8     ny  (int64)
///   20      8     lx  (float64)
///   28      8     ly  (float64)
///   36      8     t   (float64)
///   44      8     nu  (float64)
///   52      16*nx*ny  coefficients, row-major over (k index, xi index) in
///                     FFT order, each as re then im (float64)
struct Checkpoint {
    FrequencyGrid grid;
    double t = 0.0;
    double nu = 0.0;
    SpectralField field;
};

inline constexpr std::array<char, 4> kCheckpointMagic = {'C', 'T', 'L', '1'};
inline constexpr std::size_t kCheckpointHeaderBytes = 52;

namespace detail {

template <class T>
void put_le(std::vector<unsigned char>& out, T value) {
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &value, 8);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xffu));
}

template <class T>
T get_le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    T value;
    std::memcpy(&value, &bits, 8);
    return value;
}

}  // namespace detail

inline std::vector<unsigned char> encode_checkpoint(const SpectralField& f, double t, double nu) {
    const auto& g = f.grid();
    std::vector<unsigned char> out;
    out.reserve(kCheckpointHeaderBytes + 16 * g.size());
    out.insert(out.end(), kCheckpointMagic.begin(), kCheckpointMagic.end());
    detail::put_le<std::int64_t>(out, g.nx);
    detail::put_le<std::int64_t>(out, g.ny);
    detail::put_le<double>(out, g.lx);
    detail::put_le<double>(out, g.ly);
    detail::put_le<double>(out, t);
    detail::put_le<double>(out, nu);
    for (const auto& c : f.coeffs()) {
        detail::put_le<double>(out, c.real());
        detail::put_le<double>(out, c.imag());
    }
    return out;
}

inline Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < kCheckpointHeaderBytes || std::memcmp(bytes.data(), kCheckpointMagic.data(), 4) != 0)
        throw ValidationError("checkpoint: missing CTL1 header");
    const unsigned char* p = bytes.data() + 4;
    const auto nx = detail::get_le<std::int64_t>(p);
    const auto ny = detail::get_le<std::int64_t>(p + 8);
    const double lx = detail::get_le<double>(p + 16);
    const double ly = detail::get_le<double>(p + 24);
    const double t = detail::get_le<double>(p + 32);
    const double nu = detail::get_le<double>(p + 40);
    if (nx <= 0 || ny <= 0 || nx > (1 << 20) || ny > (1 << 20)) throw ValidationError("checkpoint: bad dimensions");
    const auto grid = make_grid(static_cast<int>(nx), static_cast<int>(ny), lx, ly);
    if (bytes.size() != kCheckpointHeaderBytes + 16 * grid.size())
        throw ValidationError("checkpoint: payload size does not match dimensions");
    std::vector<cplx> coeffs(grid.size());
    const unsigned char* q = bytes.data() + kCheckpointHeaderBytes;
    for (std::size_t n = 0; n < coeffs.size(); ++n)
        coeffs[n] = cplx(detail::get_le<double>(q + 16 * n), detail::get_le<double>(q + 16 * n + 8));
    return {grid, t, nu, SpectralField(grid, std::move(coeffs))};
}

inline void write_checkpoint(const std::string& path, const SpectralField& f, double t, double nu) {
    const auto bytes = encode_checkpoint(f, t, nu);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("checkpoint: cannot open '" + path + "' for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("checkpoint: cannot open '" + path + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace couette
