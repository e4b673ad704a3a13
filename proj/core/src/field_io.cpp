#include "cge/field_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cge/error.hpp"

namespace cge {

namespace {

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xffU));
    out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) {
        out.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xffU));
    }
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
        out.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xffU));
    }
}

std::uint64_t get_le(const std::vector<unsigned char>& in, std::size_t pos, int bytes) {
    std::uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) {
        v |= static_cast<std::uint64_t>(in[pos + static_cast<std::size_t>(b)]) << (8 * b);
    }
    return v;
}

}  // namespace

std::vector<unsigned char> encode_field(const CoefficientField& field) {
    const GridSpec& g = field.grid();
    std::vector<unsigned char> out;
    out.reserve(kFieldHeaderSize + field.components().size() * 8 + 4 + field.descriptor().size());
    out.insert(out.end(), std::begin(kFieldMagic), std::end(kFieldMagic));
    out.push_back(static_cast<unsigned char>(g.dim));
    out.push_back(static_cast<unsigned char>(g.level));
    put_u16(out, 0);
    put_u32(out, static_cast<std::uint32_t>(g.matrix_components()));
    put_u32(out, 0);
    for (double v : field.components()) {
        put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    put_u32(out, static_cast<std::uint32_t>(field.descriptor().size()));
    out.insert(out.end(), field.descriptor().begin(), field.descriptor().end());
    return out;
}

CoefficientField decode_field(const std::vector<unsigned char>& in) {
    if (in.size() < kFieldHeaderSize) {
        throw FormatError("truncated header: " + std::to_string(in.size()) + " bytes");
    }
    if (std::memcmp(in.data(), kFieldMagic, 4) != 0) {
        throw FormatError("bad magic, expected \"CGE1\"");
    }
    const int dim = in[4];
    const int level = in[5];
    if (get_le(in, 6, 2) != 0 || get_le(in, 12, 4) != 0) {
        throw FormatError("reserved header fields must be zero");
    }
    if (dim < 1 || dim > kMaxDim) {
        throw FormatError("unsupported dimension " + std::to_string(dim));
    }
    GridSpec grid;
    try {
        grid = GridSpec::make(dim, level);
    } catch (const RangeError& e) {
        throw FormatError(std::string("invalid grid in header: ") + e.what());
    }
    const std::uint64_t ncomp = get_le(in, 8, 4);
    if (ncomp != grid.matrix_components()) {
        throw FormatError("component count " + std::to_string(ncomp) + " does not match d(d+1)/2 = " +
                          std::to_string(grid.matrix_components()));
    }
    const std::size_t count = static_cast<std::size_t>(grid.cell_count()) * ncomp;
    const std::size_t payload_end = kFieldHeaderSize + count * 8;
    if (in.size() < payload_end + 4) {
        throw FormatError("truncated payload: file has " + std::to_string(in.size()) +
                          " bytes, need at least " + std::to_string(payload_end + 4));
    }
    std::vector<double> comps(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t pos = kFieldHeaderSize + 8 * k;
        const double v = std::bit_cast<double>(get_le(in, pos, 8));
        if (!std::isfinite(v)) {
            throw FormatError("non-finite value at byte offset " + std::to_string(pos));
        }
        comps[k] = v;
    }
    const std::size_t len = static_cast<std::size_t>(get_le(in, payload_end, 4));
    if (in.size() != payload_end + 4 + len) {
        throw FormatError("descriptor length " + std::to_string(len) + " does not match file size");
    }
    std::string descriptor(in.begin() + static_cast<std::ptrdiff_t>(payload_end + 4), in.end());
    return CoefficientField(grid, std::move(comps), std::move(descriptor));
}

void write_field(const CoefficientField& field, const std::filesystem::path& path) {
    const auto bytes = encode_field(field);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error("write to " + path.string() + " failed");
    }
}

CoefficientField read_field(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_field(bytes);
}

}  // namespace cge
