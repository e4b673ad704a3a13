#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cge/triadic_grid.hpp"

namespace cge {

/// CGE1 layout, all integers little-endian:
///   "CGE1" | u8 d | u8 N | u16 0 | u32 d(d+1)/2 | u32 0
///   3^{dN} * d(d+1)/2 IEEE-754 doubles, cells row-major, upper triangle row-major
///   u32 descriptor length | UTF-8 descriptor
inline constexpr char kFieldMagic[4] = {'C', 'G', 'E', '1'};
inline constexpr std::size_t kFieldHeaderSize = 16;

std::vector<unsigned char> encode_field(const CoefficientField& field);
CoefficientField decode_field(const std::vector<unsigned char>& bytes);

void write_field(const CoefficientField& field, const std::filesystem::path& path);
CoefficientField read_field(const std::filesystem::path& path);

}  // namespace cge
