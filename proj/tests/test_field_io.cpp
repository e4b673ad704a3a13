#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "cge/error.hpp"
#include "cge/field_generators.hpp"
#include "cge/field_io.hpp"

namespace {

using namespace cge;

CoefficientField sample_field() {
    return gen_random_spd(GridSpec::make(2, 2), 0.1, 10.0, 7);
}

TEST(FieldIo, HeaderLayout) {
    const CoefficientField f = sample_field();
    const auto bytes = encode_field(f);
    ASSERT_GE(bytes.size(), kFieldHeaderSize);
    EXPECT_EQ(std::memcmp(bytes.data(), "CGE1", 4), 0);
    EXPECT_EQ(bytes[4], 2);
    EXPECT_EQ(bytes[5], 2);
    EXPECT_EQ(bytes[8], 3);  // d(d+1)/2 little-endian
    const std::size_t payload = 81 * 3 * sizeof(double);
    EXPECT_EQ(bytes.size(), kFieldHeaderSize + payload + 4 + f.descriptor().size());
}

TEST(FieldIo, RoundTripIsBitExact) {
    const CoefficientField f = sample_field();
    const CoefficientField g = decode_field(encode_field(f));
    ASSERT_EQ(g.grid(), f.grid());
    EXPECT_EQ(g.descriptor(), f.descriptor());
    ASSERT_EQ(g.components().size(), f.components().size());
    EXPECT_EQ(std::memcmp(g.components().data(), f.components().data(), f.components().size() * sizeof(double)), 0);
    EXPECT_EQ(g.content_hash(), f.content_hash());
}

TEST(FieldIo, FileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "cge_field_io_test.cge";
    const CoefficientField f = sample_field();
    write_field(f, path);
    EXPECT_EQ(read_field(path).content_hash(), f.content_hash());
    std::filesystem::remove(path);
    EXPECT_THROW(read_field(path), Error);
}

TEST(FieldIo, RejectsBadMagic) {
    auto bytes = encode_field(sample_field());
    bytes[3] = '2';
    EXPECT_THROW(decode_field(bytes), FormatError);
}

TEST(FieldIo, RejectsTruncation) {
    auto bytes = encode_field(sample_field());
    auto header_only = std::vector<unsigned char>(bytes.begin(), bytes.begin() + 10);
    EXPECT_THROW(decode_field(header_only), FormatError);
    bytes.resize(bytes.size() - 200);
    EXPECT_THROW(decode_field(bytes), FormatError);
}

TEST(FieldIo, RejectsComponentMismatch) {
    auto bytes = encode_field(sample_field());
    bytes[8] = 6;
    EXPECT_THROW(decode_field(bytes), FormatError);
}

TEST(FieldIo, RejectsNonFinitePayload) {
    auto bytes = encode_field(sample_field());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::memcpy(bytes.data() + kFieldHeaderSize, &nan, sizeof nan);
    EXPECT_THROW(decode_field(bytes), FormatError);
}

TEST(FieldIo, RejectsNonzeroReserved) {
    auto bytes = encode_field(sample_field());
    bytes[6] = 1;
    EXPECT_THROW(decode_field(bytes), FormatError);
}

}  // namespace
