#include <gtest/gtest.h>

#include <cstring>

#include "mprompt/archive.hpp"
#include "mprompt/errors.hpp"

using namespace mprompt;

TEST(Zip, RoundTrip) {
  ZipWriter zip;
  const std::string meta = R"({"fps": 16})";
  zip.add("metadata.json", std::vector<std::uint8_t>(meta.begin(), meta.end()));
  std::vector<std::uint8_t> blob(5000);
  for (std::size_t i = 0; i < blob.size(); ++i) blob[i] = static_cast<std::uint8_t>(i * 31);
  zip.add("frame_00000.png", blob);
  zip.add("empty", {});
  const auto bytes = zip.finish();
  EXPECT_EQ(std::memcmp(bytes.data(), "PK\x03\x04", 4), 0);
  const auto entries = read_stored_zip(bytes);
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0].name, "metadata.json");
  EXPECT_EQ(std::string(entries[0].data.begin(), entries[0].data.end()), meta);
  EXPECT_EQ(entries[1].data, blob);
  EXPECT_TRUE(entries[2].data.empty());
}

TEST(Zip, CorruptionDetected) {
  ZipWriter zip;
  zip.add("a", {1, 2, 3, 4});
  auto bytes = zip.finish();
  bytes[30 + 1 + 2] ^= 0xff;  // payload byte after header + name
  EXPECT_THROW(read_stored_zip(bytes), ParseError);
  EXPECT_THROW(read_stored_zip(std::vector<std::uint8_t>{1, 2, 3}), ParseError);
}
