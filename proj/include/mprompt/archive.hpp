#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mprompt {

// Minimal zip writer: entries are stored uncompressed with fixed timestamps,
// so equal inputs give equal archives.
class ZipWriter {
 public:
  void add(const std::string& name, const std::vector<std::uint8_t>& data);
  std::vector<std::uint8_t> finish() const;

 private:
  struct Entry {
    std::string name;
    std::uint32_t crc = 0;
    std::uint32_t size = 0;
    std::uint32_t offset = 0;
  };
  std::vector<Entry> entries_;
  std::vector<std::uint8_t> body_;
};

struct ZipEntry {
  std::string name;
  std::vector<std::uint8_t> data;
};

// Reads archives produced by ZipWriter (stored entries only).
std::vector<ZipEntry> read_stored_zip(const std::vector<std::uint8_t>& bytes);

}  // namespace mprompt
