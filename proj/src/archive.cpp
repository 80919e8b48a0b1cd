#include "mprompt/archive.hpp"

#include <zlib.h>

#include "mprompt/errors.hpp"

namespace mprompt {

namespace {

// 1980-01-01 00:00 in DOS date/time encoding.
constexpr std::uint16_t kDosTime = 0;
constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get(const std::vector<std::uint8_t>& b, std::size_t at, int width) {
  if (at + width > b.size()) throw ParseError("truncated zip archive", "zip", static_cast<long long>(at));
  std::uint32_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

}  // namespace

void ZipWriter::add(const std::string& name, const std::vector<std::uint8_t>& data) {
  Entry e;
  e.name = name;
  e.crc = static_cast<std::uint32_t>(crc32(0L, data.data(), static_cast<uInt>(data.size())));
  e.size = static_cast<std::uint32_t>(data.size());
  e.offset = static_cast<std::uint32_t>(body_.size());
  put32(body_, 0x04034b50);
  put16(body_, 20);
  put16(body_, 0);
  put16(body_, 0);  // stored
  put16(body_, kDosTime);
  put16(body_, kDosDate);
  put32(body_, e.crc);
  put32(body_, e.size);
  put32(body_, e.size);
  put16(body_, static_cast<std::uint16_t>(name.size()));
  put16(body_, 0);
  body_.insert(body_.end(), name.begin(), name.end());
  body_.insert(body_.end(), data.begin(), data.end());
  entries_.push_back(e);
}

std::vector<std::uint8_t> ZipWriter::finish() const {
  std::vector<std::uint8_t> out = body_;
  const auto dir_offset = static_cast<std::uint32_t>(out.size());
  for (const Entry& e : entries_) {
    put32(out, 0x02014b50);
    put16(out, 20);
    put16(out, 20);
    put16(out, 0);
    put16(out, 0);
    put16(out, kDosTime);
    put16(out, kDosDate);
    put32(out, e.crc);
    put32(out, e.size);
    put32(out, e.size);
    put16(out, static_cast<std::uint16_t>(e.name.size()));
    put16(out, 0);
    put16(out, 0);
    put16(out, 0);
    put16(out, 0);
    put32(out, 0);
    put32(out, e.offset);
    out.insert(out.end(), e.name.begin(), e.name.end());
  }
  const auto dir_size = static_cast<std::uint32_t>(out.size() - dir_offset);
  put32(out, 0x06054b50);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(entries_.size()));
  put16(out, static_cast<std::uint16_t>(entries_.size()));
  put32(out, dir_size);
  put32(out, dir_offset);
  put16(out, 0);
  return out;
}

std::vector<ZipEntry> read_stored_zip(const std::vector<std::uint8_t>& bytes) {
  std::vector<ZipEntry> entries;
  std::size_t at = 0;
  while (at + 4 <= bytes.size() && get(bytes, at, 4) == 0x04034b50) {
    if (at + 30 > bytes.size()) throw ParseError("truncated zip header", "zip", static_cast<long long>(at));
    if (get(bytes, at + 8, 2) != 0) throw ParseError("compressed zip entries are not supported", "zip", static_cast<long long>(at));
    const std::uint32_t crc = get(bytes, at + 14, 4);
    const std::uint32_t size = get(bytes, at + 18, 4);
    const std::uint32_t name_len = get(bytes, at + 26, 2);
    const std::uint32_t extra_len = get(bytes, at + 28, 2);
    const std::size_t data_at = at + 30 + name_len + extra_len;
    if (data_at + size > bytes.size()) throw ParseError("truncated zip entry", "zip", static_cast<long long>(at));
    ZipEntry e;
    e.name.assign(bytes.begin() + static_cast<long>(at + 30), bytes.begin() + static_cast<long>(at + 30 + name_len));
    e.data.assign(bytes.begin() + static_cast<long>(data_at), bytes.begin() + static_cast<long>(data_at + size));
    if (static_cast<std::uint32_t>(crc32(0L, e.data.data(), static_cast<uInt>(e.data.size()))) != crc)
      throw ParseError("zip entry checksum mismatch: " + e.name, "zip", static_cast<long long>(at));
    entries.push_back(std::move(e));
    at = data_at + size;
  }
  // Local entries must be followed by the central directory (or, for an
  // empty archive, the end record).
  const bool tail = at + 4 <= bytes.size() && (get(bytes, at, 4) == 0x02014b50 || get(bytes, at, 4) == 0x06054b50);
  if (!tail) throw ParseError("not a zip archive", "zip", static_cast<long long>(at));
  return entries;
}

}  // namespace mprompt
