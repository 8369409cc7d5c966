#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "vorosense/spatial_index.hpp"

namespace vorosense {
namespace {

constexpr char kMagic[5] = {'V', 'O', 'R', 'X', '1'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  auto v = static_cast<std::make_unsigned_t<T>>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    v = static_cast<decltype(v)>(v >> 8);
  }
}

class Reader {
 public:
  explicit Reader(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  T get_le() {
    need(sizeof(T));
    std::make_unsigned_t<T> v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v = static_cast<decltype(v)>(v | (static_cast<decltype(v)>(bytes_[pos_ + i]) << (8 * i)));
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::vector<std::uint8_t> take(std::size_t n) {
    need(n);
    std::vector<std::uint8_t> out(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::SnapshotFormatError,
                  "snapshot truncated at byte " + std::to_string(pos_));
    }
  }

  std::vector<std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::array<std::uint8_t, 8> key_to_bytes(MortonKey key) {
  std::array<std::uint8_t, 8> out{};
  for (std::size_t i = 0; i < 8; ++i) {
    out[i] = static_cast<std::uint8_t>(key.value >> (8 * (7 - i)));
  }
  return out;
}

MortonKey key_from_bytes(std::span<const std::uint8_t, 8> bytes) {
  std::uint64_t v = 0;
  for (std::uint8_t b : bytes) v = (v << 8) | b;
  return {v};
}

void write_snapshot(const std::filesystem::path& path, const std::vector<Record>& records) {
  std::vector<std::uint8_t> bytes(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint64_t>(bytes, records.size());
  for (const Record& r : records) {
    if (r.payload.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error(ErrorCode::InvalidParams, "record payload exceeds 65535 bytes");
    }
    put_le<std::uint64_t>(bytes, r.key.value);
    put_le<std::uint32_t>(bytes, r.site_id);
    put_le<std::int64_t>(bytes, r.timestamp_us);
    put_le<std::uint16_t>(bytes, static_cast<std::uint16_t>(r.payload.size()));
    bytes.insert(bytes.end(), r.payload.begin(), r.payload.end());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::vector<Record> read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kMagic) || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw Error(ErrorCode::SnapshotFormatError, path.string() + " is not a VORX1 snapshot");
  }
  Reader reader(std::vector<std::uint8_t>(bytes.begin() + sizeof(kMagic), bytes.end()));
  const auto count = reader.get_le<std::uint64_t>();
  std::vector<Record> records;
  for (std::uint64_t i = 0; i < count; ++i) {
    Record r;
    r.key = {reader.get_le<std::uint64_t>()};
    r.site_id = reader.get_le<std::uint32_t>();
    r.timestamp_us = reader.get_le<std::int64_t>();
    r.payload = reader.take(reader.get_le<std::uint16_t>());
    records.push_back(std::move(r));
  }
  if (!reader.at_end()) {
    throw Error(ErrorCode::SnapshotFormatError, "trailing bytes after " + std::to_string(count) + " records");
  }
  return records;
}

}  // namespace vorosense
