#pragma once

// Little-endian framing shared by the table, index and catalog files.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "cbmr/error.hpp"

namespace cbmr::binio {

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const char*>(&value);
    buf_.append(p, sizeof(T));
  }
  void bytes(std::string_view s) { buf_.append(s); }
  void raw(const void* data, std::size_t n) { buf_.append(static_cast<const char*>(data), n); }
  void short_string(std::string_view s) {
    if (s.size() > 0xFFFF) throw Error(ErrorCode::InvalidQuery, "identifier longer than 65535 bytes");
    put<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
    bytes(s);
  }

  // Written to a sibling temp file, then renamed over the target.
  void commit(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
      out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
      if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : name_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + name_);
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void raw(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::string short_string() { return bytes(get<std::uint16_t>()); }
  void expect_magic(std::string_view magic) {
    if (bytes(magic.size()) != magic) throw Error(ErrorCode::CorruptFile, name_ + ": bad magic");
  }
  bool done() const { return pos_ == buf_.size(); }
  std::size_t remaining() const { return buf_.size() - pos_; }
  const std::string& name() const { return name_; }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw Error(ErrorCode::CorruptFile, name_ + ": truncated");
  }
  std::string name_;
  std::string buf_;
  std::size_t pos_ = 0;
};

}  // namespace cbmr::binio
