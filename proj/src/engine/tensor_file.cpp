// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "engine/tensor_file.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace segan::engine {

namespace {

constexpr char kMagic[4] = {'S', 'G', 'N', '1'};

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  Reader(const std::vector<unsigned char>& bytes, std::string origin)
      : bytes_(bytes), origin_(std::move(origin)) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(U);
    return static_cast<U>(v);
  }

  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      fail(ErrorCode::kCorruptCheckpoint, origin_ + ": truncated at byte " + std::to_string(pos_));
    }
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<unsigned char>& bytes_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_tensor_file(const std::filesystem::path& path,
                       const std::vector<NamedTensor>& tensors) {
  std::string out(kMagic, 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    if (name.size() > 0xFFFF) fail(ErrorCode::kInvalidArgument, "tensor name too long");
    if (t.rank() > 0xFF) fail(ErrorCode::kInvalidArgument, "tensor rank too large: " + name);
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.shape()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (float v : t.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) fail(ErrorCode::kIo, "write failed: " + path.string());
}

std::vector<NamedTensor> read_tensor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kNotFound, "cannot open checkpoint " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  Reader r(bytes, path.string());
  if (r.get_string(4) != std::string(kMagic, 4)) {
    fail(ErrorCode::kCorruptCheckpoint, path.string() + ": bad magic");
  }
  const auto count = r.get<std::uint32_t>();
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor nt;
    nt.name = r.get_string(r.get<std::uint16_t>());
    const auto rank = r.get<std::uint8_t>();
    Shape shape(rank);
    for (auto& d : shape) d = r.get<std::uint32_t>();
    const std::size_t n = element_count(shape);
    r.need(n * 4);
    std::vector<float> data(n);
    for (float& v : data) v = std::bit_cast<float>(r.get<std::uint32_t>());
    nt.tensor = Tensor<float>(std::move(shape), std::move(data));
    out.push_back(std::move(nt));
  }
  if (!r.done()) fail(ErrorCode::kCorruptCheckpoint, path.string() + ": trailing bytes");
  return out;
}

}  // namespace segan::engine
