#include "retexkit/tensor_file.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "retexkit/error.hpp"

namespace retexkit {

namespace {

constexpr std::array<char, 4> kMagic{'R', 'T', 'K', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor4& t) {
  if (t.data.size() != t.element_count()) throw ShapeError("tensor payload does not match its dimensions");
  out.write(kMagic.data(), 4);
  put_u32(out, t.num_frames);
  put_u32(out, t.height);
  put_u32(out, t.width);
  put_u32(out, t.channels);
  std::vector<unsigned char> bytes(t.data.size() * 4);
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(t.data[i]);
    for (int k = 0; k < 4; ++k) bytes[i * 4 + static_cast<std::size_t>(k)] = static_cast<unsigned char>(bits >> (8 * k));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing tensor payload");
}

void write_tensor(const std::filesystem::path& path, const Tensor4& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write tensor file " + path.string());
  write_tensor(out, t);
}

Tensor4 read_tensor(std::istream& in) {
  unsigned char header[20];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(header))) throw IoError("corrupt tensor file: truncated header");
  if (std::memcmp(header, kMagic.data(), 4) != 0) throw IoError("corrupt tensor file: bad magic");
  Tensor4 t;
  t.num_frames = get_u32(header + 4);
  t.height = get_u32(header + 8);
  t.width = get_u32(header + 12);
  t.channels = get_u32(header + 16);
  const std::size_t count = t.element_count();
  std::vector<unsigned char> bytes(count * 4);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw IoError("corrupt tensor file: payload shorter than header dimensions");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError("corrupt tensor file: payload longer than header dimensions");
  }
  t.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    t.data[i] = std::bit_cast<float>(get_u32(bytes.data() + i * 4));
  }
  return t;
}

Tensor4 read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tensor file " + path.string());
  return read_tensor(in);
}

}  // namespace retexkit
