#include "qsvm/util.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qsvm {

std::string to_string(const Bitstring& bits) {
  std::string out;
  out.reserve(bits.size());
  for (auto b : bits) out.push_back(b ? '1' : '0');
  return out;
}

Bitstring bitstring_from_string(std::string_view text) {
  Bitstring bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument("bitstring may only contain '0' and '1': " + std::string(text));
    }
    bits.push_back(c == '1' ? 1 : 0);
  }
  return bits;
}

std::uint64_t to_index(const Bitstring& bits) {
  if (bits.size() > 63) throw std::invalid_argument("bitstring too long for an index");
  std::uint64_t index = 0;
  for (auto b : bits) index = (index << 1) | (b ? 1u : 0u);
  return index;
}

Bitstring bitstring_from_index(std::uint64_t index, std::size_t length) {
  Bitstring bits(length, 0);
  for (std::size_t i = 0; i < length; ++i) {
    bits[length - 1 - i] = static_cast<std::uint8_t>((index >> i) & 1u);
  }
  return bits;
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
  std::uint64_t z = parent + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qsvm
