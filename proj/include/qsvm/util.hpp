#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qsvm {

/// A measured or candidate assignment of binary variables. Element i holds
/// the value of variable i; lexicographic order on the vector is the
/// tie-breaking order used throughout the library.
using Bitstring = std::vector<std::uint8_t>;

std::string to_string(const Bitstring& bits);
Bitstring bitstring_from_string(std::string_view text);

/// Basis-state index with variable 0 as the most significant bit, so index
/// order and lexicographic bitstring order coincide.
std::uint64_t to_index(const Bitstring& bits);
Bitstring bitstring_from_index(std::uint64_t index, std::size_t length);

/// Deterministic child seed for a (parent, stream) pair (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream);

/// Writes `content` to a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace qsvm
