#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace engage {

inline constexpr std::uint32_t kFnv32Offset = 2166136261u;
inline constexpr std::uint32_t kFnv32Prime = 16777619u;
inline constexpr std::uint64_t kFnv64Offset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnv64Prime = 1099511628211ull;

// FNV-1a over raw bytes. The 32-bit variant is the subword bucket hash and is
// part of the embedding file contract; do not change it.
constexpr std::uint32_t fnv1a32(std::string_view bytes,
                                std::uint32_t h = kFnv32Offset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnv32Prime;
  }
  return h;
}

constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t h = kFnv64Offset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnv64Prime;
  }
  return h;
}

// Incremental 64-bit digest used for manifests, corpora and checkpoints.
class Digest {
 public:
  void update(std::string_view bytes) { state_ = fnv1a64(bytes, state_); }
  void update_field(std::string_view bytes) {
    update(bytes);
    update(std::string_view("\x1f", 1));
  }
  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = kFnv64Offset;
};

std::string to_hex(std::uint64_t v);
std::string digest_file(const std::filesystem::path& path);

}  // namespace engage
