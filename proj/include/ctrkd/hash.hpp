#pragma once
// FNV-1a 64-bit. Used for file checksums, config hashes and parameter
// digests. Not cryptographic; stable across platforms.

#include <cstdint>
#include <cstring>
#include <string_view>

namespace ctrkd {

class Fnv1a64 {
 public:
  static constexpr uint64_t kOffset = 0xcbf29ce484222325ull;
  static constexpr uint64_t kPrime = 0x00000100000001b3ull;

  void update(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= kPrime;
    }
  }
  void update(std::string_view s) { update(s.data(), s.size()); }

  uint64_t digest() const { return hash_; }

 private:
  uint64_t hash_ = kOffset;
};

inline uint64_t fnv1a64(std::string_view s) {
  Fnv1a64 h;
  h.update(s);
  return h.digest();
}

inline uint64_t fnv1a64(const void* data, size_t n) {
  Fnv1a64 h;
  h.update(data, n);
  return h.digest();
}

}  // namespace ctrkd
