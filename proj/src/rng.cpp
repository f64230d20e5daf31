#include "mfg/rng.hpp"

namespace mfg {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t a,
                          std::uint64_t b) {
  std::uint64_t h = mix(0x2545f4914f6cdd1dULL, root);
  for (unsigned char c : stream) h = mix(h, c);
  h = mix(h, a);
  h = mix(h, b);
  return h;
}

}  // namespace mfg
