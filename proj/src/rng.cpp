#include "twophase/rng.hpp"

namespace twophase {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, StreamTag tag, std::uint64_t index) noexcept {
  std::uint64_t h = mix64(master + 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ (static_cast<std::uint64_t>(tag) * 0xd6e8feb86659fd93ULL));
  h = mix64(h ^ (index + 0x632be59bd9b4e019ULL));
  return h;
}

}  // namespace twophase
