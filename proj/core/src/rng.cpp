#include "dispatch/rng.hpp"

namespace dispatch {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t StreamFactory::derive(std::string_view name,
                                    std::initializer_list<std::uint64_t> indices) const noexcept {
  // FNV-1a over the name, then fold in seed and indices through splitmix.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  std::uint64_t state = splitmix64(seed_ ^ splitmix64(h));
  for (std::uint64_t i : indices) state = splitmix64(state ^ splitmix64(i + 0x632BE59BD9B4E019ULL));
  return state;
}

}  // namespace dispatch
