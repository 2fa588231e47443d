#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace semtex {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset);
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t h = kFnvOffset);

std::string to_hex(std::uint64_t v);

// SplitMix64 finalizer. Used as the counter-based generator for all noise
// lattices and seed derivation ("splitmix64-v1").
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace semtex
