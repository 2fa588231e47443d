#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace semtex {

inline constexpr std::size_t kNumAttributes = 43;

/// The semantic attribute vocabulary. Index order is fixed and is the column
/// order of every semantic vector, distribution and theta row in the repo.
inline constexpr std::array<std::string_view, kNumAttributes> kAttributeNames = {
    "irregular",  "grid",        "granular",   "complex",     "uniform",
    "spiralled",  "marbled",     "mottled",    "fuzzy",       "crinkled",
    "well-ordered", "speckled",  "polka-dotted", "repetitive", "ridged",
    "uneven",     "smooth",      "cellular",   "globular",    "porous",
    "regular",    "veined",      "cyclical",   "freckled",    "simple",
    "dense",      "stained",     "honeycombed", "coarse",     "rough",
    "gouged",     "rocky",       "woven",      "lined",       "fine",
    "nonuniform", "disordered",  "fibrous",    "random",      "lacelike",
    "messy",      "scaly",       "netlike"};

std::optional<std::size_t> attribute_index(std::string_view name);

/// Like attribute_index but throws InvalidInput naming the unknown key.
std::size_t require_attribute(std::string_view name);

/// FNV-1a over the newline-joined vocabulary; stamped into model and
/// embedding artifacts so mismatched vocabularies are rejected on load.
std::uint64_t vocabulary_hash();
std::string vocabulary_hash_hex();

}  // namespace semtex
