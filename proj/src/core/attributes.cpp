#include "semtex/core/attributes.hpp"

#include "semtex/core/error.hpp"
#include "semtex/core/hash.hpp"

namespace semtex {

std::optional<std::size_t> attribute_index(std::string_view name) {
  for (std::size_t j = 0; j < kAttributeNames.size(); ++j) {
    if (kAttributeNames[j] == name) return j;
  }
  return std::nullopt;
}

std::size_t require_attribute(std::string_view name) {
  if (auto j = attribute_index(name)) return *j;
  throw InvalidInput("unknown attribute '" + std::string(name) + "'");
}

std::uint64_t vocabulary_hash() {
  std::uint64_t h = kFnvOffset;
  for (auto name : kAttributeNames) {
    h = fnv1a64(name, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

std::string vocabulary_hash_hex() { return to_hex(vocabulary_hash()); }

}  // namespace semtex
