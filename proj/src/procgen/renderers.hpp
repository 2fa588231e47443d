#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace semtex::procgen::detail {

/// Per-pixel intensity as a function of pixel-center coordinates (in
/// pixels). Values outside [0, 1] are clamped by the caller.
using Shader = std::function<double(double x, double y)>;

struct Renderer {
  std::string_view model_id;
  std::vector<std::string_view> param_names;
  Shader (*make)(std::span<const double> params, std::uint64_t seed, int size);
};

const std::vector<Renderer>& renderers();
const Renderer* find_renderer(std::string_view model_id);

extern const std::string_view kBuiltinModelsJson;

}  // namespace semtex::procgen::detail
