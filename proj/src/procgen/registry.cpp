#include "semtex/procgen/registry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "renderers.hpp"
#include "semtex/core/error.hpp"

namespace semtex::procgen {

using nlohmann::json;

std::size_t ModelDescriptor::param_index(std::string_view name) const {
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (params[p].name == name) return p;
  }
  throw InvalidInput("model '" + model_id + "' has no parameter '" + std::string(name) + "'");
}

namespace {

ModelDescriptor parse_model(const json& m, double default_semantic) {
  ModelDescriptor d;
  d.model_id = m.at("id").get<std::string>();
  const auto* renderer = detail::find_renderer(d.model_id);
  if (!renderer) throw InvalidInput("model_id '" + d.model_id + "' has no renderer");

  for (const auto& p : m.at("params")) {
    ParamSpec spec{p.at("name").get<std::string>(), p.at("lo").get<double>(),
                   p.at("hi").get<double>()};
    if (!(spec.lo < spec.hi)) {
      throw InvalidInput("model '" + d.model_id + "' param '" + spec.name + "' needs lo < hi");
    }
    d.params.push_back(std::move(spec));
  }
  if (d.params.size() != renderer->param_names.size()) {
    throw InvalidInput("model '" + d.model_id + "' declares " + std::to_string(d.params.size()) +
                       " params, renderer expects " +
                       std::to_string(renderer->param_names.size()));
  }
  for (std::size_t p = 0; p < d.params.size(); ++p) {
    if (d.params[p].name != renderer->param_names[p]) {
      throw InvalidInput("model '" + d.model_id + "' param " + std::to_string(p) + " is '" +
                         d.params[p].name + "', renderer expects '" +
                         std::string(renderer->param_names[p]) + "'");
    }
  }

  SemanticVector::Values tmpl;
  tmpl.fill(default_semantic);
  for (const auto& [name, value] : m.at("template").items()) {
    tmpl[require_attribute(name)] = value.get<double>();
  }
  d.template_semantics = SemanticVector(tmpl);

  if (m.contains("modulators")) {
    for (const auto& mod : m.at("modulators")) {
      d.modulators.push_back({d.param_index(mod.at("param").get<std::string>()),
                              require_attribute(mod.at("attribute").get<std::string>()),
                              mod.at("weight").get<double>()});
    }
  }
  return d;
}

}  // namespace

ModelRegistry ModelRegistry::from_json(std::string_view text) {
  ModelRegistry reg;
  try {
    const json doc = json::parse(text);
    const double default_semantic = doc.value("default_semantic", 0.0);
    for (const auto& m : doc.at("models")) {
      auto d = parse_model(m, default_semantic);
      if (std::any_of(reg.models_.begin(), reg.models_.end(),
                      [&](const ModelDescriptor& e) { return e.model_id == d.model_id; })) {
        throw InvalidInput("duplicate model_id '" + d.model_id + "'");
      }
      reg.models_.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("model registry: ") + e.what());
  }
  return reg;
}

ModelRegistry ModelRegistry::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model registry " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

const ModelRegistry& ModelRegistry::builtin() {
  static const ModelRegistry reg = from_json(detail::kBuiltinModelsJson);
  return reg;
}

const ModelDescriptor& ModelRegistry::find(std::string_view model_id) const {
  for (const auto& m : models_) {
    if (m.model_id == model_id) return m;
  }
  throw InvalidInput("unknown model_id '" + std::string(model_id) + "'");
}

const ModelDescriptor& ModelRegistry::validate(const GenerationTag& tag) const {
  const auto& m = find(tag.model_id);
  if (tag.params.size() != m.arity()) {
    throw InvalidInput("model '" + m.model_id + "' expects " + std::to_string(m.arity()) +
                       " params, got " + std::to_string(tag.params.size()));
  }
  for (std::size_t p = 0; p < m.arity(); ++p) {
    const auto& spec = m.params[p];
    const double v = tag.params[p];
    if (!(v >= spec.lo && v <= spec.hi)) {
      std::ostringstream msg;
      msg << "param '" << spec.name << "' = " << v << " outside [" << spec.lo << ", " << spec.hi
          << "] for model '" << m.model_id << "'";
      throw InvalidInput(msg.str());
    }
  }
  return m;
}

std::vector<ModelDescriptor> list_models() { return ModelRegistry::builtin().models(); }

TextureImage generate(const GenerationTag& tag, int size, const ModelRegistry& registry) {
  registry.validate(tag);
  if (size <= 0) throw InvalidInput("size must be positive");
  const auto* renderer = detail::find_renderer(tag.model_id);
  const auto shader = renderer->make(tag.params, tag.seed, size);
  std::vector<double> px(static_cast<std::size_t>(size) * static_cast<std::size_t>(size));
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double v = shader(x + 0.5, y + 0.5);
      px[static_cast<std::size_t>(y) * size + x] = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    }
  }
  return TextureImage(size, size, std::move(px));
}

std::vector<GenerationTag> sample_parameter_grid(const ModelDescriptor& model, int n_per_param,
                                                 std::span<const std::uint64_t> seeds) {
  if (n_per_param < 1) throw InvalidInput("n_per_param must be >= 1");
  const std::size_t arity = model.arity();
  std::vector<std::vector<double>> axes(arity);
  for (std::size_t p = 0; p < arity; ++p) {
    const auto& spec = model.params[p];
    if (n_per_param == 1) {
      axes[p].push_back(0.5 * (spec.lo + spec.hi));
      continue;
    }
    for (int i = 0; i < n_per_param; ++i) {
      // Pin the last point to hi exactly so the grid never leaves the range.
      const double t = static_cast<double>(i) / (n_per_param - 1);
      axes[p].push_back(i == n_per_param - 1 ? spec.hi : spec.lo + t * (spec.hi - spec.lo));
    }
  }

  std::size_t combos = 1;
  for (std::size_t p = 0; p < arity; ++p) combos *= axes[p].size();

  std::vector<GenerationTag> tags;
  tags.reserve(combos * seeds.size());
  for (std::uint64_t seed : seeds) {
    for (std::size_t c = 0; c < combos; ++c) {
      GenerationTag tag{model.model_id, std::vector<double>(arity), seed};
      std::size_t rem = c;
      for (std::size_t p = arity; p-- > 0;) {
        tag.params[p] = axes[p][rem % axes[p].size()];
        rem /= axes[p].size();
      }
      tags.push_back(std::move(tag));
    }
  }
  return tags;
}

double normalize_param(const ParamSpec& spec, double value) {
  // Written so the range midpoint 0.5 * (lo + hi) maps to exactly 0.
  return (2.0 * value - (spec.lo + spec.hi)) / (2.0 * (spec.hi - spec.lo));
}

SemanticVector oracle_semantics(const ModelDescriptor& model, std::span<const double> params) {
  if (params.size() != model.arity()) {
    throw InvalidInput("model '" + model.model_id + "' expects " + std::to_string(model.arity()) +
                       " params");
  }
  auto values = model.template_semantics.values();
  for (const auto& mod : model.modulators) {
    values[mod.attribute] += mod.weight * normalize_param(model.params[mod.param], params[mod.param]);
  }
  for (double& v : values) v = std::clamp(v, 0.0, 1.0);
  return SemanticVector(values);
}

SemanticVector oracle_semantics(const GenerationTag& tag, const ModelRegistry& registry) {
  return oracle_semantics(registry.validate(tag), tag.params);
}

}  // namespace semtex::procgen
