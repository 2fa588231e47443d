#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "semtex/core/attributes.hpp"
#include "semtex/core/error.hpp"
#include "semtex/core/image.hpp"
#include "semtex/procgen/registry.hpp"

using namespace semtex;
using namespace semtex::procgen;

namespace {
double mean_of(const TextureImage& img) {
  const auto& p = img.pixels();
  return std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
}
std::size_t attr(std::string_view name) { return *attribute_index(name); }
}  // namespace

TEST_CASE("registry contents") {
  const auto models = list_models();
  CHECK(models.size() >= 12);
  auto has = [&](std::string_view id) {
    return std::any_of(models.begin(), models.end(), [&](const auto& m) { return m.model_id == id; });
  };
  CHECK(has("checkerboard"));
  CHECK(has("perlin_fbm"));
  CHECK(has("worley_cellular"));

  const auto again = list_models();
  REQUIRE(again.size() == models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    CHECK(again[i].model_id == models[i].model_id);
    CHECK(again[i].template_semantics == models[i].template_semantics);
  }
  for (const auto& m : models) {
    CAPTURE(m.model_id);
    int high = 0;
    for (double v : m.template_semantics.values()) high += v > 0.5 ? 1 : 0;
    CHECK(high >= 5);
    for (const auto& p : m.params) CHECK(p.lo < p.hi);
  }
}

TEST_CASE("registry config errors name the field") {
  CHECK_THROWS_WITH_AS(ModelRegistry::builtin().find("plaid"), doctest::Contains("plaid"), InvalidInput);
  GenerationTag arity{"checkerboard", {16.0}, 1};
  CHECK_THROWS_WITH_AS(generate(arity, 32), doctest::Contains("expects"), InvalidInput);
  GenerationTag range{"checkerboard", {100.0, 0.5}, 1};
  CHECK_THROWS_WITH_AS(generate(range, 32), doctest::Contains("period"), InvalidInput);
  CHECK_THROWS_AS(ModelRegistry::from_json("{\"models\": 3}"), InvalidInput);
  CHECK_THROWS_AS(ModelRegistry::from_json(
                      R"({"version":1,"models":[{"id":"nosuch","params":[],"template":{},"modulators":[]}]})"),
                  InvalidInput);
}

TEST_CASE("checkerboard periodicity") {
  GenerationTag tag{"checkerboard", {16.0, 1.0}, 3};
  TextureImage img = generate(tag, 128);
  CHECK(img.width() == 128);
  CHECK(img.at(0, 0) != img.at(16, 0));
  CHECK(img.at(0, 0) == img.at(32, 0));
  CHECK(img.at(5, 7) == img.at(5, 39));
}

TEST_CASE("rendering is deterministic down to PNG bytes") {
  for (const auto& m : list_models()) {
    CAPTURE(m.model_id);
    std::vector<double> mid;
    for (const auto& p : m.params) mid.push_back(0.5 * (p.lo + p.hi));
    GenerationTag tag{m.model_id, mid, 99};
    CHECK(encode_png(generate(tag, 64)) == encode_png(generate(tag, 64)));
  }
}

TEST_CASE("perlin_fbm with 4 octaves and seed 7 has mid-gray mean") {
  const auto& m = ModelRegistry::builtin().find("perlin_fbm");
  const double scale = 0.5 * (m.params[0].lo + m.params[0].hi);
  TextureImage img = generate({"perlin_fbm", {scale, 4.0}, 7}, 128);
  const double mean = mean_of(img);
  CHECK(mean >= 0.35);
  CHECK(mean <= 0.65);
}

TEST_CASE("every model spans at least 0.2 of the intensity range across its grid") {
  const std::uint64_t seeds[] = {1, 2};
  for (const auto& m : list_models()) {
    for (const auto& tag : sample_parameter_grid(m, 3, seeds)) {
      TextureImage img = generate(tag, 128);
      const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
      CAPTURE(m.model_id);
      CAPTURE(tag.params[0]);
      CAPTURE(tag.params[1]);
      CHECK(*hi - *lo >= 0.2);
    }
  }
}

TEST_CASE("seed changes the noise instance but not the semantics") {
  GenerationTag a{"perlin_fbm", {24.0, 4.0}, 1};
  GenerationTag b{"perlin_fbm", {24.0, 4.0}, 2};
  CHECK_FALSE(generate(a, 64) == generate(b, 64));
  CHECK(oracle_semantics(a) == oracle_semantics(b));
}

TEST_CASE("parameter grid") {
  const auto& m = ModelRegistry::builtin().find("checkerboard");
  const std::uint64_t one[] = {5};
  auto tags = sample_parameter_grid(m, 3, one);
  CHECK(tags.size() == 9);
  CHECK(tags[0].params == std::vector<double>{8.0, 0.4});
  CHECK(tags[1].params[1] == doctest::Approx(0.7));
  CHECK(tags[8].params == std::vector<double>{32.0, 1.0});
  for (const auto& t : tags) {
    CHECK(t.seed == 5);
    for (std::size_t p = 0; p < t.params.size(); ++p) {
      CHECK(t.params[p] >= m.params[p].lo);
      CHECK(t.params[p] <= m.params[p].hi);
    }
  }
  auto mid = sample_parameter_grid(m, 1, one);
  REQUIRE(mid.size() == 1);
  CHECK(mid[0].params == std::vector<double>{20.0, 0.7});

  const std::uint64_t two[] = {1, 2};
  auto crossed = sample_parameter_grid(m, 2, two);
  CHECK(crossed.size() == 8);
  CHECK(crossed[0].seed == 1);
  CHECK(crossed[7].seed == 2);
  CHECK_THROWS_AS(sample_parameter_grid(m, 0, one), InvalidInput);
}

TEST_CASE("oracle semantics") {
  for (const auto& m : list_models()) {
    std::vector<double> mid;
    for (const auto& p : m.params) mid.push_back(0.5 * (p.lo + p.hi));
    CAPTURE(m.model_id);
    CHECK(oracle_semantics(m, mid) == m.template_semantics);
  }

  const auto& cb = ModelRegistry::builtin().find("checkerboard");
  CHECK(cb.template_semantics[attr("regular")] >= 0.8);
  CHECK(cb.template_semantics[attr("repetitive")] >= 0.8);
  CHECK(cb.template_semantics[attr("grid")] >= 0.8);
  CHECK(cb.template_semantics[attr("rough")] <= 0.1);

  // Independent recomputation of the clamp formula for "dense" at max density.
  const auto& wc = ModelRegistry::builtin().find("worley_cellular");
  double expected = wc.template_semantics[attr("dense")];
  for (const auto& mod : wc.modulators) {
    if (mod.attribute == attr("dense") && wc.params[mod.param].name == "density") expected += 0.5 * mod.weight;
  }
  expected = std::clamp(expected, 0.0, 1.0);
  const double jitter_mid = 0.5 * (wc.params[1].lo + wc.params[1].hi);
  SemanticVector got = oracle_semantics({"worley_cellular", {wc.params[0].hi, jitter_mid}, 0});
  CHECK(got[attr("dense")] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("oracle semantics is Lipschitz in normalized parameters") {
  for (const auto& m : list_models()) {
    double wmax = 0.0;
    for (const auto& mod : m.modulators) wmax = std::max(wmax, std::abs(mod.weight));
    const std::uint64_t seed[] = {0};
    auto tags = sample_parameter_grid(m, 4, seed);
    for (std::size_t a = 0; a < tags.size(); ++a) {
      for (std::size_t b = a + 1; b < tags.size(); ++b) {
        const auto sa = oracle_semantics(m, tags[a].params);
        const auto sb = oracle_semantics(m, tags[b].params);
        double dn = 0.0;
        for (std::size_t p = 0; p < m.arity(); ++p) {
          dn += std::abs(normalize_param(m.params[p], tags[a].params[p]) -
                         normalize_param(m.params[p], tags[b].params[p]));
        }
        for (std::size_t j = 0; j < kNumAttributes; ++j) {
          CHECK(std::abs(sa[j] - sb[j]) <= wmax * dn + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("normalize_param maps the range onto [-0.5, 0.5]") {
  ParamSpec p{"x", 2.0, 10.0};
  CHECK(normalize_param(p, 2.0) == -0.5);
  CHECK(normalize_param(p, 10.0) == 0.5);
  CHECK(normalize_param(p, 6.0) == 0.0);
}
