#pragma once

#include <string>
#include <vector>

#include "semtex/features/gabor.hpp"
#include "semtex/semspace/pipeline.hpp"
#include "temp_dir.hpp"

namespace semtex::testing {

// A rendered dataset in a scratch directory, features attached.
struct Fixture {
  TempDir dir;
  features::GaborBank bank = features::GaborBank::build();
  std::vector<TextureSample> samples;

  explicit Fixture(const semspace::DatasetSpec& spec, const std::string& tag = "fixture") : dir(tag) {
    samples = semspace::build_dataset(procgen::ModelRegistry::builtin(), spec, dir.path(), &bank);
  }
};

// Six visually distinct models, three grid points per parameter.
inline semspace::DatasetSpec small_spec() {
  semspace::DatasetSpec spec;
  spec.n_per_param = 3;
  spec.size = 48;
  spec.models = {"checkerboard", "stripes", "crosshatch", "brick", "perlin_fbm", "spiral"};
  return spec;
}

// 20 models x 6^2 grid x one seed = 720 samples.
inline semspace::DatasetSpec desk_spec() {
  semspace::DatasetSpec spec;
  spec.n_per_param = 6;
  spec.seeds = {1};
  spec.size = 64;
  return spec;
}

}  // namespace semtex::testing
