#include <csignal>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semtex/api/server.hpp"
#include "semtex/api/service.hpp"
#include "semtex/core/dataset.hpp"
#include "semtex/core/error.hpp"
#include "semtex/features/gabor.hpp"
#include "semtex/ldl/maxent.hpp"
#include "semtex/manifold/isomap.hpp"
#include "semtex/procgen/registry.hpp"
#include "semtex/semspace/pipeline.hpp"
#include "semtex/semspace/space.hpp"

namespace fs = std::filesystem;
using namespace semtex;

namespace {

// One machine-parsable summary line per command.
class Summary {
 public:
  template <typename T>
  Summary& add(const std::string& key, const T& value) {
    std::ostringstream ss;
    ss.precision(10);
    ss << value;
    parts_.push_back(key + "=" + ss.str());
    return *this;
  }
  void print() const {
    for (std::size_t i = 0; i < parts_.size(); ++i) std::cout << (i ? " " : "") << parts_[i];
    std::cout << std::endl;
  }

 private:
  std::vector<std::string> parts_;
};

struct Flags {
  fs::path dataset;
  fs::path model;
  fs::path space;
  fs::path out;
  fs::path query;
  fs::path pred;
  fs::path config;
  fs::path images;
  double c = ldl::kDefaultC;
  double epsilon = kDefaultEpsilon;
  int knn = manifold::kDefaultKnn;
  int dmax = manifold::kDefaultDMax;
  int size = 0;
  std::vector<std::uint64_t> seeds;
  int n_per_param = 2;
  std::vector<std::string> models;
  int max_iter = 2000;
  int top_k = 5;
  int port = 8080;
  std::string host = "127.0.0.1";
  bool reuse_seed = false;
  bool predict_all = false;
  bool no_features = false;
};

procgen::ModelRegistry registry_for(const Flags& f) {
  return f.config.empty() ? procgen::ModelRegistry::builtin() : procgen::ModelRegistry::from_file(f.config);
}

std::vector<TextureSample> load_with_features(const fs::path& dir, const features::GaborBank& bank) {
  auto samples = load_dataset(dir);
  semspace::compute_features(samples, dir, bank);
  return samples;
}

int cmd_build_dataset(const Flags& f) {
  const auto registry = registry_for(f);
  semspace::DatasetSpec spec;
  spec.n_per_param = f.n_per_param;
  if (!f.seeds.empty()) spec.seeds = f.seeds;
  if (f.size > 0) spec.size = f.size;
  spec.models = f.models;
  const auto bank = features::GaborBank::build();
  const bool with_features = !f.no_features && spec.size >= bank.kernel_size();
  const auto samples = semspace::build_dataset(registry, spec, f.out, with_features ? &bank : nullptr);
  Summary()
      .add("samples", samples.size())
      .add("models", spec.models.empty() ? registry.models().size() : spec.models.size())
      .add("size", spec.size)
      .add("features", with_features ? bank.feature_dim() : 0)
      .add("out", f.out.string())
      .print();
  return 0;
}

int cmd_train(const Flags& f) {
  const auto bank = features::GaborBank::build();
  const auto samples = load_with_features(f.dataset, bank);
  const auto ts = semspace::training_set(samples, f.epsilon);
  ldl::TrainOptions opts;
  opts.C = f.c;
  opts.max_iter = f.max_iter;
  const auto report = ldl::train(ts, opts);
  ldl::save_model(report.model, f.out);
  Summary()
      .add("samples", ts.size())
      .add("features", ts.features.cols())
      .add("C", opts.C)
      .add("iterations", report.optim.iterations)
      .add("converged", report.optim.converged ? 1 : 0)
      .add("initial_kl", report.initial_mean_kl)
      .add("final_kl", report.final_mean_kl)
      .add("out", f.out.string())
      .print();
  if (!report.optim.converged) std::cerr << "warning: optimizer stopped early: " << report.optim.message << "\n";
  return 0;
}

int cmd_build_space(const Flags& f) {
  std::vector<TextureSample> samples;
  std::optional<ldl::MaxEntModel> predictor;
  semspace::BuildOptions opts;
  opts.isomap.k = f.knn;
  opts.isomap.d_max = f.dmax;
  if (!f.model.empty()) {
    predictor = ldl::load_model(f.model);
    samples = load_with_features(f.dataset, features::GaborBank::build());
    opts.predictor = &*predictor;
    opts.predict_all = f.predict_all;
  } else {
    if (f.predict_all) throw InvalidInput("--predict-all needs --model");
    samples = load_dataset(f.dataset);
  }
  const auto space = semspace::build_space(samples, opts);
  semspace::save_space(space, f.out);
  Summary s;
  s.add("samples", space.size()).add("d", space.dimension()).add("k", space.embedding.knn_k);
  std::ostringstream res;
  res.precision(6);
  for (std::size_t i = 0; i < space.embedding.residuals.size(); ++i)
    res << (i ? "," : "") << space.embedding.residuals[i];
  s.add("residuals", res.str()).add("out", f.out.string()).print();
  return 0;
}

int cmd_query(const Flags& f) {
  const auto space = semspace::load_space(f.space);
  const auto query = semspace::load_query(f.query);
  const auto point = semspace::embed_query(space, query);
  const auto nbs = semspace::top_k(space, point, static_cast<std::size_t>(f.top_k));
  for (const auto& nb : nbs) {
    const auto& tag = space.samples[nb.index].tag;
    std::cerr << "neighbor id=" << nb.id << " distance=" << nb.distance << " model=" << tag.model_id << "\n";
  }
  const auto& best = space.samples[nbs.front().index];
  Summary()
      .add("neighbor_id", best.id)
      .add("distance", nbs.front().distance)
      .add("model_id", best.tag.model_id)
      .add("neighbors", nbs.size())
      .print();
  return 0;
}

int cmd_generate(const Flags& f) {
  const auto space = semspace::load_space(f.space);
  const auto query = semspace::load_query(f.query);
  std::optional<ldl::MaxEntModel> predictor;
  if (!f.model.empty()) predictor = ldl::load_model(f.model);

  semspace::GenerateOptions opts;
  opts.size = f.size > 0 ? f.size : 128;
  if (f.reuse_seed && !f.seeds.empty()) throw InvalidInput("--seed and --reuse-seed are mutually exclusive");
  if (f.seeds.size() > 1) throw InvalidInput("generate takes a single --seed");
  if (f.reuse_seed) opts.seed_mode = semspace::SeedMode::Reuse;
  if (!f.seeds.empty()) {
    opts.seed_mode = semspace::SeedMode::Explicit;
    opts.seed = f.seeds.front();
  }
  const auto result = semspace::generate_from_description(space, query, opts);
  std::optional<double> mse;
  if (predictor) mse = semspace::closed_loop_mse(query, result, *predictor, features::GaborBank::build());

  const bool existed = fs::exists(f.out);
  try {
    semspace::write_result_bundle(f.out, result, query, mse);
  } catch (...) {
    std::error_code ec;
    if (!existed) fs::remove_all(f.out, ec);
    throw;
  }
  Summary s;
  s.add("neighbor_id", result.neighbor_id)
      .add("distance", result.neighbor_distance)
      .add("model_id", result.tag.model_id)
      .add("seed", result.tag.seed)
      .add("size", opts.size);
  if (mse) s.add("closed_loop_mse", *mse);
  s.add("out", f.out.string()).print();
  return 0;
}

int cmd_evaluate(const Flags& f) {
  const auto bank = features::GaborBank::build();
  const auto truth_samples = f.model.empty() ? load_dataset(f.dataset) : load_with_features(f.dataset, bank);
  std::vector<Distribution> truth;
  std::vector<Distribution> pred;
  std::string label;
  if (!f.model.empty()) {
    if (!f.pred.empty()) throw InvalidInput("use either --model or --pred, not both");
    const auto model = ldl::load_model(f.model);
    for (const auto& s : truth_samples) {
      truth.push_back(to_distribution(s.semantics, f.epsilon));
      pred.push_back(ldl::predict(model, *s.features));
    }
    label = "gabor";
  } else if (!f.pred.empty()) {
    const auto pred_samples = load_dataset(f.pred);
    std::map<std::int64_t, const TextureSample*> by_id;
    for (const auto& s : pred_samples) by_id[s.id] = &s;
    for (const auto& s : truth_samples) {
      const auto it = by_id.find(s.id);
      if (it == by_id.end()) throw InvalidInput("sample " + std::to_string(s.id) + " missing from --pred");
      truth.push_back(to_distribution(s.semantics, f.epsilon));
      pred.push_back(to_distribution(it->second->semantics, f.epsilon));
    }
    if (by_id.size() != truth_samples.size()) throw InvalidInput("--pred has samples not in --dataset");
    label = "pred";
  } else {
    throw InvalidInput("evaluate needs --model or --pred");
  }
  const auto table = ldl::evaluate(pred, truth);
  if (!f.out.empty()) ldl::write_evaluation_csv(f.out, label, table);
  Summary()
      .add("samples", table.samples)
      .add("kl", table.kl)
      .add("euclidean", table.euclidean)
      .add("sorensen", table.sorensen)
      .add("chi2", table.chi2)
      .print();
  return 0;
}

api::Server* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const Flags& f) {
  auto space = semspace::load_space(f.space);
  auto model = ldl::load_model(f.model);
  std::optional<fs::path> images;
  if (!f.images.empty()) images = f.images;
  api::Service service(std::move(space), std::move(model), features::GaborBank::build(), images);
  api::Server server(service);
  const int port = server.bind(f.host, f.port);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  Summary().add("listening", 1).add("host", f.host).add("port", port).print();
  server.listen();
  g_server = nullptr;
  std::cerr << "server stopped\n";
  return 0;
}

void check_positive(int v, const char* name) {
  if (v < 1) throw InvalidInput(std::string(name) + " must be >= 1");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic texture pipeline: datasets, label distribution learning, semantic space, generation"};
  app.require_subcommand(1);
  Flags f;

  auto* build = app.add_subcommand("build-dataset", "Render a parameter grid with oracle semantics");
  build->add_option("--out", f.out, "Output dataset directory")->required();
  build->add_option("--n-per-param", f.n_per_param, "Grid points per parameter");
  build->add_option("--seed", f.seeds, "Seed (repeatable)");
  build->add_option("--size", f.size, "Image size in pixels (default 64)");
  build->add_option("--models", f.models, "Model ids (default: all)")->delimiter(',');
  build->add_option("--config", f.config, "Model registry JSON (default: built in)");
  build->add_flag("--no-features", f.no_features, "Skip Gabor features in the manifest");

  auto* train = app.add_subcommand("train", "Train the maximum-entropy predictor");
  train->add_option("--dataset", f.dataset, "Dataset directory")->required();
  train->add_option("--out", f.out, "Model file to write")->required();
  train->add_option("--c", f.c, "Penalty coefficient C");
  train->add_option("--epsilon", f.epsilon, "Target floor");
  train->add_option("--max-iter", f.max_iter, "BFGS iteration cap");

  auto* space = app.add_subcommand("build-space", "Embed sample descriptions with Isomap");
  space->add_option("--dataset", f.dataset, "Dataset directory")->required();
  space->add_option("--out", f.out, "Space directory to write")->required();
  space->add_option("--knn", f.knn, "Neighborhood size k");
  space->add_option("--dmax", f.dmax, "Largest dimension on the residual curve");
  space->add_option("--model", f.model, "Predictor for samples without semantics");
  space->add_flag("--predict-all", f.predict_all, "Describe every sample with the predictor");

  auto* query = app.add_subcommand("query", "Nearest samples for a description");
  query->add_option("--space", f.space, "Space directory")->required();
  query->add_option("--query", f.query, "query.json")->required();
  query->add_option("--top-k", f.top_k, "Neighbors to list");

  auto* gen = app.add_subcommand("generate", "Render a texture for a description");
  gen->add_option("--space", f.space, "Space directory")->required();
  gen->add_option("--query", f.query, "query.json")->required();
  gen->add_option("--out", f.out, "Result directory (texture.png, provenance.json)")->required();
  gen->add_option("--size", f.size, "Image size in pixels (default 128)");
  gen->add_option("--seed", f.seeds, "Explicit seed");
  gen->add_flag("--reuse-seed", f.reuse_seed, "Use the neighbor's own seed");
  gen->add_option("--model", f.model, "Predictor for the closed-loop error");

  auto* eval = app.add_subcommand("evaluate", "Compare predicted and true distributions");
  eval->add_option("--dataset", f.dataset, "Dataset with true semantics")->required();
  eval->add_option("--model", f.model, "Predict from Gabor features with this model");
  eval->add_option("--pred", f.pred, "Dataset directory holding predicted semantics");
  eval->add_option("--out", f.out, "Metrics CSV to write");
  eval->add_option("--epsilon", f.epsilon, "Distribution floor");

  auto* serve = app.add_subcommand("serve", "HTTP API for the web UI");
  serve->add_option("--space", f.space, "Space directory")->required();
  serve->add_option("--model", f.model, "Predictor model file")->required();
  serve->add_option("--port", f.port, "Port (0 picks a free one)");
  serve->add_option("--host", f.host, "Bind address");
  serve->add_option("--images", f.images, "Directory for generated images (default: memory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    check_positive(f.knn, "--knn");
    check_positive(f.dmax, "--dmax");
    check_positive(f.n_per_param, "--n-per-param");
    check_positive(f.top_k, "--top-k");
    check_positive(f.max_iter, "--max-iter");
    if (!(f.c > 0.0)) throw InvalidInput("--c must be positive");
    if (!(f.epsilon >= 0.0 && f.epsilon < 1.0)) throw InvalidInput("--epsilon must be in [0, 1)");
    if (f.port < 0 || f.port > 65535) throw InvalidInput("--port must be in [0, 65535]");
    if (f.size < 0) throw InvalidInput("--size must be positive");

    if (*build) return cmd_build_dataset(f);
    if (*train) return cmd_train(f);
    if (*space) return cmd_build_space(f);
    if (*query) return cmd_query(f);
    if (*gen) return cmd_generate(f);
    if (*eval) return cmd_evaluate(f);
    if (*serve) return cmd_serve(f);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
