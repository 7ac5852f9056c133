// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "uhredit/curation/embedding.hpp"
#include "uhredit/curation/flow.hpp"
#include "uhredit/curation/pairs.hpp"
#include "uhredit/error.hpp"
#include "uhredit/numerics/attention.hpp"
#include "uhredit/numerics/dft.hpp"
#include "uhredit/numerics/flow_matching.hpp"
#include "uhredit/numerics/rope.hpp"
#include "uhredit/numerics/spectral_loss.hpp"
#include "uhredit/oracle/oracle.hpp"
#include "uhredit/pfid/pfid.hpp"
#include "uhredit/pipeline/config.hpp"
#include "uhredit/pipeline/manifest.hpp"
#include "uhredit/pipeline/pipeline.hpp"
#include "uhredit/quality/quality.hpp"

namespace fs = std::filesystem;
using namespace uhredit;

namespace {

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitEmpty = 3;

struct CurateArgs {
  std::string manifest;
  std::string config;
  std::string out;
  std::string report;
  int workers = -1;
  std::int64_t seed = -1;
  std::string stage;
};

pipeline::PipelineConfig effective_config(const CurateArgs& a) {
  pipeline::PipelineConfig cfg = a.config.empty() ? pipeline::PipelineConfig{} : pipeline::load_config(a.config);
  if (a.workers >= 0) cfg.workers = a.workers;
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
  cfg.validate();
  return cfg;
}

void write_report(const std::string& path, const nlohmann::ordered_json& report) {
  if (!path.empty()) pipeline::write_file_atomic(path, report.dump(2) + "\n");
}

int curate_run(const CurateArgs& a) {
  const auto cfg = effective_config(a);
  const auto providers = pipeline::make_providers(cfg);
  auto records = pipeline::load_manifest(a.manifest);
  const auto result = pipeline::run_pipeline(std::move(records), cfg, providers);
  pipeline::write_manifest(a.out, result.kept);
  write_report(a.report, result.report(cfg));
  for (const auto& s : result.stages) {
    std::fprintf(stderr, "%-12s in %6zu  kept %6zu  dropped %6zu  %.2fs\n", s.stage.c_str(), s.input, s.passed,
                 s.dropped, s.wall_seconds);
  }
  return result.kept.empty() ? kExitEmpty : 0;
}

int curate_stage(const CurateArgs& a) {
  auto cfg = effective_config(a);
  pipeline::Providers providers;
  if (a.stage == pipeline::kStageAdherence) providers = pipeline::make_providers(cfg);
  auto records = pipeline::load_manifest(a.manifest);
  const auto out = pipeline::run_stage(a.stage, std::move(records), cfg, providers);
  pipeline::write_manifest(a.out, out.kept);
  nlohmann::ordered_json report;
  report["config"] = pipeline::config_to_json(cfg);
  report["stage"] = pipeline::stage_report_json(out.report);
  report["drops"] = nlohmann::ordered_json::array();
  for (const auto& d : out.drops) {
    report["drops"].push_back({{"id", d.id}, {"stage", d.stage}, {"reason", d.reason}, {"detail", d.detail}});
  }
  write_report(a.report, report);
  return out.kept.empty() ? kExitEmpty : 0;
}

struct PairArgs {
  std::string frames;
  std::string config;
  std::string out;
  int workers = -1;
};

int curate_pairs(const PairArgs& a) {
  pipeline::PipelineConfig cfg = a.config.empty() ? pipeline::PipelineConfig{} : pipeline::load_config(a.config);
  if (a.workers >= 0) cfg.workers = a.workers;
  cfg.pairs.mining.thresholds.validate();
  const auto files = pfid::list_images(a.frames);
  if (files.empty()) throw ConfigError("no frames found in " + a.frames);
  curation::FrameSequence seq(files);
  const auto embeddings = curation::make_embedding_provider(cfg.pairs.embeddings);
  const auto motion = curation::make_motion_estimator(cfg.pairs.flow);

  auto options = cfg.pairs.mining;
  options.workers = cfg.workers;
  const auto& thresholds = cfg.quality.thresholds;
  const auto passes_quality = [&](const ImageTensor& img) {
    return quality::assess_quality(img, thresholds, cfg.quality.options).passed;
  };
  if (cfg.pairs.order == pipeline::PairFilterOrder::quality_first) options.frame_filter = passes_quality;

  const auto pairs = curation::mine_pairs(seq, *embeddings, *motion, options);
  std::string out;
  std::size_t kept = 0;
  for (const auto& p : pairs) {
    auto verdict = p.score.verdict;
    bool quality_ok = true;
    if (verdict == curation::PairVerdict::keep && cfg.pairs.order == pipeline::PairFilterOrder::pairs_first) {
      quality_ok = passes_quality(seq.frame(p.first)) && passes_quality(seq.frame(p.second));
    }
    nlohmann::ordered_json j;
    j["first"] = files[p.first].string();
    j["second"] = files[p.second].string();
    j["clip"] = p.clip;
    j["semantic_similarity"] = p.score.semantic_similarity;
    j["motion_score"] = p.score.motion_score;
    j["verdict"] = quality_ok ? curation::to_string(verdict) : "drop_quality";
    if (p.score.error) j["error"] = *p.score.error;
    kept += verdict == curation::PairVerdict::keep && quality_ok ? 1 : 0;
    out += j.dump() + "\n";
  }
  pipeline::write_file_atomic(a.out, out);
  std::fprintf(stderr, "%zu candidate pairs, %zu kept\n", pairs.size(), kept);
  return kept == 0 ? kExitEmpty : 0;
}

struct PfidArgs {
  std::string real;
  std::string gen;
  int patch = 512;
  int stride = 512;
  int max_patches = 64;
  std::string sampling = "raster";
  std::string features = "builtin";
  std::uint64_t seed = 0;
  std::string out;
};

std::vector<ImageTensor> load_all(const std::string& dir) {
  std::vector<ImageTensor> images;
  for (const auto& f : pfid::list_images(dir)) images.push_back(read_image(f));
  if (images.empty()) throw ConfigError("no images found in " + dir);
  return images;
}

int run_pfid(const PfidArgs& a) {
  pfid::PatchConfig cfg;
  cfg.patch_size = a.patch;
  cfg.stride = a.stride;
  cfg.max_patches_per_image = a.max_patches;
  cfg.seed = a.seed;
  if (a.sampling == "random") cfg.sampling = pfid::Sampling::random;
  else if (a.sampling != "raster") throw ConfigError("--sampling must be raster or random");
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (a.features != "builtin" && !fs::is_directory(a.features)) {
    throw ConfigError("--features must be \"builtin\" or a directory");
  }
  const auto provider = curation::make_embedding_provider(a.features);
  const auto result = pfid::pfid(load_all(a.real), load_all(a.gen), *provider, cfg);

  nlohmann::ordered_json report;
  report["score"] = result.score;
  report["real_patches"] = result.real_patches;
  report["generated_patches"] = result.generated_patches;
  report["dimension"] = result.dimension;
  report["provider"] = result.provider;
  report["config"] = {{"real", a.real},           {"gen", a.gen},       {"patch_size", cfg.patch_size},
                      {"stride", cfg.stride},     {"max_patches_per_image", cfg.max_patches_per_image},
                      {"sampling", a.sampling},   {"seed", cfg.seed}};
  if (a.out.empty()) std::cout << report.dump(2) << "\n";
  else pipeline::write_file_atomic(a.out, report.dump(2) + "\n");
  return 0;
}

// --- numerics selftest ---

struct SelfTest {
  int failures = 0;
  void check(const char* name, bool ok, double measure) {
    std::printf("[%s] %-44s %.3g\n", ok ? "PASS" : "FAIL", name, measure);
    failures += ok ? 0 : 1;
  }
};

numerics::Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng) {
  numerics::Tensor t(std::move(shape));
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (double& v : t.data()) v = d(rng);
  return t;
}

int numerics_selftest(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SelfTest st;

  double dft_err = 0.0, parseval = 0.0;
  for (std::size_t h = 1; h <= 12; ++h) {
    for (std::size_t w = 1; w <= 12; ++w) {
      const auto x = random_tensor({h, w}, rng);
      const auto got = numerics::dft2_ortho(x.data(), h, w);
      const auto ref = oracle::dft2_bruteforce(x.data(), h, w);
      double e_in = 0.0, e_out = 0.0;
      for (std::size_t i = 0; i < h * w; ++i) {
        dft_err = std::max(dft_err, std::abs(got[i] - ref[i]));
        e_in += x[i] * x[i];
        e_out += std::norm(got[i]);
      }
      parseval = std::max(parseval, std::abs(e_in - e_out));
    }
  }
  st.check("dft matches brute force (<= 12x12)", dft_err <= 1e-9, dft_err);
  st.check("parseval", parseval <= 1e-9, parseval);

  for (auto policy : {numerics::WeightGradient::stop_gradient, numerics::WeightGradient::full}) {
    numerics::SpectralLossConfig cfg;
    cfg.weight_gradient = policy;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const auto pred = random_tensor({8, 8}, rng), target = random_tensor({8, 8}, rng);
      const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const auto fl = numerics::frequency_loss(pred, target, t, cfg);
      const auto f = [&](std::span<const double> x) {
        const numerics::Tensor p(pred.shape(), std::vector<double>(x.begin(), x.end()));
        return policy == numerics::WeightGradient::full ? numerics::frequency_loss(p, target, t, cfg).value
                                                        : numerics::weighted_spectral_loss(p, target, fl.weights);
      };
      worst = std::max(worst, oracle::relative_error(fl.gradient.data(), oracle::central_difference(f, pred.data(), 1e-6)));
    }
    st.check(policy == numerics::WeightGradient::full ? "gradient check (full)" : "gradient check (stop-gradient)",
             worst <= 1e-5, worst);
  }

  numerics::SpectralLossConfig cfg;
  bool monotone = true;
  for (int i = 1; i <= 1000; ++i) monotone = monotone && numerics::focus_intensity(i / 1000.0, cfg) <= numerics::focus_intensity((i - 1) / 1000.0, cfg);
  st.check("schedule endpoints and monotonicity",
           monotone && numerics::focus_intensity(0.0, cfg) == cfg.alpha_max && numerics::focus_intensity(1.0, cfg) == cfg.alpha_min,
           numerics::focus_intensity(0.5, cfg));

  numerics::Tensor df({6, 6});
  for (double& v : df.data()) v = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
  const auto w = numerics::frequency_weights(df, 0.7, cfg.eps_w);
  double wmax = 0.0, wmin = 1.0;
  for (double v : w.data()) {
    wmax = std::max(wmax, v);
    wmin = std::min(wmin, v);
  }
  st.check("weights in (0, 1] with max exactly 1", wmax == 1.0 && wmin > 0.0, wmin);

  const double b2 = numerics::rescale_rope_base(10000.0, 16.0, 1.0);
  numerics::RopeConfig rc;
  numerics::RopeConfig rc2 = rc;
  rc2.base = b2;
  const auto th = numerics::rope_frequencies(rc), th2 = numerics::rope_frequencies(rc2);
  double angle = 0.0;
  bool shrink = true;
  for (std::size_t i = 0; i < th.size(); ++i) shrink = shrink && th2[i] <= th[i];
  for (int p = 0; p <= 4096; ++p) angle = std::max(angle, std::abs(th2.back() * 4.0 * p - th.back() * p));
  st.check("rope rescaling compresses angles", b2 == 40000.0 && shrink && angle <= 1e-12, angle);

  numerics::Matrix q(32, 16), k(32, 16), v(32, 16);
  std::normal_distribution<double> nd;
  for (auto* m : {&q, &k, &v})
    for (double& x : m->data) x = nd(rng);
  const auto a1 = numerics::scaled_attention(q, k, v, 1.0);
  const auto a2 = numerics::scaled_attention(q, k, v, numerics::attention_temperature(16, 1));
  const auto h1 = numerics::attention_entropy(a1.weights), h2 = numerics::attention_entropy(a2.weights);
  bool lower = true, stochastic = true;
  for (std::size_t r = 0; r < h1.size(); ++r) {
    lower = lower && h2[r] < h1[r];
    double s = 0.0;
    for (double x : a2.weights.row(r)) s += x;
    stochastic = stochastic && std::abs(s - 1.0) <= 1e-9;
  }
  st.check("temperature lowers entropy, rows stochastic", lower && stochastic, h1[0] - h2[0]);

  const auto y = random_tensor({3, 4, 4}, rng), eps = random_tensor({3, 4, 4}, rng);
  numerics::Tensor nu(y.shape());
  for (std::size_t i = 0; i < nu.size(); ++i) nu[i] = eps[i] - y[i];
  const double total = numerics::total_loss(nu, eps, y, 0.3, cfg).value;
  st.check("flow matching: exact velocity gives zero loss",
           total <= 1e-15 && numerics::flow_interpolate(y, eps, 0.0) == y && numerics::flow_interpolate(y, eps, 1.0) == eps,
           total);

  std::printf("%d failure(s)\n", st.failures);
  return st.failures == 0 ? 0 : kExitError;
}

int numerics_schedule(const numerics::SpectralLossConfig& cfg, int steps) {
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    std::printf("%.6f\t%.12g\n", t, numerics::focus_intensity(t, cfg));
  }
  return 0;
}

struct FreqLossArgs {
  std::string pred;
  std::string target;
  double t = 0.5;
  std::string policy = "stop_gradient";
  std::string grad_out;
};

int numerics_freq_loss(const FreqLossArgs& a) {
  numerics::SpectralLossConfig cfg;
  if (a.policy == "full") cfg.weight_gradient = numerics::WeightGradient::full;
  else if (a.policy != "stop_gradient") throw ConfigError("--policy must be stop_gradient or full");
  const auto r = numerics::frequency_loss(numerics::read_ten1(a.pred), numerics::read_ten1(a.target), a.t, cfg);
  nlohmann::ordered_json j{{"value", r.value}, {"alpha", r.alpha}, {"t", a.t}, {"policy", a.policy}};
  std::cout << j.dump() << "\n";
  if (!a.grad_out.empty()) numerics::write_ten1(a.grad_out, r.gradient);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uhredit: image-editing data curation, pFID evaluation and numerics checks"};
  app.require_subcommand(1);
  std::function<int()> action;

  auto* curate = app.add_subcommand("curate", "Filter an edit-triplet manifest");
  curate->require_subcommand(1);
  CurateArgs ca;
  const auto add_curate_options = [&](CLI::App* sub) {
    sub->add_option("--manifest", ca.manifest, "Input JSONL manifest")->required()->check(CLI::ExistingFile);
    sub->add_option("--config", ca.config, "Pipeline config (JSON)");
    sub->add_option("--out", ca.out, "Output JSONL manifest")->required();
    sub->add_option("--report", ca.report, "Report JSON");
    sub->add_option("--workers", ca.workers, "Worker threads (0 = all)");
    sub->add_option("--seed", ca.seed, "Seed recorded in the effective config");
  };
  auto* run = curate->add_subcommand("run", "Run all enabled stages in order");
  add_curate_options(run);
  run->callback([&] { action = [&] { return curate_run(ca); }; });
  auto* stage = curate->add_subcommand("stage", "Run a single stage");
  stage->add_option("name", ca.stage, "preliminary | quality | adherence | aesthetic")->required();
  add_curate_options(stage);
  stage->callback([&] { action = [&] { return curate_stage(ca); }; });

  PairArgs pa;
  auto* pairs = curate->add_subcommand("pairs", "Mine input/edited pairs from an ordered frame directory");
  pairs->add_option("--frames", pa.frames, "Directory of frames (sorted by name)")->required()->check(CLI::ExistingDirectory);
  pairs->add_option("--config", pa.config, "Pipeline config (JSON); the pairs and quality sections apply");
  pairs->add_option("--out", pa.out, "Output JSONL of scored candidate pairs")->required();
  pairs->add_option("--workers", pa.workers, "Worker threads (0 = all)");
  pairs->callback([&] { action = [&] { return curate_pairs(pa); }; });

  PfidArgs fa;
  auto* pf = app.add_subcommand("pfid", "Patch-level Frechet distance between two image sets");
  pf->add_option("--real", fa.real, "Directory of reference images")->required()->check(CLI::ExistingDirectory);
  pf->add_option("--gen", fa.gen, "Directory of generated images")->required()->check(CLI::ExistingDirectory);
  pf->add_option("--patch", fa.patch, "Patch side in pixels")->capture_default_str();
  pf->add_option("--stride", fa.stride, "Anchor stride in pixels")->capture_default_str();
  pf->add_option("--max-patches", fa.max_patches, "Patches per image cap")->capture_default_str();
  pf->add_option("--sampling", fa.sampling, "raster | random")->capture_default_str();
  pf->add_option("--features", fa.features, "\"builtin\" or an EMB1 directory")->capture_default_str();
  pf->add_option("--seed", fa.seed, "Seed for random sampling")->capture_default_str();
  pf->add_option("--out", fa.out, "Report JSON (stdout if omitted)");
  pf->callback([&] { action = [&] { return run_pfid(fa); }; });

  auto* num = app.add_subcommand("numerics", "Reference numerics");
  num->require_subcommand(1);
  std::uint64_t selftest_seed = 20260101;
  auto* self = num->add_subcommand("selftest", "Run the invariant suite; nonzero exit on any failure");
  self->add_option("--seed", selftest_seed)->capture_default_str();
  self->callback([&] { action = [&] { return numerics_selftest(selftest_seed); }; });
  numerics::SpectralLossConfig sc;
  int steps = 10;
  auto* sched = num->add_subcommand("schedule", "Print the focus-intensity schedule");
  sched->add_option("--alpha-min", sc.alpha_min)->capture_default_str();
  sched->add_option("--alpha-max", sc.alpha_max)->capture_default_str();
  sched->add_option("--gamma", sc.gamma)->capture_default_str();
  sched->add_option("--steps", steps)->capture_default_str()->check(CLI::PositiveNumber);
  sched->callback([&] {
    action = [&] {
      sc.validate();
      return numerics_schedule(sc, steps);
    };
  });
  FreqLossArgs la;
  auto* fl = num->add_subcommand("freq-loss", "Frequency loss and gradient of two TEN1 tensors");
  fl->add_option("--pred", la.pred)->required()->check(CLI::ExistingFile);
  fl->add_option("--target", la.target)->required()->check(CLI::ExistingFile);
  fl->add_option("--t", la.t)->capture_default_str();
  fl->add_option("--policy", la.policy, "stop_gradient | full")->capture_default_str();
  fl->add_option("--grad-out", la.grad_out, "Write the gradient as TEN1");
  fl->callback([&] { action = [&] { return numerics_freq_loss(la); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  try {
    return action();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
