#include "tagforge/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>

#include <CLI11.hpp>

#include "tagforge/mesh.hpp"
#include "tagforge/pipeline.hpp"
#include "tagforge/renderer.hpp"
#include "tagforge/text.hpp"

namespace tagforge {

namespace fs = std::filesystem;

namespace {

/// Failure with a known exit code.
struct CommandFailure {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) { throw CommandFailure{code, message}; }

std::uint64_t seed_override(std::uint64_t seed) {
  const char* env = std::getenv("TAGFORGE_SEED");
  if (!env || !*env) return seed;
  const auto v = parse_u64(trim(env));
  if (!v) fail(kExitConfig, "TAGFORGE_SEED is not an unsigned integer: '" + std::string(env) + "'");
  return *v;
}

GenerationConfig config_from(const std::string& path) {
  GenerationConfig cfg;
  try {
    cfg = load_config(path);
  } catch (const std::exception& e) {
    fail(kExitConfig, e.what());
  }
  cfg.seed = seed_override(cfg.seed);
  return cfg;
}

OptionKey option_from(const std::string& name) {
  const auto key = find_option_key(name);
  if (!key) fail(kExitConfig, "unknown option key '" + name + "'");
  return *key;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Summary {
  double min = 0, mean = 0, max = 0;
};

Summary summarize(const std::vector<double>& v) {
  if (v.empty()) return {};
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()), *hi};
}

void print_summary_row(std::ostream& out, std::string_view name, std::string_view mode, const Summary& s) {
  out << "  " << std::left << std::setw(22) << name << std::setw(9) << mode << std::right << std::fixed
      << std::setprecision(4) << " min " << std::setw(10) << s.min << "  mean " << std::setw(10) << s.mean << "  max "
      << std::setw(10) << s.max << "\n";
  out.unsetf(std::ios::floatfield);
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string config, profile, out;
  int workers = default_workers();
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  auto cfg = config_from(a.config);
  std::optional<TargetProfile> profile;
  if (!a.profile.empty()) {
    try {
      profile = load_profile(a.profile);
    } catch (const std::exception& e) {
      fail(kExitConfig, e.what());
    }
    const bool uses = std::any_of(cfg.options.begin(), cfg.options.end(),
                                  [](const OptionSpec& s) { return s.mode == OptionMode::profile; });
    if (!uses) err << "warning: --profile given but no option is in profile mode; the profile is ignored\n";
  }
  GenerationContext ctx;
  try {
    ctx = GenerationContext::create(cfg, std::move(profile));
  } catch (const std::exception& e) {
    fail(kExitConfig, e.what());
  }
  const std::string dir = a.out.empty() ? cfg.resolve(cfg.output) : a.out;
  DatasetManifest m;
  try {
    m = generate_dataset(ctx, dir, std::max(1, a.workers));
  } catch (const std::exception& e) {
    fail(kExitGeneration, e.what());
  }
  out << "generated " << m.records.size() << " images (" << cfg.num_identities << " identities x "
      << cfg.images_per_identity << ") in " << dir << "\n";
  out << "manifest " << (fs::path(dir) / kManifestFile).string() << " seed=" << m.seed << "\n";
  out << "per-option summary:\n";
  for (const auto& info : kOptionTable) {
    const auto mode = info.key == OptionKey::camera_id ? std::string_view("uniform") : mode_name(cfg.option(info.key).mode);
    print_summary_row(out, info.name, mode, summarize(m.column(info.key)));
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CalibrateArgs {
  std::string option, config, out, extractor;
  int n = 600;
  int k = kDefaultNeighbors;
  std::optional<double> lo, hi;
  int workers = default_workers();
};

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out, std::ostream&) {
  // pose and background_ref are options too, just not scalar ones.
  if (a.option == "pose" || a.option == "background_ref") fail(kExitConfig, "option not estimable: " + a.option);
  const auto key = option_from(a.option);
  if (!is_estimable(key)) fail(kExitConfig, "option not estimable: " + a.option);
  if (a.k < 1) fail(kExitConfig, "--k must be at least 1");
  if (a.n < a.k) fail(kExitConfig, "--n " + std::to_string(a.n) + " is smaller than k = " + std::to_string(a.k));
  FeatureTag tag = default_feature_tag(key);
  if (!a.extractor.empty()) {
    const auto t = find_feature_tag(a.extractor);
    if (!t) fail(kExitConfig, "unknown extractor '" + a.extractor + "'");
    tag = *t;
  }
  GenerationConfig cfg;
  if (!a.config.empty()) cfg = config_from(a.config);
  else cfg.seed = seed_override(cfg.seed);
  // The swept option is set per image; no profile is involved.
  cfg.option(key) = GenerationConfig::default_option_specs()[static_cast<std::size_t>(key)];
  for (auto& spec : cfg.options)
    if (spec.mode == OptionMode::profile) fail(kExitConfig, "calibration config may not use profile mode");
  auto [lo, hi] = default_sweep_range(key);
  if (a.lo) lo = *a.lo;
  if (a.hi) hi = *a.hi;

  GenerationContext ctx;
  std::vector<std::pair<RgbImage, double>> sweep;
  try {
    ctx = GenerationContext::create(cfg);
    sweep = render_sweep(ctx, key, a.n, lo, hi, std::max(1, a.workers));
  } catch (const ConfigError& e) {
    fail(kExitConfig, e.what());
  } catch (const std::exception& e) {
    fail(kExitGeneration, e.what());
  }
  const auto est = fit(key, sweep, tag, a.k);
  save_estimator(est, a.out);
  out << "calibrated " << option_name(key) << " on " << a.n << " renders over [" << format_double(lo) << ", "
      << format_double(hi) << "], extractor " << feature_tag_name(tag) << ", k=" << a.k << "\n";
  out << "estimator written to " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  std::string estimator, images, out, histogram_csv;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out, std::ostream&) {
  Estimator est;
  try {
    est = load_estimator(a.estimator);
  } catch (const std::exception& e) {
    fail(kExitConfig, e.what());
  }
  std::vector<std::pair<std::string, RgbImage>> files;
  try {
    files = load_image_dir(a.images);
  } catch (const std::exception& e) {
    fail(kExitConfig, e.what());
  }
  if (files.empty()) fail(kExitConfig, "no images in " + a.images);
  std::vector<RgbImage> images;
  images.reserve(files.size());
  for (auto& f : files) images.push_back(std::move(f.second));
  const auto dist = build_distribution(est, images, fs::path(a.images).filename().string());

  TargetProfile profile;
  if (fs::exists(a.out)) {
    try {
      profile = load_profile(a.out);
    } catch (const std::exception& e) {
      fail(kExitConfig, e.what());
    }
  }
  profile.entries[est.key] = dist;
  profile.created = utc_timestamp();
  profile.estimator_version = "tagforge-estimator " + std::to_string(kEstimatorFormatVersion);
  save_profile(profile, a.out);

  const auto s = summarize(dist.values);
  out << "estimated " << option_name(est.key) << " on " << dist.values.size() << " images: " << std::fixed
      << std::setprecision(4) << "mean " << s.mean << ", min " << s.min << ", max " << s.max << "\n";
  out.unsetf(std::ios::floatfield);
  const auto h = histogram(dist);
  out << format_histogram(h);
  out << "profile " << a.out << " now holds " << profile.entries.size() << " option(s)\n";
  if (!a.histogram_csv.empty()) {
    std::ofstream csv(a.histogram_csv, std::ios::binary);
    csv << "bin_lo,bin_hi,count\n";
    const double w = (h.hi - h.lo) / static_cast<double>(h.counts.size());
    for (std::size_t i = 0; i < h.counts.size(); ++i)
      csv << format_double(h.lo + w * i) << "," << format_double(h.lo + w * (i + 1)) << "," << h.counts[i] << "\n";
    if (!csv) fail(kExitConfig, "cannot write " + a.histogram_csv);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string a, b;
};

int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err) {
  TargetProfile pa, pb;
  try {
    pa = load_profile(args.a);
    pb = load_profile(args.b);
  } catch (const std::exception& e) {
    fail(kExitConfig, e.what());
  }
  int shared = 0;
  for (const auto& [key, da] : pa.entries) {
    const auto* db = pb.find(key);
    if (!db) {
      err << "note: " << option_name(key) << " only in " << args.a << "\n";
      continue;
    }
    ++shared;
    out << option_name(key) << " W1=" << format_double(wasserstein1(da, *db)) << "\n";
  }
  for (const auto& [key, db] : pb.entries)
    if (!pa.find(key)) err << "note: " << option_name(key) << " only in " << args.b << "\n";
  if (shared == 0) fail(kExitConfig, "the profiles share no option keys");
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PreviewArgs {
  std::string options, out;
  std::uint64_t seed = 1;
  int identity = 1;
  double beta = kDefaultBeta;
};

int cmd_preview(const PreviewArgs& a, std::ostream& out, std::ostream&) {
  RenderOptions opts;
  try {
    opts = parse_render_options(a.options);
    opts.validate();
    if (!opts.pose.is_builtin()) throw ConfigError("pose: preview takes builtin poses only");
    if (!opts.background_ref.is_plain()) throw ConfigError("background_ref: preview renders on plain gray");
    if (a.identity < 1) throw ConfigError("--identity must be at least 1");
    if (!(a.beta >= 0.0 && a.beta <= 0.5)) throw ConfigError("--beta must lie in [0, 0.5]");
  } catch (const std::exception& e) {
    fail(kExitConfig, e.what());
  }
  try {
    const auto spec = derive_person_spec(a.seed, static_cast<std::uint64_t>(a.identity));
    const auto fg = render(build_mesh(spec, builtin_pose(opts.pose.source)), opts, kOutputWidth, kOutputHeight);
    const RgbImage bg(kOutputWidth, kOutputHeight, kPlainBackground);
    const auto img = postprocess(composite(fg, bg), derive_color_bias(opts.camera_id, a.seed, a.beta), opts.gamma,
                                 opts.working_height_px);
    write_png(a.out, quantize(img));
  } catch (const std::exception& e) {
    fail(kExitGeneration, e.what());
  }
  out << "preview written to " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GammaVariantArgs {
  std::string in, out;
  double lo = 0.5, hi = 1.5;
  std::uint64_t seed = 0;
};

int cmd_gamma_variant(const GammaVariantArgs& a, std::ostream& out, std::ostream&) {
  std::vector<GammaVariantEntry> entries;
  try {
    entries = make_gamma_variant(a.in, a.lo, a.hi, a.seed, a.out);
  } catch (const std::exception& e) {
    fail(kExitConfig, e.what());
  }
  const auto ok = std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.gamma.has_value(); });
  out << "wrote " << ok << " of " << entries.size() << " images to " << a.out << " (gamma in [" << format_double(a.lo)
      << ", " << format_double(a.hi) << "]), sidecar " << kGammaSidecarFile << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"tagforge: target-aware synthetic person image generation"};
  app.name("tagforge");
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Render a labeled dataset from a config");
  generate->add_option("--config", gen.config, "Config file")->required();
  generate->add_option("--profile", gen.profile, "Target profile for options in profile mode");
  generate->add_option("--out", gen.out, "Output directory (default: the config's output)");
  generate->add_option("--workers", gen.workers, "Worker threads")->check(CLI::PositiveNumber);

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Render an option sweep and fit an estimator");
  calibrate->add_option("--option", cal.option, "Option key to estimate")->required();
  calibrate->add_option("--config", cal.config, "Config for the non-swept options (default: built-in defaults)");
  calibrate->add_option("--n", cal.n, "Number of calibration renders")->capture_default_str();
  calibrate->add_option("--out", cal.out, "Estimator output file")->required();
  calibrate->add_option("--lo", cal.lo, "Sweep lower bound (default depends on the option)");
  calibrate->add_option("--hi", cal.hi, "Sweep upper bound (default depends on the option)");
  calibrate->add_option("--k", cal.k, "Neighbors")->capture_default_str();
  calibrate->add_option("--extractor", cal.extractor, "Feature extractor (default depends on the option)");
  calibrate->add_option("--workers", cal.workers, "Worker threads")->check(CLI::PositiveNumber);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate an option distribution over target images");
  estimate->add_option("--estimator", est.estimator, "Estimator file")->required();
  estimate->add_option("--images", est.images, "Directory of target images")->required();
  estimate->add_option("--out", est.out, "Profile file to create or merge into")->required();
  estimate->add_option("--histogram-csv", est.histogram_csv, "Also write the histogram as CSV");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "W1 distance per shared option of two profiles");
  compare->add_option("--a", cmp.a, "First profile")->required();
  compare->add_option("--b", cmp.b, "Second profile")->required();

  PreviewArgs pre;
  auto* preview = app.add_subcommand("preview", "Render one image with explicit options");
  preview->add_option("--options", pre.options, "Inline options, e.g. \"gamma=1.5,camera_depression_deg=30\"");
  preview->add_option("--seed", pre.seed, "Global seed")->capture_default_str();
  preview->add_option("--identity", pre.identity, "Identity id")->capture_default_str();
  preview->add_option("--beta", pre.beta, "Color-bias magnitude")->capture_default_str();
  preview->add_option("--out", pre.out, "Output PNG")->required();

  GammaVariantArgs gv;
  auto* gamma = app.add_subcommand("gamma-variant", "Re-encode a dataset with a random gamma per image");
  gamma->add_option("--in", gv.in, "Input image directory")->required();
  gamma->add_option("--out", gv.out, "Output directory")->required();
  gamma->add_option("--lo", gv.lo, "Lowest gamma")->capture_default_str();
  gamma->add_option("--hi", gv.hi, "Highest gamma")->capture_default_str();
  gamma->add_option("--seed", gv.seed, "Seed")->capture_default_str();

  std::vector<const char*> argv{"tagforge"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*generate) return cmd_generate(gen, out, err);
    if (*calibrate) return cmd_calibrate(cal, out, err);
    if (*estimate) return cmd_estimate(est, out, err);
    if (*compare) return cmd_compare(cmp, out, err);
    if (*preview) return cmd_preview(pre, out, err);
    if (*gamma) return cmd_gamma_variant(gv, out, err);
  } catch (const CommandFailure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace tagforge
