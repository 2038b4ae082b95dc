#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tagforge/cli.hpp"
#include "tagforge/distribution.hpp"
#include "tagforge/estimation.hpp"
#include "tagforge/pipeline.hpp"

using namespace tagforge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tagforge_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

const char* kSmallConfig = R"(seed = 3
num_identities = 2
images_per_identity = 2
num_cameras = 3
backgrounds = none
poses = stand, walk_1
[option camera_azimuth_deg]
mode = uniform 0 360
[option gamma]
mode = uniform 0.8 1.2
)";

double mean_luma(const std::string& path) {
  const auto img = to_float(read_png(path));
  return (0.2126 * img.pixels().col(0) + 0.7152 * img.pixels().col(1) + 0.0722 * img.pixels().col(2)).mean();
}

/// Rows holding any pixel that differs from the top-left (background) pixel.
int covered_rows(const std::string& path) {
  const auto img = read_png(path);
  const auto bg = img.pixel(0, 0);
  int rows = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if ((img.pixel(x, y) != bg).any()) {
        ++rows;
        break;
      }
  return rows;
}

void save_values(const fs::path& p, OptionKey key, std::vector<double> values) {
  TargetProfile prof;
  prof.entries[key] = EmpiricalDistribution{key, std::move(values), "test"};
  save_profile(prof, p.string());
}

}  // namespace

TEST_CASE("help lists every flag and unknown flags are errors") {
  const std::map<std::string, std::vector<std::string>> flags{
      {"generate", {"--config", "--profile", "--out", "--workers"}},
      {"calibrate", {"--option", "--config", "--n", "--out", "--lo", "--hi", "--k", "--extractor", "--workers"}},
      {"estimate", {"--estimator", "--images", "--out", "--histogram-csv"}},
      {"compare", {"--a", "--b"}},
      {"preview", {"--options", "--seed", "--identity", "--beta", "--out"}},
      {"gamma-variant", {"--in", "--out", "--lo", "--hi", "--seed"}},
  };
  for (const auto& [cmd, names] : flags) {
    const auto r = run({cmd, "--help"});
    CHECK(r.code == 0);
    for (const auto& f : names) CHECK_MESSAGE(r.out.find(f) != std::string::npos, cmd << " help lacks " << f);
    CHECK(run({cmd, "--no-such-flag"}).code == kExitConfig);
  }
  CHECK(run({}).code == kExitConfig);
  CHECK(run({"frobnicate"}).code == kExitConfig);
}

TEST_CASE("generate") {
  const auto dir = scratch_dir("generate");
  write_text(dir / "small.cfg", kSmallConfig);
  const auto out = dir / "out";

  SUBCASE("valid config writes images and a manifest") {
    const auto r = run({"generate", "--config", (dir / "small.cfg").string(), "--out", out.string(), "--workers", "2"});
    CHECK(r.code == 0);
    CHECK(fs::exists(out / kManifestFile));
    CHECK(load_manifest((out / kManifestFile).string()).records.size() == 4);
    CHECK(r.out.find("generated 4 images") != std::string::npos);
    CHECK(r.out.find("gamma") != std::string::npos);
  }
  SUBCASE("missing config names the path") {
    const auto r = run({"generate", "--config", (dir / "absent.cfg").string(), "--out", out.string()});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("absent.cfg") != std::string::npos);
  }
  SUBCASE("profile without profile-mode options warns") {
    save_values(dir / "p.profile", OptionKey::gamma, {1.5});
    const auto r = run({"generate", "--config", (dir / "small.cfg").string(), "--profile", (dir / "p.profile").string(),
                        "--out", out.string()});
    CHECK(r.code == 0);
    CHECK(r.err.find("warning") != std::string::npos);
  }
  SUBCASE("profile mode without a profile is a config error") {
    write_text(dir / "pm.cfg", std::string(kSmallConfig) + "[option ambient]\nmode = profile\n");
    const auto r = run({"generate", "--config", (dir / "pm.cfg").string(), "--out", out.string()});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("ambient") != std::string::npos);
  }
  SUBCASE("TAGFORGE_SEED overrides the config seed") {
    ::setenv("TAGFORGE_SEED", "4242", 1);
    const auto r = run({"generate", "--config", (dir / "small.cfg").string(), "--out", out.string()});
    ::unsetenv("TAGFORGE_SEED");
    CHECK(r.code == 0);
    CHECK(load_manifest((out / kManifestFile).string()).seed == 4242);
  }
  SUBCASE("malformed TAGFORGE_SEED is rejected") {
    ::setenv("TAGFORGE_SEED", "twelve", 1);
    const auto r = run({"generate", "--config", (dir / "small.cfg").string(), "--out", out.string()});
    ::unsetenv("TAGFORGE_SEED");
    CHECK(r.code == kExitConfig);
  }
  fs::remove_all(dir);
}

TEST_CASE("calibrate argument errors") {
  const auto dir = scratch_dir("calibrate");
  const auto est = (dir / "e.est").string();
  auto r = run({"calibrate", "--option", "background_ref", "--out", est});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("option not estimable") != std::string::npos);
  CHECK(run({"calibrate", "--option", "camera_azimuth_deg", "--out", est}).code == kExitConfig);
  CHECK(run({"calibrate", "--option", "nonsense", "--out", est}).code == kExitConfig);
  r = run({"calibrate", "--option", "gamma", "--n", "3", "--k", "5", "--out", est});
  CHECK(r.code == kExitConfig);
  CHECK_FALSE(fs::exists(est));
  fs::remove_all(dir);
}

TEST_CASE("calibrate, estimate and merge") {
  const auto dir = scratch_dir("estimate");
  write_text(dir / "cal.cfg", kSmallConfig);
  write_text(dir / "target.cfg", R"(seed = 77
num_identities = 50
images_per_identity = 1
backgrounds = none
poses = stand, walk_1
[option camera_azimuth_deg]
mode = uniform 0 360
[option gamma]
mode = fixed 1.6
)");
  const auto gamma_est = dir / "gamma.est", depr_est = dir / "depr.est", profile = dir / "target.profile";
  REQUIRE(run({"calibrate", "--option", "gamma", "--config", (dir / "cal.cfg").string(), "--n", "120", "--out",
               gamma_est.string()})
              .code == 0);
  REQUIRE(run({"generate", "--config", (dir / "target.cfg").string(), "--out", (dir / "target").string()}).code == 0);
  // The manifest is not an image; estimate only reads images.
  auto r = run({"estimate", "--estimator", gamma_est.string(), "--images", (dir / "target").string(), "--out",
                profile.string(), "--histogram-csv", (dir / "hist.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("#") != std::string::npos);

  auto prof = load_profile(profile.string());
  REQUIRE(prof.entries.size() == 1);
  const auto g = prof.entries.at(OptionKey::gamma).values;
  CHECK(g.size() == 50);
  double mae = 0;
  for (double v : g) mae += std::abs(v - 1.6);
  CHECK(mae / static_cast<double>(g.size()) <= 0.10);
  CHECK(fs::exists(dir / "hist.csv"));

  REQUIRE(run({"calibrate", "--option", "camera_depression_deg", "--config", (dir / "cal.cfg").string(), "--n", "30",
               "--out", depr_est.string()})
              .code == 0);
  r = run({"estimate", "--estimator", depr_est.string(), "--images", (dir / "target").string(), "--out", profile.string()});
  CHECK(r.code == 0);
  prof = load_profile(profile.string());
  CHECK(prof.entries.size() == 2);
  CHECK(prof.entries.at(OptionKey::gamma).values == g);

  fs::create_directories(dir / "empty");
  CHECK(run({"estimate", "--estimator", gamma_est.string(), "--images", (dir / "empty").string(), "--out",
             profile.string()})
            .code == kExitConfig);
  fs::remove_all(dir);
}

TEST_CASE("compare") {
  const auto dir = scratch_dir("compare");
  const std::vector<double> base{0.9, 1.0, 1.25, 1.4, 1.1};
  std::vector<double> shifted = base;
  for (auto& v : shifted) v += 0.5;
  save_values(dir / "a.profile", OptionKey::gamma, base);
  save_values(dir / "b.profile", OptionKey::gamma, shifted);
  save_values(dir / "c.profile", OptionKey::ambient, {0.3});

  auto r = run({"compare", "--a", (dir / "a.profile").string(), "--b", (dir / "a.profile").string()});
  CHECK(r.code == 0);
  CHECK(r.out == "gamma W1=0\n");

  r = run({"compare", "--a", (dir / "a.profile").string(), "--b", (dir / "b.profile").string()});
  CHECK(r.code == 0);
  const auto eq = r.out.find('=');
  REQUIRE(eq != std::string::npos);
  CHECK(std::stod(r.out.substr(eq + 1)) == doctest::Approx(0.5).epsilon(1e-9));

  CHECK(run({"compare", "--a", (dir / "a.profile").string(), "--b", (dir / "c.profile").string()}).code == kExitConfig);
  fs::remove_all(dir);
}

TEST_CASE("preview") {
  const auto dir = scratch_dir("preview");
  auto path = [&](const char* n) { return (dir / n).string(); };
  REQUIRE(run({"preview", "--options", "camera_depression_deg=0", "--seed", "5", "--out", path("d0.png")}).code == 0);
  REQUIRE(run({"preview", "--options", "camera_depression_deg=60", "--seed", "5", "--out", path("d60.png")}).code == 0);
  CHECK(covered_rows(path("d60.png")) < covered_rows(path("d0.png")));

  REQUIRE(run({"preview", "--options", "gamma=0.5", "--out", path("g05.png")}).code == 0);
  REQUIRE(run({"preview", "--options", "gamma=2.0", "--out", path("g20.png")}).code == 0);
  CHECK(mean_luma(path("g05.png")) > mean_luma(path("g20.png")));
  const auto img = read_png(path("g05.png"));
  CHECK(img.width() == kOutputWidth);
  CHECK(img.height() == kOutputHeight);

  auto r = run({"preview", "--options", "gamma=1.0,wobble=3", "--out", path("bad.png")});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("wobble") != std::string::npos);
  r = run({"preview", "--options", "gamma=abc", "--out", path("bad.png")});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("gamma") != std::string::npos);
  CHECK_FALSE(fs::exists(path("bad.png")));
  fs::remove_all(dir);
}

TEST_CASE("gamma-variant command") {
  const auto dir = scratch_dir("gv");
  fs::create_directories(dir / "in");
  Rgb8Image img(4, 4, 100);
  write_png((dir / "in" / "x.png").string(), img);
  auto r = run({"gamma-variant", "--in", (dir / "in").string(), "--out", (dir / "out").string(), "--lo", "2", "--hi",
                "2"});
  CHECK(r.code == 0);
  CHECK(read_png((dir / "out" / "x.png").string()) == quantize(apply_gamma(to_float(img), 2.0)));
  CHECK(fs::exists(dir / "out" / kGammaSidecarFile));
  CHECK(run({"gamma-variant", "--in", (dir / "in").string(), "--out", (dir / "out").string(), "--lo", "0.2"}).code ==
        kExitConfig);
  fs::remove_all(dir);
}
