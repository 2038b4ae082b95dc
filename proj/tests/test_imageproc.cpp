#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "tagforge/imageproc.hpp"
#include "tagforge/rng.hpp"

using namespace tagforge;
namespace fs = std::filesystem;

namespace {

RgbImage checkerboard(int w, int h) {
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.pixel(x, y).setConstant((x + y) % 2 ? 1.0f : 0.0f);
  return img;
}

double variance(const RgbImage& img) {
  const Eigen::ArrayXd v = img.pixels().cast<double>().reshaped();
  return (v - v.mean()).square().mean();
}

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("tagforge_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("composite") {
  ImageBuffer fg(16, 16);
  RgbImage bg(16, 16);
  Rng rng(1);
  for (Eigen::Index i = 0; i < fg.pixels().size(); ++i) fg.pixels().data()[i] = static_cast<float>(rng.uniform01());
  for (Eigen::Index i = 0; i < bg.pixels().size(); ++i) bg.pixels().data()[i] = static_cast<float>(rng.uniform01());

  fg.pixels().col(3).setZero();
  CHECK(composite(fg, bg) == bg);
  fg.pixels().col(3).setOnes();
  CHECK(composite(fg, bg) == rgb_of(fg));

  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) fg.at(x, y, 3) = (x + y) % 2 ? 1.0f : 0.0f;
  const auto out = composite(fg, bg);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      for (int c = 0; c < 3; ++c) CHECK(out.at(x, y, c) == ((x + y) % 2 ? fg.at(x, y, c) : bg.at(x, y, c)));

  CHECK_THROWS_AS((void)composite(fg, RgbImage(16, 15)), Error);
}

TEST_CASE("color bias") {
  CHECK(derive_color_bias(3, 42, 0.0).gains.isApproxToConstant(1.0, 0.0));
  CHECK((derive_color_bias(3, 42, 0.0).gains == 1.0).all());
  CHECK(derive_color_bias(3, 42) == derive_color_bias(3, 42));
  CHECK_FALSE(derive_color_bias(1, 42, 0.08) == derive_color_bias(2, 42, 0.08));
  for (int cam = 1; cam <= 200; ++cam) {
    const auto g = derive_color_bias(cam, 7, 0.08).gains;
    CHECK((g >= 0.92).all());
    CHECK((g <= 1.08).all());
  }

  RgbImage gray(4, 4, 0.5f);
  CHECK(apply_color_bias(gray, ColorBias{}) == gray);
  ColorBias b;
  b.gains << 1.08, 1.0, 0.92;
  const auto biased = apply_color_bias(gray, b);
  CHECK(biased.at(1, 2, 0) == doctest::Approx(0.54));
  CHECK(biased.at(1, 2, 1) == doctest::Approx(0.50));
  CHECK(biased.at(1, 2, 2) == doctest::Approx(0.46));
  RgbImage white(4, 4, 1.0f);
  b.gains << 1.0, 1.05, 1.3;
  CHECK(apply_color_bias(white, b) == white);
}

TEST_CASE("gamma") {
  const auto img = synth_background(5, 40, 30);
  CHECK(apply_gamma(img, 1.0) == img);
  RgbImage q(2, 2, 0.25f);
  CHECK(apply_gamma(q, 2.0).at(1, 1, 2) == doctest::Approx(0.0625).epsilon(1e-7));
  const auto round_trip = apply_gamma(apply_gamma(img, 2.0), 0.5);
  CHECK((round_trip.pixels() - img.pixels()).abs().maxCoeff() <= 1e-6f);
  CHECK((apply_gamma(img, 2.5).pixels() <= img.pixels()).all());
  CHECK((apply_gamma(img, 0.4).pixels() >= img.pixels()).all());
}

TEST_CASE("resize matches a direct triangle-filter evaluation") {
  const auto img = synth_background(9, 37, 23);
  for (const auto [ow, oh] : {std::pair{15, 9}, {80, 50}, {37, 11}}) {
    const auto out = resize(img, ow, oh);
    // Independent 2D evaluation of the separable kernel.
    auto kernel = [](int in, int out_n, int i, int j) {
      const double scale = double(in) / out_n, support = std::max(scale, 1.0);
      return std::max(0.0, 1.0 - std::abs(j + 0.5 - (i + 0.5) * scale) / support);
    };
    for (int y = 0; y < oh; y += 3) {
      for (int x = 0; x < ow; x += 4) {
        for (int c = 0; c < 3; ++c) {
          double num = 0.0, den = 0.0;
          for (int sy = 0; sy < img.height(); ++sy)
            for (int sx = 0; sx < img.width(); ++sx) {
              const double w = kernel(img.width(), ow, x, sx) * kernel(img.height(), oh, y, sy);
              num += w * img.at(sx, sy, c);
              den += w;
            }
          CHECK(out.at(x, y, c) == doctest::Approx(num / den).epsilon(1e-5));
        }
      }
    }
  }
  CHECK(resize(img, img.width(), img.height()) == img);
}

TEST_CASE("degrade_resolution") {
  const auto natural = resize(synth_background(11, 200, 400), kOutputWidth, kOutputHeight);
  CHECK(degrade_resolution(natural, 256) == natural);

  const auto board = checkerboard(kOutputWidth, kOutputHeight);
  const auto blurred = degrade_resolution(board, 32);
  CHECK(blurred.width() == kOutputWidth);
  CHECK(blurred.height() == kOutputHeight);
  CHECK(variance(blurred) * 10.0 <= variance(board));

  double previous = variance(natural);
  for (const int wh : {128, 64, 32}) {
    const double v = variance(degrade_resolution(natural, wh));
    CHECK(v <= previous);
    previous = v;
  }
}

TEST_CASE("every operation keeps values in [0, 1]") {
  const auto img = synth_background(2, 64, 64);
  ColorBias b;
  b.gains << 1.5, 0.5, 1.2;
  for (const auto& out : {apply_color_bias(img, b), apply_gamma(img, 0.4), apply_gamma(img, 2.5),
                          resize(img, 20, 90), degrade_resolution(img, 32, 128, 256)}) {
    CHECK((out.pixels() >= 0.0f).all());
    CHECK((out.pixels() <= 1.0f).all());
  }
}

TEST_CASE("pick_background") {
  BackgroundCorpus single;
  single.add("only.png", synth_background(1, 100, 80));
  single.add_crop("only.png", {10, 5, 40, 60});
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto pick = pick_background(single, s, 128, 256);
    CHECK(pick.ref == BackgroundRef{"only.png", 10, 5, 40, 60});
    CHECK(pick.image.width() == 128);
  }

  BackgroundCorpus corpus;
  for (int i = 0; i < 10; ++i) corpus.add("bg" + std::to_string(i) + ".png", synth_background(i, 90 + i, 70 + 2 * i));
  CHECK(pick_background(corpus, 77, 128, 256).ref == pick_background(corpus, 77, 128, 256).ref);
  std::set<std::string> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto pick = pick_background(corpus, hash_words({s}), 32, 64);
    seen.insert(pick.ref.image_id);
    const auto& src = corpus.images[static_cast<std::size_t>(corpus.find(pick.ref.image_id))];
    const auto& r = pick.ref;
    CHECK(r.x >= 0);
    CHECK(r.y >= 0);
    CHECK(r.x + r.w <= src.width());
    CHECK(r.y + r.h <= src.height());
    CHECK(double(r.w) * r.h >= 0.30 * src.width() * src.height());
    if (s < 5) CHECK(crop_background(corpus, r, 32, 64) == pick.image);
  }
  CHECK(seen.size() == 10);

  const auto none = pick_background(BackgroundCorpus{}, 3, 16, 16);
  CHECK(none.ref.is_plain());
  CHECK((none.image.pixels() == kPlainBackground).all());
}

TEST_CASE("corpus loading") {
  const auto dir = temp_dir("corpus");
  write_png((dir / "b.png").string(), quantize(synth_background(1, 30, 20)));
  write_png((dir / "a.png").string(), quantize(synth_background(2, 25, 25)));
  std::ofstream(dir / "notes.txt") << "ignored";
  {
    std::ofstream m(dir / "crops.txt");
    m << "# id x y w h\n";
    m << "a.png 0 0 10 10\n";
    m << "\n";
    m << "b.png 5 5 25 15\n";
  }
  const auto corpus = load_background_corpus(dir.string(), (dir / "crops.txt").string());
  REQUIRE(corpus.size() == 2);
  CHECK(corpus.ids[0] == "a.png");
  CHECK(corpus.images[1].width() == 30);
  CHECK(corpus.crops.at("b.png").front() == CropRect{5, 5, 25, 15});

  std::ofstream(dir / "bad.txt") << "a.png 0 0 10 10\nb.png 10 10 30 30\n";
  CHECK_THROWS_WITH_AS((void)load_background_corpus(dir.string(), (dir / "bad.txt").string()),
                       doctest::Contains("line 2"), ParseError);
  std::ofstream(dir / "bad2.txt") << "zzz.png 0 0 1 1\n";
  CHECK_THROWS_AS((void)load_background_corpus(dir.string(), (dir / "bad2.txt").string()), ParseError);
  CHECK_THROWS_AS((void)load_background_corpus((dir / "missing").string()), Error);
  fs::remove_all(dir);
}
