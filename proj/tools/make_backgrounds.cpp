// Writes the procedural background corpus shipped in data/backgrounds.
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "tagforge/imageproc.hpp"
#include "tagforge/rng.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate procedural background images"};
  std::string out = "data/backgrounds";
  int count = 24, width = 192, height = 256;
  std::uint64_t seed = 2024;
  app.add_option("--out", out, "Output directory")->capture_default_str();
  app.add_option("--count", count, "Number of images")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--width", width, "Width in pixels")->capture_default_str()->check(CLI::Range(16, 4096));
  app.add_option("--height", height, "Height in pixels")->capture_default_str()->check(CLI::Range(16, 4096));
  app.add_option("--seed", seed, "Seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  std::filesystem::create_directories(out);
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "bg_%03d.png", i);
    const auto img = tagforge::synth_background(tagforge::hash_words({seed, static_cast<std::uint64_t>(i)}), width, height);
    tagforge::write_png((std::filesystem::path(out) / name).string(), tagforge::quantize(img));
  }
  std::cout << "wrote " << count << " backgrounds to " << out << "\n";
}
