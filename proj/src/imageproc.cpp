#include "tagforge/imageproc.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <Eigen/SparseCore>

#include "tagforge/rng.hpp"
#include "tagforge/text.hpp"

namespace tagforge {

namespace fs = std::filesystem;

int BackgroundCorpus::find(const std::string& id) const {
  const auto it = std::lower_bound(ids.begin(), ids.end(), id);
  return it != ids.end() && *it == id ? static_cast<int>(it - ids.begin()) : -1;
}

void BackgroundCorpus::add(std::string id, RgbImage image) {
  if (id.empty() || id.find_first_of(", \t\r\n") != std::string::npos)
    throw Error("background id must be non-empty without commas or whitespace: '" + id + "'");
  if (find(id) >= 0) throw Error("duplicate background id: " + id);
  const auto it = std::lower_bound(ids.begin(), ids.end(), id);
  const auto pos = it - ids.begin();
  ids.insert(it, std::move(id));
  images.insert(images.begin() + pos, std::move(image));
}

void BackgroundCorpus::add_crop(const std::string& id, const CropRect& r) {
  const int i = find(id);
  if (i < 0) throw Error("crop for unknown background image: " + id);
  const auto& img = images[static_cast<std::size_t>(i)];
  if (r.x < 0 || r.y < 0 || r.w < 1 || r.h < 1 || r.x + r.w > img.width() || r.y + r.h > img.height())
    throw Error("crop rectangle outside image " + id);
  crops[id].push_back(r);
}

BackgroundCorpus load_background_corpus(const std::string& dir, const std::string& crop_manifest) {
  if (!fs::is_directory(dir)) throw Error("background directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && is_image_path(entry.path().string())) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no PNG or JPEG images in " + dir);

  BackgroundCorpus corpus;
  for (const auto& f : files) corpus.add(f.filename().string(), to_float(read_image(f.string())));

  if (crop_manifest.empty()) return corpus;
  std::ifstream in(crop_manifest);
  if (!in) throw Error("cannot open crop manifest: " + crop_manifest);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto fields = split_fields(std::string_view(line).substr(0, hash), " \t\r");
    if (fields.empty()) continue;
    if (fields.size() != 5) throw ParseError("expected 'image_id x y w h'", line_no);
    int v[4];
    for (int k = 0; k < 4; ++k) {
      const auto n = parse_int(fields[static_cast<std::size_t>(k + 1)]);
      if (!n || *n < 0 || *n > (1 << 20)) throw ParseError("malformed crop value '" + std::string(fields[k + 1]) + "'", line_no);
      v[k] = static_cast<int>(*n);
    }
    try {
      corpus.add_crop(std::string(fields[0]), {v[0], v[1], v[2], v[3]});
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return corpus;
}

namespace {

RgbImage crop(const RgbImage& src, const CropRect& r) {
  RgbImage out(r.w, r.h);
  for (int y = 0; y < r.h; ++y)
    out.pixels().middleRows(Eigen::Index(y) * r.w, r.w) = src.pixels().middleRows(Eigen::Index(r.y + y) * src.width() + r.x, r.w);
  return out;
}

RgbImage plain(int w, int h) { return RgbImage(w, h, kPlainBackground); }

}  // namespace

BackgroundRef choose_background(const BackgroundCorpus& corpus, std::uint64_t seed) {
  if (corpus.size() == 0) return {};
  Rng rng(seed);
  const auto i = rng.index(corpus.size());
  const auto& id = corpus.ids[i];
  const auto& src = corpus.images[i];
  CropRect r;
  if (const auto it = corpus.crops.find(id); it != corpus.crops.end() && !it->second.empty()) {
    r = it->second[rng.index(it->second.size())];
  } else {
    constexpr double kMinSide = 0.548;  // 0.548^2 > 0.30
    r.w = std::min(src.width(), static_cast<int>(std::ceil(rng.uniform(kMinSide, 1.0) * src.width())));
    r.h = std::min(src.height(), static_cast<int>(std::ceil(rng.uniform(kMinSide, 1.0) * src.height())));
    r.x = static_cast<int>(rng.index(static_cast<std::uint64_t>(src.width() - r.w + 1)));
    r.y = static_cast<int>(rng.index(static_cast<std::uint64_t>(src.height() - r.h + 1)));
  }
  return {id, r.x, r.y, r.w, r.h};
}

BackgroundPick pick_background(const BackgroundCorpus& corpus, std::uint64_t seed, int out_w, int out_h) {
  BackgroundPick pick;
  pick.ref = choose_background(corpus, seed);
  pick.image = crop_background(corpus, pick.ref, out_w, out_h);
  return pick;
}

RgbImage crop_background(const BackgroundCorpus& corpus, const BackgroundRef& ref, int out_w, int out_h) {
  if (ref.is_plain()) return plain(out_w, out_h);
  const int i = corpus.find(ref.image_id);
  if (i < 0) throw Error("background image not in corpus: " + ref.image_id);
  const auto& src = corpus.images[static_cast<std::size_t>(i)];
  const CropRect r{ref.x, ref.y, ref.w, ref.h};
  if (r.w < 1 || r.h < 1 || r.x + r.w > src.width() || r.y + r.h > src.height())
    throw Error("background crop outside image: " + ref.to_string());
  return resize(crop(src, r), out_w, out_h);
}

RgbImage composite(const ImageBuffer& fg, const RgbImage& bg) {
  if (fg.width() != bg.width() || fg.height() != bg.height()) throw Error("composite: image dimensions differ");
  RgbImage out(bg.width(), bg.height());
  const auto alpha = fg.pixels().col(3);
  for (int c = 0; c < 3; ++c)
    out.pixels().col(c) = alpha * fg.pixels().col(c) + (1.0f - alpha) * bg.pixels().col(c);
  return out;
}

ColorBias derive_color_bias(int camera_id, std::uint64_t global_seed, double beta) {
  if (!(beta >= 0.0 && beta <= 0.5)) throw ConfigError("beta must lie in [0, 0.5]");
  Rng rng(hash_words({global_seed, static_cast<std::uint64_t>(camera_id), hash_text("color_bias")}));
  ColorBias bias;
  for (int c = 0; c < 3; ++c) bias.gains[c] = 1.0 + beta * (2.0 * rng.uniform01() - 1.0);
  return bias;
}

namespace {

// Row i holds the normalized triangle-filter weights of output sample i.
Eigen::SparseMatrix<float, Eigen::RowMajor> resample_weights(int in, int out) {
  const double scale = static_cast<double>(in) / out;
  const double support = std::max(scale, 1.0);
  std::vector<Eigen::Triplet<float>> entries;
  std::vector<double> w;
  for (int i = 0; i < out; ++i) {
    const double center = (i + 0.5) * scale;
    const int lo = std::max(0, static_cast<int>(std::floor(center - support)));
    const int hi = std::min(in - 1, static_cast<int>(std::ceil(center + support)));
    w.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    double total = 0.0;
    for (int j = lo; j <= hi; ++j) {
      const double t = std::abs(j + 0.5 - center) / support;
      total += w[static_cast<std::size_t>(j - lo)] = std::max(0.0, 1.0 - t);
    }
    for (int j = lo; j <= hi; ++j) {
      const double v = w[static_cast<std::size_t>(j - lo)] / total;
      if (v > 0.0) entries.emplace_back(i, j, static_cast<float>(v));
    }
  }
  Eigen::SparseMatrix<float, Eigen::RowMajor> m(out, in);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

}  // namespace

RgbImage resize(const RgbImage& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw Error("resize: dimensions must be positive");
  if (out_w == img.width() && out_h == img.height()) return img;
  const auto wx = resample_weights(img.width(), out_w);
  const auto wy = resample_weights(img.height(), out_h);
  RgbImage out(out_w, out_h);
  using Plane = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Plane in(img.height(), img.width());
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) in(y, x) = img.at(x, y, c);
    const Plane horizontal = in * wx.transpose();
    const Plane res = wy * horizontal;
    for (int y = 0; y < out_h; ++y)
      for (int x = 0; x < out_w; ++x) out.at(x, y, c) = std::clamp(res(y, x), 0.0f, 1.0f);
  }
  return out;
}

RgbImage degrade_resolution(const RgbImage& img, int working_height_px, int out_w, int out_h) {
  if (working_height_px < 1) throw Error("working height must be positive");
  if (working_height_px == img.height()) return resize(img, out_w, out_h);
  const int work_w = std::max(1, static_cast<int>(std::lround(double(img.width()) * working_height_px / img.height())));
  return resize(resize(img, work_w, working_height_px), out_w, out_h);
}

RgbImage synth_background(std::uint64_t seed, int width, int height) {
  Rng rng(seed);
  RgbImage img(width, height);
  // Low-contrast base gradient.
  const Eigen::Array3f base0(rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7));
  const Eigen::Array3f base1(rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7));
  for (int y = 0; y < height; ++y) {
    const float t = static_cast<float>(y) / height;
    for (int x = 0; x < width; ++x) img.pixel(x, y) = (base0 * (1 - t) + base1 * t).transpose();
  }
  // Blocks of small size and broad luminance: windows, tiles, foliage.
  const int blocks = width * height / 12;
  for (int b = 0; b < blocks; ++b) {
    const int bw = 1 + static_cast<int>(rng.index(8)), bh = 1 + static_cast<int>(rng.index(8));
    const int x0 = static_cast<int>(rng.index(static_cast<std::uint64_t>(width)));
    const int y0 = static_cast<int>(rng.index(static_cast<std::uint64_t>(height)));
    const float l = static_cast<float>(rng.uniform(0.05, 0.95));
    const Eigen::Array3f tint(rng.uniform(0.8, 1.2), rng.uniform(0.8, 1.2), rng.uniform(0.8, 1.2));
    const Eigen::Array3f color = (tint * l).min(1.0f);
    for (int y = y0; y < std::min(height, y0 + bh); ++y)
      for (int x = x0; x < std::min(width, x0 + bw); ++x) img.pixel(x, y) = color.transpose();
  }
  return img;
}

}  // namespace tagforge
