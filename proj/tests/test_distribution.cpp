#include <cmath>

#include "doctest.h"
#include "tagforge/distribution.hpp"
#include "tagforge/imageproc.hpp"

using namespace tagforge;

namespace {

EmpiricalDistribution dist(std::vector<double> v, OptionKey key = OptionKey::camera_depression_deg) {
  return {key, std::move(v), "test"};
}

std::vector<double> random_values(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("wasserstein1 examples") {
  const auto d = dist({0.0, 5.0, 7.5, 7.5, 30.0});
  CHECK(wasserstein1(d, d) == 0.0);
  CHECK(wasserstein1(dist({0, 1, 2}), dist({1, 2, 3})) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(wasserstein1(dist({0, 0, 0, 0}), dist({0, 0, 0, 4})) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(wasserstein1(dist({0.0}), dist({2.0, 4.0})) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)wasserstein1(dist({1.0}), dist({1.0}, OptionKey::gamma)), Error);
}

TEST_CASE("wasserstein1 is a metric and the two algorithms agree") {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const auto n = 1 + rng.index(60);
    const auto a = dist(random_values(rng, n, -10, 80));
    const auto b = dist(random_values(rng, 1 + rng.index(60), -10, 80));
    const auto c = dist(random_values(rng, 1 + rng.index(60), -10, 80));
    CHECK(wasserstein1(a, b) == doctest::Approx(wasserstein1(b, a)).epsilon(1e-12));
    CHECK(wasserstein1(a, a) == 0.0);
    CHECK(wasserstein1(a, c) <= wasserstein1(a, b) + wasserstein1(b, c) + 1e-9);

    const double shift = rng.uniform(-5, 5);
    std::vector<double> moved = a.values;
    for (auto& v : moved) v += shift;
    CHECK(std::abs(wasserstein1_cdf<double>(a.values, moved) - std::abs(shift)) <= 1e-9);

    const auto e = random_values(rng, n, -10, 80);
    CHECK(std::abs(wasserstein1_cdf<double>(a.values, e) - wasserstein1_sorted<double>(a.values, e)) <= 1e-9);
  }
}

TEST_CASE("sample_option") {
  Rng rng(1);
  const auto single = dist({0.7}, OptionKey::gamma);
  for (int i = 0; i < 100; ++i) CHECK(sample_option(single, rng) == 0.7);

  Rng r1(5), r2(5);
  const auto d = dist({1, 2, 3, 4, 5});
  for (int i = 0; i < 100; ++i) CHECK(sample_option(d, r1) == sample_option(d, r2));

  Rng r3(12345);
  const auto coin = dist({0.0, 1.0});
  int ones = 0;
  for (int i = 0; i < 10000; ++i) ones += sample_option(coin, r3) == 1.0;
  CHECK(ones >= 4700);
  CHECK(ones <= 5300);
}

TEST_CASE("resampling converges to the target") {
  Rng rng(77);
  const auto target = dist(random_values(rng, 500, 35, 55));
  const double range = 80.0 - (-10.0);
  for (const int n : {100, 1000, 10000}) {
    Rng draw(2024);
    EmpiricalDistribution s{target.key, {}, "draws"};
    for (int i = 0; i < n; ++i) s.values.push_back(sample_option(target, draw));
    CHECK(wasserstein1(s, target) < 3.0 * range / std::sqrt(double(n)));
  }
}

TEST_CASE("profile text round trip and errors") {
  TargetProfile p;
  p.seed = 42;
  p.created = "2026-01-01T00:00:00Z";
  p.estimator_version = "1";
  p.entries[OptionKey::gamma] = dist({1.6, 1.0 / 3.0 + 1.2, 0.5}, OptionKey::gamma);
  p.entries[OptionKey::camera_depression_deg] = dist({45.0, 12.25});
  const auto back = parse_profile(serialize_profile(p));
  CHECK(back == p);

  auto text = serialize_profile(p);
  std::string out_of_range = text;
  out_of_range.replace(out_of_range.find("\n1.6\n"), 5, "\n9.5\n");
  CHECK_THROWS_WITH_AS((void)parse_profile(out_of_range), doctest::Contains("outside the range"), ParseError);

  CHECK_THROWS_WITH_AS((void)parse_profile("tagforge-profile v1\noption gamma\nsource x\ncount 0\nend\n"),
                       doctest::Contains("line 4"), ParseError);
  CHECK_THROWS_WITH_AS((void)parse_profile("tagforge-profile v1\noption warp\nsource x\ncount 1\n1\nend\n"),
                       doctest::Contains("unknown option key"), ParseError);
  CHECK_THROWS_AS((void)parse_profile("tagforge-profile v1\noption gamma\nsource x\ncount 2\n1\nend\n"), ParseError);
  CHECK_THROWS_AS((void)parse_profile(""), ParseError);
  CHECK_THROWS_AS((void)parse_profile("tagforge-profile v1\n"), ParseError);
}

TEST_CASE("build_distribution keeps input order") {
  std::vector<std::pair<RgbImage, double>> labeled;
  for (int i = 0; i < 6; ++i)
    labeled.emplace_back(resize(synth_background(i, 40, 80), kOutputWidth, kOutputHeight), 0.5 + 0.2 * i);
  const auto est = fit(OptionKey::gamma, labeled, FeatureTag::luminance_histogram_32, 1);
  const auto one = build_distribution(est, {labeled[2].first});
  CHECK(one.values == std::vector<double>{labeled[2].second});
  const auto dup = build_distribution(est, {labeled[3].first, labeled[3].first, labeled[1].first});
  CHECK(dup.values == std::vector<double>{labeled[3].second, labeled[3].second, labeled[1].second});
  CHECK_THROWS_AS((void)build_distribution(est, {}), Error);
  CHECK_THROWS_WITH_AS((void)build_distribution(est, {labeled[0].first, RgbImage(10, 10)}),
                       doctest::Contains("image 1"), Error);
}

TEST_CASE("histogram") {
  const auto h = histogram(dist({-10.0, -5.5, 79.9, 80.0}), 18);
  REQUIRE(h.counts.size() == 18);
  CHECK(h.counts.front() == 2);
  CHECK(h.counts.back() == 2);
  CHECK(format_histogram(h).find('#') != std::string::npos);
}
