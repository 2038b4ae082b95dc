#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagforge/error.hpp"
#include "tagforge/estimation.hpp"
#include "tagforge/rng.hpp"
#include "tagforge/scene_model.hpp"

namespace tagforge {

/// Raw per-image values of one option, in input order.
struct EmpiricalDistribution {
  OptionKey key = OptionKey::gamma;
  std::vector<double> values;
  std::string source;

  /// Throws Error when empty or a value is out of the option range.
  void validate() const;
  friend bool operator==(const EmpiricalDistribution&, const EmpiricalDistribution&) = default;
};

/// Per-option distributions of a target domain; what a data owner hands back.
struct TargetProfile {
  std::map<OptionKey, EmpiricalDistribution> entries;
  std::uint64_t seed = 0;
  std::string created;  // ISO-8601 UTC, informational
  std::string estimator_version;

  [[nodiscard]] const EmpiricalDistribution* find(OptionKey key) const {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  }
  friend bool operator==(const TargetProfile&, const TargetProfile&) = default;
};

/// values[i] = predict(est, images[i]).
[[nodiscard]] EmpiricalDistribution build_distribution(const Estimator& est, const std::vector<RgbImage>& images,
                                                       std::string source = {});

/// W1 as the integral of |F_a - F_b| over the merged support.
template <typename Scalar>
[[nodiscard]] Scalar wasserstein1_cdf(std::span<const Scalar> a, std::span<const Scalar> b) {
  if (a.empty() || b.empty()) throw Error("wasserstein1: empty sample");
  std::vector<Scalar> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const Scalar na = static_cast<Scalar>(sa.size()), nb = static_cast<Scalar>(sb.size());
  std::size_t ia = 0, ib = 0;
  Scalar x = std::min(sa.front(), sb.front());
  Scalar total = 0;
  while (ia < sa.size() || ib < sb.size()) {
    // Advance past every sample equal to x, then integrate up to the next sample.
    while (ia < sa.size() && sa[ia] <= x) ++ia;
    while (ib < sb.size() && sb[ib] <= x) ++ib;
    if (ia == sa.size() && ib == sb.size()) break;
    const Scalar next = std::min(ia < sa.size() ? sa[ia] : sb[ib], ib < sb.size() ? sb[ib] : sa[ia]);
    total += std::abs(static_cast<Scalar>(ia) / na - static_cast<Scalar>(ib) / nb) * (next - x);
    x = next;
  }
  return total;
}

/// W1 for equal sample counts: mean |a_(i) - b_(i)| over sorted samples.
template <typename Scalar>
[[nodiscard]] Scalar wasserstein1_sorted(std::span<const Scalar> a, std::span<const Scalar> b) {
  if (a.empty() || a.size() != b.size()) throw Error("wasserstein1_sorted: samples must be non-empty and equal-sized");
  std::vector<Scalar> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  Scalar total = 0;
  for (std::size_t i = 0; i < sa.size(); ++i) total += std::abs(sa[i] - sb[i]);
  return total / static_cast<Scalar>(sa.size());
}

/// Throws Error when the keys differ.
[[nodiscard]] double wasserstein1(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// One stored value, uniformly.
[[nodiscard]] inline double sample_option(const EmpiricalDistribution& dist, Rng& rng) {
  if (dist.values.empty()) throw Error("sample_option: empty distribution");
  return dist.values[rng.index(dist.values.size())];
}

/// Kolmogorov-Smirnov statistic of `values` against uniform[lo, hi].
[[nodiscard]] double ks_uniform_statistic(std::vector<double> values, double lo, double hi);

inline constexpr int kProfileFormatVersion = 1;

[[nodiscard]] std::string serialize_profile(const TargetProfile& profile);
/// Throws ParseError with the line of a malformed header, unknown key, out-of-range
/// or missing value.
[[nodiscard]] TargetProfile parse_profile(std::string_view text);
void save_profile(const TargetProfile& profile, const std::string& path);
[[nodiscard]] TargetProfile load_profile(const std::string& path);

struct Histogram {
  double lo = 0.0, hi = 1.0;
  std::vector<std::size_t> counts;
};

inline constexpr int kDefaultHistogramBins = 18;

/// Equal-width bins over the option's declared range (or [lo, hi] when given).
[[nodiscard]] Histogram histogram(const EmpiricalDistribution& dist, int bins = kDefaultHistogramBins);
[[nodiscard]] Histogram histogram(std::span<const double> values, double lo, double hi, int bins);
/// One text line per bin: range, count and a bar.
[[nodiscard]] std::string format_histogram(const Histogram& h, int bar_width = 40);

}  // namespace tagforge
