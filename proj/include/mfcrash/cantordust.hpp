#pragma once

// Projection of a price signal onto the price axis and its box cover.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mfcrash/signal_ingest.hpp"

namespace mfcrash {

struct PriceDust {
  std::vector<double> values;
  double p_minus{0.0};
  double p_plus{0.0};
};

struct TrimReport {
  std::size_t heavy_cluster_size{0};  // boxes within 50% of the maximal weight
  std::size_t discarded_points{0};
  double cut_price{0.0};
  std::size_t iterations{0};
};

struct TrimResult {
  PriceDust dust;  // normalized: retained minimum at 0, p_plus at 1
  TrimReport report;
};

struct BoxCover {
  std::size_t box_count{0};
  std::vector<std::uint64_t> weights;  // bottom (cheapest) to top
  std::uint64_t kept{0};
  bool pruned{false};

  double box_width() const { return 1.0 / static_cast<double>(box_count); }
  std::size_t occupied() const {
    return static_cast<std::size_t>(
        std::count_if(weights.begin(), weights.end(), [](auto w) { return w > 0; }));
  }
};

inline PriceDust make_dust(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("cantordust: empty dust");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  PriceDust d;
  d.p_minus = *lo;
  d.p_plus = *hi;
  d.values = std::move(values);
  return d;
}

inline PriceDust project(const Signal& signal) {
  if (signal.points.empty()) throw std::invalid_argument("project: empty signal");
  std::vector<double> v;
  v.reserve(signal.points.size());
  for (const auto& p : signal.points) v.push_back(p.close);
  std::sort(v.begin(), v.end());
  return make_dust(std::move(v));
}

inline std::size_t isqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

inline std::size_t default_box_count(std::size_t total) {
  if (total < 4) throw std::invalid_argument("default_box_count: need at least 4 points");
  return isqrt(total);
}

namespace detail {

// Box of `v` in an L-box cover of [lo, hi]; the top box is closed.
inline std::size_t box_index(double v, double lo, double hi, std::size_t L) {
  const double t = (v - lo) / (hi - lo);
  const auto i = static_cast<std::size_t>(std::max(0.0, std::floor(t * static_cast<double>(L))));
  return std::min(i, L - 1);
}

}  // namespace detail

/// Drops the "prices going down" floor below the heaviest box and maps the
/// rest onto [0,1]. The cut is repeated on the retained range until the
/// heaviest provisional box is the bottom one, so the result is a fixed point.
inline TrimResult trim_and_normalize(const PriceDust& dust, std::size_t L) {
  if (L < 2) throw std::invalid_argument("trim_and_normalize: need L >= 2");
  if (!(dust.p_plus > dust.p_minus)) throw std::invalid_argument("trim_and_normalize: zero price range");

  std::vector<double> kept = dust.values;
  std::sort(kept.begin(), kept.end());
  const double hi = dust.p_plus;
  TrimReport report;
  report.cut_price = kept.front();

  std::vector<std::uint64_t> w(L);
  for (;;) {
    ++report.iterations;
    const double lo = kept.front();
    if (!(hi > lo)) throw std::runtime_error("trim_and_normalize: zero price range after trim");
    std::fill(w.begin(), w.end(), 0);
    for (double v : kept) ++w[detail::box_index(v, lo, hi, L)];
    const auto heaviest = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    if (heaviest == 0) break;
    const double cut = lo + (hi - lo) * static_cast<double>(heaviest) / static_cast<double>(L);
    // Members of the heaviest box sit at or above the edge by box_index; cut by index
    // rather than by `cut` so rounding cannot split the box.
    const auto first = std::find_if(kept.begin(), kept.end(), [&](double v) {
      return detail::box_index(v, lo, hi, L) >= heaviest;
    });
    report.discarded_points += static_cast<std::size_t>(first - kept.begin());
    report.cut_price = cut;
    kept.erase(kept.begin(), first);
  }

  const auto wmax = *std::max_element(w.begin(), w.end());
  report.heavy_cluster_size = static_cast<std::size_t>(
      std::count_if(w.begin(), w.end(), [&](auto x) { return 2 * x >= wmax; }));

  const double lo = kept.front();
  TrimResult out;
  out.report = report;
  std::vector<double> norm;
  norm.reserve(kept.size());
  for (double v : kept) norm.push_back((v - lo) / (hi - lo));
  out.dust = make_dust(std::move(norm));
  return out;
}

inline BoxCover cover(const PriceDust& dust, std::size_t L) {
  if (L < 2) throw std::invalid_argument("cover: need L >= 2");
  BoxCover c;
  c.box_count = L;
  c.weights.assign(L, 0);
  for (double v : dust.values) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("cover: value outside [0,1]");
    ++c.weights[detail::box_index(v, 0.0, 1.0, L)];
  }
  c.kept = dust.values.size();
  return c;
}

/// Zeroes occupied boxes of weight <= iso_weight whose neighbours are all
/// empty. Boxes holding the maximal weight are never zeroed.
inline BoxCover prune_isolated(const BoxCover& in, std::uint64_t iso_weight = 1) {
  BoxCover out = in;
  out.pruned = true;
  const auto& w = in.weights;
  const std::size_t L = w.size();
  if (L == 0) return out;
  const auto wmax = *std::max_element(w.begin(), w.end());
  for (std::size_t i = 0; i < L; ++i) {
    if (w[i] == 0 || w[i] > iso_weight || w[i] == wmax) continue;
    const bool left_empty = i == 0 || w[i - 1] == 0;
    const bool right_empty = i + 1 == L || w[i + 1] == 0;
    if (left_empty && right_empty) {
      out.kept -= w[i];
      out.weights[i] = 0;
    }
  }
  return out;
}

}  // namespace mfcrash
