#pragma once

// Concentrations, the histogram spectrum f*(alpha), the thermodynamic
// (Lagrangian) spectrum f(alpha) and the bi-multifractal split.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfcrash/cantordust.hpp"

namespace mfcrash {

struct AlphaEntry {
  std::size_t box{0};
  std::uint64_t weight{0};
  double probability{0.0};
  double alpha{0.0};
};

struct AlphaList {
  std::vector<AlphaEntry> entries;  // ascending box index, occupied boxes only
  std::size_t box_count{0};

  double box_width() const { return 1.0 / static_cast<double>(box_count); }
  // log(l) with l = 1/L, taken as -log(L) so uniform covers give alpha == 1 exactly.
  double log_width() const { return -std::log(static_cast<double>(box_count)); }
};

struct AlphaBin {
  double alpha_lo{0.0};
  double alpha_hi{0.0};
  std::vector<AlphaEntry> members;

  std::size_t count() const { return members.size(); }
  std::optional<double> f_star;       // log N / log(1/l), absent for empty bins
  std::optional<double> mean_weight;  // mean raw box weight of the members
};

struct HistogramSpectrum {
  std::vector<AlphaBin> bins;
  std::size_t box_count{0};

  double box_width() const { return 1.0 / static_cast<double>(box_count); }
  /// Bin holding `alpha`, using the same edge rule as the binning itself.
  std::optional<std::size_t> bin_of(double alpha) const;
};

struct ThermoSample {
  double q{0.0};
  double tau{0.0};
  double alpha{0.0};
  double f{0.0};
};

struct ThermoSpectrum {
  std::vector<ThermoSample> samples;  // ascending q
  std::size_t box_count{0};

  std::optional<ThermoSample> at(double q) const {
    for (const auto& s : samples)
      if (std::abs(s.q - q) <= 1e-12) return s;
    return std::nullopt;
  }
};

struct BiMultifractalSplit {
  HistogramSpectrum f1;  // alpha <= alpha1 side (plus nearer half of the gap)
  HistogramSpectrum f2;  // alpha >= alpha0 side (plus nearer half of the gap)
  double alpha1{0.0};    // alpha(q = 1)
  double alpha0{0.0};    // alpha(q = 0)
};

inline AlphaList alphas(const BoxCover& c) {
  if (c.box_count < 2) throw std::invalid_argument("alphas: need at least 2 boxes");
  const std::uint64_t total = std::accumulate(c.weights.begin(), c.weights.end(), std::uint64_t{0});
  if (total == 0) throw std::invalid_argument("alphas: all boxes empty");
  AlphaList out;
  out.box_count = c.box_count;
  const double log_l = out.log_width();
  for (std::size_t i = 0; i < c.weights.size(); ++i) {
    if (c.weights[i] == 0) continue;
    const double p = static_cast<double>(c.weights[i]) / static_cast<double>(total);
    out.entries.push_back({i, c.weights[i], p, std::log(p) / log_l});
  }
  return out;
}

inline std::size_t default_bin_count(std::size_t box_count) {
  if (box_count < 4) throw std::invalid_argument("default_bin_count: need L >= 4");
  return isqrt(box_count);
}

namespace detail {

inline std::size_t alpha_bin_index(double a, double lo, double width, std::size_t B) {
  if (width <= 0.0) return 0;
  const double t = std::floor((a - lo) / width);
  if (t <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(t), B - 1);
}

inline void finish_bin(AlphaBin& b, double log_inv_l) {
  if (b.members.empty()) return;
  b.f_star = std::log(static_cast<double>(b.members.size())) / log_inv_l;
  double sum = 0.0;
  for (const auto& m : b.members) sum += static_cast<double>(m.weight);
  b.mean_weight = sum / static_cast<double>(b.members.size());
}

// Equal-width bins over the entries' own alpha range. A zero range collapses
// to a single zero-width bin.
inline HistogramSpectrum bin_entries(const std::vector<AlphaEntry>& entries, std::size_t B,
                                     std::size_t box_count) {
  HistogramSpectrum h;
  h.box_count = box_count;
  if (entries.empty()) return h;
  const auto [mn, mx] = std::minmax_element(
      entries.begin(), entries.end(),
      [](const AlphaEntry& a, const AlphaEntry& b) { return a.alpha < b.alpha; });
  const double lo = mn->alpha;
  const double hi = mx->alpha;
  const double log_inv_l = std::log(static_cast<double>(box_count));
  if (!(hi > lo)) B = 1;
  const double width = (hi - lo) / static_cast<double>(B);
  h.bins.resize(B);
  for (std::size_t i = 0; i < B; ++i) {
    h.bins[i].alpha_lo = lo + width * static_cast<double>(i);
    h.bins[i].alpha_hi = i + 1 == B ? hi : lo + width * static_cast<double>(i + 1);
  }
  for (const auto& e : entries) h.bins[alpha_bin_index(e.alpha, lo, width, B)].members.push_back(e);
  for (auto& b : h.bins) finish_bin(b, log_inv_l);
  return h;
}

}  // namespace detail

inline std::optional<std::size_t> HistogramSpectrum::bin_of(double alpha) const {
  if (bins.empty()) return std::nullopt;
  const double lo = bins.front().alpha_lo;
  const double hi = bins.back().alpha_hi;
  if (alpha < lo || alpha > hi) return std::nullopt;
  const double width = (hi - lo) / static_cast<double>(bins.size());
  return detail::alpha_bin_index(alpha, lo, width, bins.size());
}

/// B equal-width bins over [alpha_min, alpha_max]; lower edges closed, the
/// top bin closed above, edge ties go to the higher bin.
inline HistogramSpectrum histogram_spectrum(const AlphaList& a, std::size_t B) {
  if (B < 2) throw std::invalid_argument("histogram_spectrum: need at least 2 bins");
  if (a.entries.size() < 2) throw std::invalid_argument("histogram_spectrum: need at least 2 alphas");
  const auto [mn, mx] = std::minmax_element(
      a.entries.begin(), a.entries.end(),
      [](const AlphaEntry& x, const AlphaEntry& y) { return x.alpha < y.alpha; });
  if (!(mx->alpha > mn->alpha))
    throw std::domain_error("histogram_spectrum: monofractal: zero alpha range");
  return detail::bin_entries(a.entries, B, a.box_count);
}

inline std::vector<double> integer_q_grid(int q_lo, int q_hi) {
  std::vector<double> g;
  for (int q = q_lo; q <= q_hi; ++q) g.push_back(q);
  return g;
}

/// Direct moment evaluation of tau(q), alpha(q) = tau'(q) and
/// f(q) = q alpha(q) - tau(q). Moments are shifted by the largest exponent
/// and summed in ascending box order.
inline ThermoSpectrum thermo_spectrum(const AlphaList& a, const std::vector<double>& q_grid) {
  if (a.entries.size() < 2)
    throw std::invalid_argument("thermo_spectrum: need at least 2 occupied boxes");
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    if (!std::isfinite(q_grid[i])) throw std::invalid_argument("thermo_spectrum: non-finite q");
    if (i > 0 && !(q_grid[i] > q_grid[i - 1]))
      throw std::invalid_argument("thermo_spectrum: q grid must be strictly increasing");
  }
  const double log_l = a.log_width();
  const std::size_t n = a.entries.size();
  std::vector<double> log_p(n);
  for (std::size_t i = 0; i < n; ++i) log_p[i] = std::log(a.entries[i].probability);

  ThermoSpectrum out;
  out.box_count = a.box_count;
  out.samples.reserve(q_grid.size());
  std::vector<double> s(n);
  for (double q : q_grid) {
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = q * log_p[i];
      shift = std::max(shift, s[i]);
    }
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += std::exp(s[i] - shift);
    const double log_z = std::log(z);
    double alpha_num = 0.0;
    double f_num = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double log_m = s[i] - shift - log_z;
      const double m = std::exp(log_m);
      alpha_num += m * log_p[i];
      f_num += m * log_m;
    }
    ThermoSample t{q, (shift + log_z) / log_l, alpha_num / log_l, f_num / log_l};
    if (!std::isfinite(t.tau) || !std::isfinite(t.alpha) || !std::isfinite(t.f))
      throw std::overflow_error("thermo_spectrum: non-finite moments at q=" + std::to_string(q));
    out.samples.push_back(t);
  }
  return out;
}

/// Largest |alpha(q) - (tau(q+h) - tau(q-h)) / 2h| over interior samples.
inline double legendre_check(const ThermoSpectrum& t) {
  const auto& s = t.samples;
  if (s.size() < 3) throw std::invalid_argument("legendre_check: need at least 3 samples");
  const double h = s[1].q - s[0].q;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (std::abs((s[i + 1].q - s[i].q) - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw std::invalid_argument("legendre_check: non-uniform q grid");
  }
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const double slope = (s[i + 1].tau - s[i - 1].tau) / (2.0 * h);
    worst = std::max(worst, std::abs(s[i].alpha - slope));
  }
  return worst;
}

/// Lagrangian f at `alpha`, linear between samples ordered by alpha and held
/// constant beyond the sampled ends.
inline double interpolate_f(const ThermoSpectrum& t, double alpha) {
  if (t.samples.empty()) throw std::invalid_argument("interpolate_f: empty spectrum");
  std::vector<ThermoSample> s = t.samples;
  std::sort(s.begin(), s.end(),
            [](const ThermoSample& x, const ThermoSample& y) { return x.alpha < y.alpha; });
  if (alpha <= s.front().alpha) return s.front().f;
  if (alpha >= s.back().alpha) return s.back().f;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (alpha <= s[i].alpha) {
      const double span = s[i].alpha - s[i - 1].alpha;
      if (span <= 0.0) return std::max(s[i].f, s[i - 1].f);
      const double u = (alpha - s[i - 1].alpha) / span;
      return s[i - 1].f + u * (s[i].f - s[i - 1].f);
    }
  }
  return s.back().f;
}

inline BiMultifractalSplit split_bimultifractal(const HistogramSpectrum& hist,
                                                const ThermoSpectrum& thermo) {
  const auto q1 = thermo.at(1.0);
  const auto q0 = thermo.at(0.0);
  if (!q1 || !q0) throw std::invalid_argument("split_bimultifractal: thermo lacks q=0 or q=1");
  if (hist.bins.empty()) throw std::invalid_argument("split_bimultifractal: empty histogram");
  BiMultifractalSplit out;
  out.alpha1 = q1->alpha;
  out.alpha0 = q0->alpha;
  if (!(out.alpha1 < out.alpha0))
    throw std::domain_error("split_bimultifractal: degenerate split (uniform-like measure)");

  const double mid = 0.5 * (out.alpha1 + out.alpha0);
  std::vector<AlphaEntry> left;
  std::vector<AlphaEntry> right;
  for (const auto& b : hist.bins) {
    for (const auto& m : b.members) {
      if (m.alpha <= out.alpha1 || (m.alpha < out.alpha0 && m.alpha < mid))
        left.push_back(m);
      else
        right.push_back(m);
    }
  }
  const std::size_t half = std::max<std::size_t>(2, hist.bins.size() / 2);
  out.f1 = detail::bin_entries(left, half, hist.box_count);
  out.f2 = detail::bin_entries(right, half, hist.box_count);
  return out;
}

/// Largest amount by which a split-side f* exceeds the Lagrangian f at the
/// bin midpoint; <= 0 means f(alpha) envelopes both sides.
inline double envelope_excess(const BiMultifractalSplit& split, const ThermoSpectrum& thermo) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto* side : {&split.f1, &split.f2}) {
    for (const auto& b : side->bins) {
      if (!b.f_star) continue;
      worst = std::max(worst, *b.f_star - interpolate_f(thermo, 0.5 * (b.alpha_lo + b.alpha_hi)));
    }
  }
  return worst;
}

}  // namespace mfcrash
