#pragma once

// Early-warning indicators: instability quotient and its inflection, the
// q=1/q=0 gap, spectral asymmetry and top-of-range dispersion.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mfcrash/cantordust.hpp"
#include "mfcrash/spectra.hpp"

namespace mfcrash {

struct ProfileRow {
  std::size_t bin{0};
  std::size_t count{0};
  double mean_weight{0.0};
  double Q{0.0};
};

struct InstabilityProfile {
  std::vector<ProfileRow> rows;  // ascending alpha, alpha_min .. bin of alpha(q=0)
  std::optional<double> P_geometric;
  std::optional<double> P_arithmetic;
  std::optional<std::size_t> inflection_index;  // position in rows
  // Bins holding alpha(q=1) and alpha(q=0): where growth of Q stalls.
  std::optional<std::size_t> stall_begin;
  std::optional<std::size_t> stall_end;
};

/// First interior row where the second difference of Q changes sign.
inline std::optional<std::size_t> detect_inflection(const std::vector<double>& Q) {
  if (Q.size() < 3) return std::nullopt;
  std::optional<int> prev_sign;
  for (std::size_t i = 1; i + 1 < Q.size(); ++i) {
    const double d2 = Q[i + 1] - 2.0 * Q[i] + Q[i - 1];
    const int sign = d2 > 0.0 ? 1 : (d2 < 0.0 ? -1 : 0);
    if (sign == 0) continue;
    if (prev_sign && *prev_sign != sign) return i;
    prev_sign = sign;
  }
  return std::nullopt;
}

inline std::optional<std::size_t> detect_inflection(const InstabilityProfile& p) {
  std::vector<double> Q;
  for (const auto& r : p.rows) Q.push_back(r.Q);
  return detect_inflection(Q);
}

/// Q = N_alpha / mean box weight over the bins from alpha_min up to the bin
/// containing alpha(q=0). Empty bins carry no Q and are skipped.
inline InstabilityProfile instability_profile(const HistogramSpectrum& hist,
                                              const ThermoSpectrum& thermo) {
  const auto s0 = thermo.at(0.0);
  if (!s0) throw std::invalid_argument("instability_profile: thermo lacks q=0");
  if (hist.bins.empty()) throw std::invalid_argument("instability_profile: empty histogram");
  const auto last = hist.bin_of(std::clamp(s0->alpha, hist.bins.front().alpha_lo,
                                           hist.bins.back().alpha_hi));
  InstabilityProfile p;
  for (std::size_t i = 0; i <= *last; ++i) {
    const auto& b = hist.bins[i];
    if (b.members.empty() || !b.mean_weight || *b.mean_weight <= 0.0) continue;
    p.rows.push_back({i, b.count(), *b.mean_weight,
                      static_cast<double>(b.count()) / *b.mean_weight});
  }
  if (p.rows.size() >= 2) {
    double log_sum = 0.0;
    double sum = 0.0;
    for (std::size_t i = 1; i < p.rows.size(); ++i) {
      const double ratio = p.rows[i - 1].mean_weight / p.rows[i].mean_weight;
      log_sum += std::log(ratio);
      sum += ratio;
    }
    const double n = static_cast<double>(p.rows.size() - 1);
    p.P_geometric = std::exp(log_sum / n);
    p.P_arithmetic = sum / n;
  }
  p.inflection_index = detect_inflection(p);
  p.stall_end = last;
  if (const auto s1 = thermo.at(1.0))
    p.stall_begin = hist.bin_of(std::clamp(s1->alpha, hist.bins.front().alpha_lo,
                                           hist.bins.back().alpha_hi));
  return p;
}

/// Distance between the q=1 and q=0 points of the (alpha, f) curve, in units
/// of the median step between consecutive integer-q samples with q >= 1.
inline double gap_ratio(const ThermoSpectrum& t) {
  const auto s0 = t.at(0.0);
  const auto s1 = t.at(1.0);
  if (!s0 || !s1) throw std::invalid_argument("gap_ratio: thermo lacks q=0 or q=1");
  std::vector<double> steps;
  for (const auto& s : t.samples) {
    if (s.q < 1.0 || std::abs(s.q - std::round(s.q)) > 1e-12) continue;
    if (const auto next = t.at(s.q + 1.0))
      steps.push_back(std::hypot(next->alpha - s.alpha, next->f - s.f));
  }
  if (steps.empty()) throw std::invalid_argument("gap_ratio: need integer samples q >= 1, 2");
  std::sort(steps.begin(), steps.end());
  const std::size_t n = steps.size();
  const double median = n % 2 ? steps[n / 2] : 0.5 * (steps[n / 2 - 1] + steps[n / 2]);
  if (!(median > 0.0)) throw std::domain_error("gap_ratio: degenerate branch");
  return std::hypot(s1->alpha - s0->alpha, s1->f - s0->f) / median;
}

/// f at the most negative q minus f at the most positive q.
inline double asymmetry(const ThermoSpectrum& t) {
  if (t.samples.empty()) throw std::invalid_argument("asymmetry: empty spectrum");
  return t.samples.front().f - t.samples.back().f;
}

struct Dispersion {
  std::size_t count{0};    // isolated occupied boxes in the top zone
  double f_alpha_max{0.0};  // Lagrangian f at the most negative q
};

/// Requires the unpruned cover: pruning removes exactly the boxes counted here.
inline Dispersion dispersion(const BoxCover& c, const ThermoSpectrum& unpruned,
                             double top_fraction = 0.25) {
  if (c.pruned) throw std::invalid_argument("dispersion: cover must not be pruned");
  if (unpruned.samples.empty()) throw std::invalid_argument("dispersion: empty spectrum");
  const auto& w = c.weights;
  const std::size_t L = w.size();
  const auto first = static_cast<std::size_t>(
      std::floor(static_cast<double>(L) * (1.0 - top_fraction)));
  Dispersion d;
  for (std::size_t i = first; i < L; ++i) {
    if (w[i] == 0) continue;
    const bool left_empty = i == 0 || w[i - 1] == 0;
    const bool right_empty = i + 1 == L || w[i + 1] == 0;
    if (left_empty && right_empty) ++d.count;
  }
  d.f_alpha_max = unpruned.samples.front().f;
  return d;
}

struct Thresholds {
  double gap{3.0};
  double asymmetry{0.1};
  double dispersion{1.0};   // flagged when the isolated-box count exceeds this
  double instability{0.0};  // inflection flagged only if max Q exceeds this
};

struct WarningReport {
  std::optional<double> gap_ratio;
  double asymmetry{0.0};
  std::size_t dispersion_count{0};
  double f_alpha_max{0.0};
  bool q_inflection_present{false};
  double max_Q{0.0};

  bool inflection_flag{false};
  bool gap_flag{false};
  bool asymmetry_flag{false};
  bool dispersion_flag{false};
  Thresholds thresholds;

  bool any_flag() const { return inflection_flag || gap_flag || asymmetry_flag || dispersion_flag; }
};

inline WarningReport compose_report(const std::optional<InstabilityProfile>& profile,
                                    std::optional<double> gap, double asym,
                                    const Dispersion& disp, const Thresholds& th) {
  WarningReport r;
  r.thresholds = th;
  r.gap_ratio = gap;
  r.asymmetry = asym;
  r.dispersion_count = disp.count;
  r.f_alpha_max = disp.f_alpha_max;
  if (profile) {
    r.q_inflection_present = profile->inflection_index.has_value();
    for (const auto& row : profile->rows) r.max_Q = std::max(r.max_Q, row.Q);
  }
  r.inflection_flag = r.q_inflection_present && r.max_Q > th.instability;
  r.gap_flag = gap && *gap > th.gap;
  r.asymmetry_flag = asym > th.asymmetry;
  r.dispersion_flag = static_cast<double>(disp.count) > th.dispersion;
  return r;
}

}  // namespace mfcrash
