#pragma once

// End-to-end analysis of one window: dust -> cover -> spectra -> indicators.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfcrash/cantordust.hpp"
#include "mfcrash/indicators.hpp"
#include "mfcrash/signal_ingest.hpp"
#include "mfcrash/spectra.hpp"

namespace mfcrash {

struct AnalysisConfig {
  std::optional<std::size_t> boxes;  // default floor(sqrt(T))
  std::optional<std::size_t> bins;   // default floor(sqrt(L))
  int q_lo{-10};
  int q_hi{10};
  double q_step{1.0};
  std::uint64_t iso_weight{1};
  double top_fraction{0.25};
  Thresholds thresholds;

  void validate() const {
    if (!(q_lo <= 0 && q_hi >= 1)) throw std::invalid_argument("q range must satisfy q_lo <= 0 < 1 <= q_hi");
    if (!(q_step > 0.0)) throw std::invalid_argument("q step must be positive");
    if (boxes && *boxes < 4) throw std::invalid_argument("boxes must be at least 4");
    if (bins && *bins < 2) throw std::invalid_argument("bins must be at least 2");
  }

  std::vector<double> q_grid() const {
    std::vector<double> g;
    const auto n = static_cast<long>(std::llround((q_hi - q_lo) / q_step));
    for (long i = 0; i <= n; ++i) g.push_back(q_lo + static_cast<double>(i) * q_step);
    return g;
  }

  bool integer_grid() const { return q_step == 1.0; }
};

struct AnalysisResult {
  std::string label;
  std::size_t window{0};
  std::size_t box_count{0};
  std::size_t bin_count{0};
  std::optional<TrimReport> trim;
  BoxCover raw_cover;
  BoxCover pruned_cover;
  AlphaList raw_alphas;
  AlphaList pruned_alphas;
  ThermoSpectrum thermo;  // unpruned path
  std::optional<double> legendre_deviation;
  std::optional<HistogramSpectrum> histogram;  // pruned path
  std::optional<BiMultifractalSplit> split;
  std::optional<double> envelope_excess;
  std::optional<InstabilityProfile> profile;
  std::optional<double> gap;
  double asymmetry{0.0};
  Dispersion dispersion;
  WarningReport report;
  std::vector<std::string> skipped;  // stage: reason
};

/// Analysis of a dust already normalized onto [0,1] (cascade samples, or the
/// output of trim_and_normalize). `window` is the source sample size.
inline AnalysisResult analyze_normalized(const PriceDust& unit_dust, std::size_t window,
                                         std::size_t box_count, const AnalysisConfig& cfg) {
  cfg.validate();
  AnalysisResult r;
  r.window = window;
  r.box_count = box_count;
  r.raw_cover = cover(unit_dust, box_count);
  r.pruned_cover = prune_isolated(r.raw_cover, cfg.iso_weight);
  r.bin_count = cfg.bins ? *cfg.bins : default_bin_count(box_count);

  r.raw_alphas = alphas(r.raw_cover);
  r.pruned_alphas = alphas(r.pruned_cover);
  r.thermo = thermo_spectrum(r.raw_alphas, cfg.q_grid());
  r.legendre_deviation = legendre_check(r.thermo);

  try {
    r.histogram = histogram_spectrum(r.pruned_alphas, r.bin_count);
  } catch (const std::exception& e) {
    r.skipped.push_back(std::string("histogram: ") + e.what());
  }
  if (r.histogram) {
    try {
      r.split = split_bimultifractal(*r.histogram, r.thermo);
      r.envelope_excess = envelope_excess(*r.split, r.thermo);
    } catch (const std::exception& e) {
      r.skipped.push_back(std::string("split: ") + e.what());
    }
    r.profile = instability_profile(*r.histogram, r.thermo);
  }
  try {
    r.gap = gap_ratio(r.thermo);
  } catch (const std::exception& e) {
    r.skipped.push_back(std::string("gap: ") + e.what());
  }
  r.asymmetry = asymmetry(r.thermo);
  r.dispersion = dispersion(r.raw_cover, r.thermo, cfg.top_fraction);
  r.report = compose_report(r.profile, r.gap, r.asymmetry, r.dispersion, cfg.thresholds);
  return r;
}

inline AnalysisResult analyze_signal(const Signal& signal, const AnalysisConfig& cfg) {
  cfg.validate();
  const std::size_t T = signal.size();
  const std::size_t L = cfg.boxes ? *cfg.boxes : default_box_count(T);
  const auto trimmed = trim_and_normalize(project(signal), L);
  auto r = analyze_normalized(trimmed.dust, T, L, cfg);
  r.trim = trimmed.report;
  r.label = signal.label;
  return r;
}

}  // namespace mfcrash
