#pragma once

// CSV/JSON serialization of covers, spectra, profiles, reports and model
// tables. Floats are written with 12 significant digits.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "mfcrash/binomial_model.hpp"
#include "mfcrash/cantordust.hpp"
#include "mfcrash/indicators.hpp"
#include "mfcrash/pipeline.hpp"
#include "mfcrash/spectra.hpp"

namespace mfcrash::io {

using ordered_json = nlohmann::ordered_json;

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Value as it reads back from fmt(); keeps JSON output at 12 digits too.
inline double pinned(double v) { return std::strtod(fmt(v).c_str(), nullptr); }

template <typename T>
std::string fmt_opt(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>)
    return fmt(*v);
  else
    return std::to_string(*v);
}

inline ordered_json cover_to_json(const BoxCover& c) {
  ordered_json j;
  j["L"] = c.box_count;
  j["T_kept"] = c.kept;
  j["pruned"] = c.pruned;
  j["weights"] = c.weights;
  return j;
}

inline BoxCover cover_from_json(const ordered_json& j) {
  BoxCover c;
  c.box_count = j.at("L").get<std::size_t>();
  c.kept = j.at("T_kept").get<std::uint64_t>();
  c.pruned = j.value("pruned", false);
  c.weights = j.at("weights").get<std::vector<std::uint64_t>>();
  if (c.weights.size() != c.box_count) throw std::runtime_error("cover json: weights/L mismatch");
  return c;
}

inline void write_alphas_csv(std::ostream& os, const AlphaList& a) {
  os << "box,weight,probability,alpha\n";
  for (const auto& e : a.entries)
    os << e.box << ',' << e.weight << ',' << fmt(e.probability) << ',' << fmt(e.alpha) << '\n';
}

inline void write_hist_csv(std::ostream& os, const HistogramSpectrum& h) {
  os << "alpha_lo,alpha_hi,N_alpha,f_star,mean_weight\n";
  for (const auto& b : h.bins)
    os << fmt(b.alpha_lo) << ',' << fmt(b.alpha_hi) << ',' << b.count() << ',' << fmt_opt(b.f_star)
       << ',' << fmt_opt(b.mean_weight) << '\n';
}

inline void write_thermo_csv(std::ostream& os, const ThermoSpectrum& t) {
  os << "q,tau,alpha,f\n";
  for (const auto& s : t.samples)
    os << fmt(s.q) << ',' << fmt(s.tau) << ',' << fmt(s.alpha) << ',' << fmt(s.f) << '\n';
}

inline void write_split_csv(std::ostream& os, const BiMultifractalSplit& s) {
  os << "side,alpha_lo,alpha_hi,N_alpha,f_star,mean_weight\n";
  for (int side = 1; side <= 2; ++side) {
    const auto& h = side == 1 ? s.f1 : s.f2;
    for (const auto& b : h.bins)
      os << side << ',' << fmt(b.alpha_lo) << ',' << fmt(b.alpha_hi) << ',' << b.count() << ','
         << fmt_opt(b.f_star) << ',' << fmt_opt(b.mean_weight) << '\n';
  }
}

inline void write_profile_csv(std::ostream& os, const InstabilityProfile& p) {
  os << "bin,N_alpha,mean_weight,Q\n";
  for (const auto& r : p.rows)
    os << r.bin << ',' << r.count << ',' << fmt(r.mean_weight) << ',' << fmt(r.Q) << '\n';
}

inline void write_model_csv(std::ostream& os, const ModelSpectrum& m) {
  os << "r,alpha,f,N,weight,Q\n";
  for (const auto& r : m.rows)
    os << r.r << ',' << fmt(r.alpha) << ',' << fmt(r.f) << ',' << r.count.str() << ','
       << fmt(r.weight) << ',' << fmt(r.Q) << '\n';
}

inline void write_values_csv(std::ostream& os, const std::vector<double>& v) {
  os << "value\n";
  for (double x : v) os << fmt(x) << '\n';
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::runtime_error("csv: no column '" + name + "'");
  }
  double number(std::size_t row, const std::string& name) const {
    const auto& cell = rows.at(row).at(column(name));
    const auto v = parse_decimal(cell);
    if (!v) throw std::runtime_error("csv: '" + cell + "' is not a number");
    return *v;
  }
};

/// Header plus rows of equal width; used to read back every CSV written here.
inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: missing header");
  for (auto f : mfcrash::detail::split(mfcrash::detail::trim(line), ',')) t.header.emplace_back(f);
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (mfcrash::detail::trim(line).empty()) continue;
    std::vector<std::string> row;
    for (auto f : mfcrash::detail::split(mfcrash::detail::trim(line), ',')) row.emplace_back(f);
    if (row.size() != t.header.size())
      throw std::runtime_error("csv: row width mismatch at line " + std::to_string(n));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline ThermoSpectrum read_thermo_csv(std::istream& in, std::size_t box_count) {
  const auto t = read_csv(in);
  ThermoSpectrum s;
  s.box_count = box_count;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    s.samples.push_back({t.number(i, "q"), t.number(i, "tau"), t.number(i, "alpha"), t.number(i, "f")});
  return s;
}

inline std::vector<double> read_values_csv(std::istream& in) {
  const auto t = read_csv(in);
  std::vector<double> v;
  v.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) v.push_back(t.number(i, "value"));
  return v;
}

namespace detail {

inline ordered_json opt_json(const std::optional<double>& v) {
  return v ? ordered_json(pinned(*v)) : ordered_json(nullptr);
}

inline ordered_json opt_json(const std::optional<std::size_t>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace detail

inline ordered_json thresholds_to_json(const Thresholds& th) {
  // JSON has no infinity; unbounded thresholds are written as null.
  const auto num = [](double v) {
    return std::isfinite(v) ? ordered_json(pinned(v)) : ordered_json(nullptr);
  };
  ordered_json j;
  j["gap"] = num(th.gap);
  j["asymmetry"] = num(th.asymmetry);
  j["dispersion"] = num(th.dispersion);
  j["instability"] = num(th.instability);
  return j;
}

inline ordered_json report_to_json(const AnalysisResult& r, const AnalysisConfig& cfg) {
  using detail::opt_json;
  ordered_json j;
  j["label"] = r.label;
  j["window"] = r.window;
  j["L"] = r.box_count;
  j["B"] = r.bin_count;
  j["T_kept"] = r.raw_cover.kept;
  j["T_kept_pruned"] = r.pruned_cover.kept;
  if (r.trim) {
    j["trim"] = {{"heavy_cluster_size", r.trim->heavy_cluster_size},
                 {"discarded_points", r.trim->discarded_points},
                 {"cut_price", pinned(r.trim->cut_price)},
                 {"iterations", r.trim->iterations}};
  } else {
    j["trim"] = nullptr;
  }
  j["q_grid"] = {{"lo", cfg.q_lo},
                 {"hi", cfg.q_hi},
                 {"step", pinned(cfg.q_step)},
                 {"integer_grid", cfg.integer_grid()}};
  j["alpha1"] = r.split ? ordered_json(pinned(r.split->alpha1)) : ordered_json(nullptr);
  j["alpha0"] = r.split ? ordered_json(pinned(r.split->alpha0)) : ordered_json(nullptr);
  j["legendre_deviation"] = opt_json(r.legendre_deviation);
  j["envelope_excess"] = opt_json(r.envelope_excess);
  if (r.profile) {
    j["P_hat_geometric"] = opt_json(r.profile->P_geometric);
    j["P_hat_arithmetic"] = opt_json(r.profile->P_arithmetic);
    j["inflection_bin"] = r.profile->inflection_index
                              ? ordered_json(r.profile->rows[*r.profile->inflection_index].bin)
                              : ordered_json(nullptr);
    j["stall_bins"] = {opt_json(r.profile->stall_begin), opt_json(r.profile->stall_end)};
  } else {
    j["P_hat_geometric"] = nullptr;
    j["P_hat_arithmetic"] = nullptr;
    j["inflection_bin"] = nullptr;
    j["stall_bins"] = nullptr;
  }
  const auto& w = r.report;
  j["gap_ratio"] = opt_json(w.gap_ratio);
  j["asymmetry"] = pinned(w.asymmetry);
  j["dispersion_count"] = w.dispersion_count;
  j["f_alpha_max"] = pinned(w.f_alpha_max);
  j["max_Q"] = pinned(w.max_Q);
  j["q_inflection_present"] = w.q_inflection_present;
  j["flags"] = {{"inflection", w.inflection_flag},
                {"gap", w.gap_flag},
                {"asymmetry", w.asymmetry_flag},
                {"dispersion", w.dispersion_flag}};
  j["thresholds"] = thresholds_to_json(w.thresholds);
  j["skipped"] = r.skipped;
  return j;
}

inline std::string report_text(const AnalysisResult& r) {
  const auto& w = r.report;
  const auto yes = [](bool b) { return b ? "YES" : "no"; };
  std::ostringstream os;
  os << "window " << (r.label.empty() ? std::string("-") : r.label) << "  T=" << r.window
     << "  L=" << r.box_count << "  B=" << r.bin_count << "  kept=" << r.raw_cover.kept << '\n';
  os << "  instability inflection : " << yes(w.inflection_flag) << "  (max Q " << fmt(w.max_Q)
     << ")\n";
  os << "  q=1/q=0 gap ratio      : " << yes(w.gap_flag) << "  ("
     << (w.gap_ratio ? fmt(*w.gap_ratio) : std::string("n/a")) << ", threshold "
     << fmt(w.thresholds.gap) << ")\n";
  os << "  asymmetry              : " << yes(w.asymmetry_flag) << "  (" << fmt(w.asymmetry)
     << ")\n";
  os << "  dispersion             : " << yes(w.dispersion_flag) << "  (" << w.dispersion_count
     << " isolated top boxes, f(alpha_max) " << fmt(w.f_alpha_max) << ")\n";
  for (const auto& s : r.skipped) os << "  skipped " << s << '\n';
  return os.str();
}

}  // namespace mfcrash::io
