// mfcrash: multifractal crash-signature analysis of daily price windows.
//
//   mfcrash analyze --input prices.csv --window 1000 [--end-day 2000-03-10] --out results/
//   mfcrash model   --P 2 --k 4 --L 16 --out results/
//   mfcrash cascade --p 0.3 --k 10 --samples 100000 --seed 7 --out results/ [--analyze]
//
// Exit status: 0 success, 1 analysis error, 2 configuration error.
// MFCRASH_OUT_DIR overrides the output directory.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "mfcrash/binomial_model.hpp"
#include "mfcrash/io.hpp"
#include "mfcrash/pipeline.hpp"
#include "mfcrash/signal_ingest.hpp"

namespace fs = std::filesystem;
using namespace mfcrash;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AnalyzeOptions {
  std::string input;
  std::string end_day;
  std::size_t window{0};
  std::size_t boxes{0};
  std::size_t bins{0};
  int q_lo{-10};
  int q_hi{10};
  double q_step{1.0};
  std::uint64_t iso_weight{1};
  double gap_threshold{3.0};
  double asymmetry_threshold{0.1};
  double dispersion_threshold{1.0};
  double instability_threshold{0.0};
  char delimiter{','};
  bool dump_cover{false};
};

struct ModelOptions {
  double P{0.0};
  int k{0};
  int L{0};
};

struct CascadeOptions {
  double p{0.0};
  int k{10};
  std::size_t samples{0};
  std::uint64_t seed{0};
  bool analyze{false};
};

fs::path output_dir(const std::string& flag) {
  if (const char* env = std::getenv("MFCRASH_OUT_DIR"); env && *env) return env;
  return flag;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << body;
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

AnalysisConfig analysis_config(const AnalyzeOptions& o) {
  AnalysisConfig cfg;
  if (o.boxes) cfg.boxes = o.boxes;
  if (o.bins) cfg.bins = o.bins;
  cfg.q_lo = o.q_lo;
  cfg.q_hi = o.q_hi;
  cfg.q_step = o.q_step;
  cfg.iso_weight = o.iso_weight;
  cfg.thresholds = {o.gap_threshold, o.asymmetry_threshold, o.dispersion_threshold,
                    o.instability_threshold};
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

void write_analysis(const AnalysisResult& r, const AnalysisConfig& cfg, const fs::path& dir,
                    bool dump_cover) {
  fs::create_directories(dir);
  const auto cover_json = io::cover_to_json(r.raw_cover).dump(2) + "\n";
  write_file(dir / "cover.json", cover_json);
  write_file(dir / "alphas.csv", render([&](auto& os) { io::write_alphas_csv(os, r.raw_alphas); }));
  write_file(dir / "hist_spectrum.csv", render([&](auto& os) {
               if (r.histogram) io::write_hist_csv(os, *r.histogram);
               else io::write_hist_csv(os, HistogramSpectrum{});
             }));
  write_file(dir / "thermo_spectrum.csv", render([&](auto& os) { io::write_thermo_csv(os, r.thermo); }));
  write_file(dir / "split.csv", render([&](auto& os) {
               if (r.split) io::write_split_csv(os, *r.split);
               else io::write_split_csv(os, BiMultifractalSplit{});
             }));
  write_file(dir / "profile.csv", render([&](auto& os) {
               if (r.profile) io::write_profile_csv(os, *r.profile);
               else io::write_profile_csv(os, InstabilityProfile{});
             }));
  write_file(dir / "report.json", io::report_to_json(r, cfg).dump(2) + "\n");
  if (dump_cover) std::cout << cover_json;
  std::cout << io::report_text(r);
}

int run_analyze(const AnalyzeOptions& o, const fs::path& dir) {
  const auto cfg = analysis_config(o);
  std::ifstream in(o.input);
  if (!in) throw std::runtime_error("cannot open " + o.input);
  ParseOptions popts;
  popts.delimiter = o.delimiter;
  const auto points = parse_prices(in, popts);
  if (points.empty()) throw std::runtime_error("no price rows in " + o.input);
  Date end = points.back().day;
  if (!o.end_day.empty()) {
    const auto d = parse_date(o.end_day);
    if (!d) throw ConfigError("malformed --end-day " + o.end_day);
    end = *d;
  }
  std::size_t n = o.window;
  if (n == 0) {
    for (const auto& p : points) n += p.day <= end ? 1 : 0;
  }
  const auto signal = select_window(points, end, n);
  const auto result = analyze_signal(signal, cfg);
  write_analysis(result, cfg, dir, o.dump_cover);
  return 0;
}

int run_model(const ModelOptions& o, const fs::path& dir) {
  const BinomialParams params{o.P, o.k, o.L};
  try {
    validate(params);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const auto m = model_spectrum(params);
  fs::create_directories(dir);
  const auto body = render([&](auto& os) { io::write_model_csv(os, m); });
  write_file(dir / "model.csv", body);
  std::cout << body;
  return 0;
}

int run_cascade(const CascadeOptions& o, const AnalyzeOptions& a, const fs::path& dir) {
  if (!(o.p > 0.0 && o.p < 1.0)) throw ConfigError("p must lie in (0, 1)");
  if (o.samples < 1) throw ConfigError("samples must be at least 1");
  if (o.k < 1 || o.k > 52) throw ConfigError("k must lie in [1, 52]");
  const auto points = generate_cascade(o.p, o.k, o.samples, o.seed);
  fs::create_directories(dir);
  write_file(dir / "cascade_points.csv", render([&](auto& os) { io::write_values_csv(os, points); }));
  if (!o.analyze) return 0;

  // Cascade samples already live on the unit interval; cover them directly on
  // the dyadic grid.
  auto cfg = analysis_config(a);
  const std::size_t L = a.boxes ? a.boxes : (std::size_t{1} << o.k);
  auto result = analyze_normalized(make_dust(points), points.size(), L, cfg);
  result.label = "cascade p=" + io::fmt(o.p) + " k=" + std::to_string(o.k);
  write_analysis(result, cfg, dir, a.dump_cover);
  return 0;
}

void add_analysis_flags(CLI::App* cmd, AnalyzeOptions& o) {
  cmd->add_option("--boxes,-L", o.boxes, "Box count L (default floor(sqrt(T)))")->check(CLI::Range(4, 1 << 24));
  cmd->add_option("--bins,-B", o.bins, "Alpha bin count (default floor(sqrt(L)))")->check(CLI::Range(2, 1 << 20));
  cmd->add_option("--q-lo", o.q_lo, "Lowest q");
  cmd->add_option("--q-hi", o.q_hi, "Highest q");
  cmd->add_option("--q-step", o.q_step, "q spacing (1 = integer grid)");
  cmd->add_option("--iso-weight", o.iso_weight, "Largest weight of an isolated box that is pruned");
  cmd->add_option("--gap-threshold", o.gap_threshold, "Gap-ratio flag threshold");
  cmd->add_option("--asymmetry-threshold", o.asymmetry_threshold);
  cmd->add_option("--dispersion-threshold", o.dispersion_threshold);
  cmd->add_option("--instability-threshold", o.instability_threshold);
  cmd->add_flag("--dump-cover", o.dump_cover, "Print the box cover JSON to stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multifractal crash-signature analysis of price windows"};
  app.require_subcommand(1);
  std::string out = ".";
  app.add_option("--out,-o", out, "Output directory")->capture_default_str();

  AnalyzeOptions analyze;
  auto* a = app.add_subcommand("analyze", "Analyze a price file window");
  a->add_option("--input,-i", analyze.input, "Price file (date, close)")->required();
  a->add_option("--end-day", analyze.end_day, "Last day of the window (yyyy-mm-dd)");
  a->add_option("--window,-n", analyze.window, "Window length in records (default: all)");
  a->add_option("--delimiter", analyze.delimiter, "Field delimiter");
  a->add_option("--out,-o", out, "Output directory");
  add_analysis_flags(a, analyze);

  ModelOptions model;
  auto* m = app.add_subcommand("model", "Emit the binomial reference table");
  m->add_option("--P", model.P, "Weight ratio P > 1")->required();
  m->add_option("--k", model.k, "Depth k")->required();
  m->add_option("--L", model.L, "Subdivision count L")->required();
  m->add_option("--out,-o", out, "Output directory");

  CascadeOptions cascade;
  AnalyzeOptions cascade_analysis;
  auto* c = app.add_subcommand("cascade", "Sample a dyadic binomial cascade");
  c->add_option("--p", cascade.p, "Left-branch probability")->required();
  c->add_option("--k", cascade.k, "Depth");
  c->add_option("--samples", cascade.samples, "Number of points")->required();
  c->add_option("--seed", cascade.seed, "RNG seed");
  c->add_flag("--analyze", cascade.analyze, "Analyze the generated points");
  c->add_option("--out,-o", out, "Output directory");
  add_analysis_flags(c, cascade_analysis);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const fs::path dir = output_dir(out);
  try {
    if (*a) return run_analyze(analyze, dir);
    if (*m) return run_model(model, dir);
    if (*c) return run_cascade(cascade, cascade_analysis, dir);
  } catch (const ConfigError& e) {
    std::cerr << "mfcrash: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mfcrash: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
