#pragma once

// Exact binomial reference model: the P > 1 weight scheme over L subdivisions,
// the ternary Cantor construction, and a dyadic multiplicative-cascade sampler.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfcrash {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

struct BinomialParams {
  double P{2.0};  // weight ratio between consecutive levels
  int k{1};       // depth
  int L{2};       // subdivisions per level
};

struct ModelRow {
  int r{0};
  double alpha{0.0};
  double f{0.0};
  BigInt count;      // C(k, r)
  double weight{0};  // P^(k - r)
  double Q{0.0};     // C(k, r) / P^(k - r)
};

struct ModelSpectrum {
  std::vector<ModelRow> rows;  // r = 0..k
  double slope{0.0};           // log P / log L
  double offset{0.0};          // k log((P + 1) / P) / log L
  BigRational total_mass;      // (P + 1)^k, exact
};

// Largest depth for which every C(k, r) and (P + 1)^k stay finite as doubles
// for moderate P; deeper models are rejected.
inline constexpr int kMaxModelDepth = 1000;

inline BigInt binomial(int n, int r) {
  if (r < 0 || r > n) return 0;
  BigInt c = 1;
  for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

inline void validate(const BinomialParams& p) {
  if (!(p.P > 1.0) || !std::isfinite(p.P)) throw std::invalid_argument("P must exceed 1");
  if (p.k < 1) throw std::invalid_argument("k must be at least 1");
  if (p.L < 2) throw std::invalid_argument("L must be at least 2");
  if (p.k > kMaxModelDepth)
    throw std::overflow_error("k exceeds the supported depth of " + std::to_string(kMaxModelDepth));
  if (!std::isfinite(static_cast<double>(p.k) * std::log10(p.P + 1.0)) ||
      static_cast<double>(p.k) * std::log10(p.P + 1.0) > 300.0)
    throw std::overflow_error("(P+1)^k overflows double precision");
}

/// Rows r = 0..k of alpha_r = slope * r + offset, f_r = log C(k,r) / log L,
/// weight P^(k-r) and Q_r. The mass identity sum C(k,r) P^(k-r) = (P+1)^k is
/// checked in exact rational arithmetic (P is converted from double exactly).
inline ModelSpectrum model_spectrum(const BinomialParams& p) {
  validate(p);
  ModelSpectrum m;
  const double log_L = std::log(static_cast<double>(p.L));
  m.slope = std::log(p.P) / log_L;
  m.offset = static_cast<double>(p.k) * std::log((p.P + 1.0) / p.P) / log_L;

  const BigRational P_exact(p.P);
  // powers[j] = P^j and (P+1)^k, both exact.
  std::vector<BigRational> powers(static_cast<std::size_t>(p.k) + 1, BigRational(1));
  m.total_mass = P_exact + 1;
  for (int j = 1; j <= p.k; ++j) powers[j] = powers[j - 1] * P_exact;
  for (int j = 1; j < p.k; ++j) m.total_mass *= P_exact + 1;
  BigRational mass = 0;
  for (int r = 0; r <= p.k; ++r) {
    ModelRow row;
    row.r = r;
    row.count = binomial(p.k, r);
    row.alpha = m.slope * r + m.offset;
    const double c = row.count.convert_to<double>();
    row.f = std::log(c) / log_L;
    row.weight = std::pow(p.P, p.k - r);
    row.Q = c / row.weight;
    mass += BigRational(row.count) * powers[p.k - r];
    m.rows.push_back(std::move(row));
  }
  if (mass != m.total_mass) throw std::logic_error("model_spectrum: total mass identity violated");
  return m;
}

struct CantorRow {
  int r{0};
  double alpha{0.0};
  double f{0.0};
  BigInt count;
  double measure{0.0};  // p^(k-r) (1-p)^r, per subfractal
};

struct CantorSpectrum {
  std::vector<CantorRow> rows;
  double slope{0.0};   // log((1-p)/p) / log(1/3^k)
  double offset{0.0};  // log p / log(1/3)
};

/// Ternary Cantor set with masses p and 1-p on the two thirds at every step.
inline CantorSpectrum ternary_cantor_spectrum(double p, int k) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p_r must lie in (0, 1)");
  if (p == 0.5) throw std::domain_error("degenerate (monofractal on support)");
  if (k < 1 || k > kMaxModelDepth) throw std::invalid_argument("k out of range");
  CantorSpectrum s;
  const double log_len = -static_cast<double>(k) * std::log(3.0);  // log(1/3^k)
  s.slope = std::log((1.0 - p) / p) / log_len;
  s.offset = std::log(p) / -std::log(3.0);
  for (int r = 0; r <= k; ++r) {
    CantorRow row;
    row.r = r;
    row.count = binomial(k, r);
    row.alpha = r * s.slope + s.offset;
    row.f = std::log(row.count.convert_to<double>()) / -log_len;
    row.measure = std::pow(p, k - r) * std::pow(1.0 - p, r);
    s.rows.push_back(std::move(row));
  }
  return s;
}

/// Dyadic multiplicative cascade: each sample descends k levels, taking the
/// left half with probability p, and lands uniformly inside its final cell.
/// Uniform variates use the top 53 bits of mt19937_64 so output is identical
/// across standard libraries for a given seed.
inline std::vector<double> generate_cascade(double p, int k, std::size_t samples,
                                            std::uint64_t seed) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p_r must lie in (0, 1)");
  if (k < 1 || k > 52) throw std::invalid_argument("k must lie in [1, 52]");
  if (samples < 1) throw std::invalid_argument("samples must be at least 1");
  std::mt19937_64 rng(seed);
  const auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double cells = std::ldexp(1.0, k);
  std::vector<double> out;
  out.reserve(samples);
  for (std::size_t n = 0; n < samples; ++n) {
    std::uint64_t cell = 0;
    for (int level = 0; level < k; ++level) cell = (cell << 1) | (uniform() < p ? 0u : 1u);
    out.push_back((static_cast<double>(cell) + uniform()) / cells);
  }
  return out;
}

/// f at the alpha_max end minus f at the alpha_min end; zero by symmetry of
/// C(k, r).
inline double asymmetry(const ModelSpectrum& m) { return m.rows.back().f - m.rows.front().f; }

}  // namespace mfcrash
