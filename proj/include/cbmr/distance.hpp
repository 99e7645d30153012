#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace cbmr {

enum class Metric : std::uint8_t { L2 = 0, L1 = 1, Cosine = 2, ChiSquared = 3 };

std::string_view to_string(Metric metric);
Metric metric_from_string(std::string_view name);

inline constexpr double kChiSquaredEpsilon = 1e-10;

/// Checked entry point: equal lengths, and nonnegative components for chi-squared.
double distance(Metric metric, std::span<const float> a, std::span<const float> b);

namespace detail {

// Unchecked kernels shared by the scans; every path computes in double in
// index order so that all scans agree bit-for-bit.
inline double l2(const float* a, const float* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

inline double l1(const float* a, const float* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  return sum;
}

inline double cosine(const float* a, const float* b, std::size_t n) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 1.0;
  const double sim = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::max(0.0, 1.0 - sim);
}

inline double chi_squared(const float* a, const float* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d / (static_cast<double>(a[i]) + static_cast<double>(b[i]) + kChiSquaredEpsilon);
  }
  return 0.5 * sum;
}

inline double unchecked(Metric metric, const float* a, const float* b, std::size_t n) {
  switch (metric) {
    case Metric::L2: return l2(a, b, n);
    case Metric::L1: return l1(a, b, n);
    case Metric::Cosine: return cosine(a, b, n);
    case Metric::ChiSquared: return chi_squared(a, b, n);
  }
  return 0.0;
}

}  // namespace detail
}  // namespace cbmr
