#include <cmath>
#include <limits>
#include <random>

#include "cbmr/error.hpp"
#include "cbmr/image_features.hpp"

namespace cbmr {

namespace {

double squared_l2(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace

std::size_t nearest_centroid(const Codebook& codebook, std::span<const double> descriptor) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < codebook.k(); ++c) {
    const double d = squared_l2(codebook.centroids[c], descriptor);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

Codebook train_codebook(std::span<const LocalDescriptor> descriptors, std::size_t k, std::uint64_t seed,
                        const KMeansParams& params) {
  if (k < 2) throw Error(ErrorCode::InsufficientData, "codebook needs k >= 2");
  if (descriptors.size() < k)
    throw Error(ErrorCode::InsufficientData,
                std::to_string(descriptors.size()) + " descriptors for k=" + std::to_string(k));
  const std::size_t dim = descriptors.front().size();
  for (const auto& d : descriptors)
    if (d.size() != dim) throw Error(ErrorCode::DimensionMismatch, "descriptor lengths differ");

  std::mt19937_64 rng(seed);
  Codebook cb;
  std::uniform_int_distribution<std::size_t> pick(0, descriptors.size() - 1);
  cb.centroids.push_back(descriptors[pick(rng)]);

  // k-means++: sample each further seed proportional to squared distance.
  std::vector<double> d2(descriptors.size());
  for (std::size_t i = 0; i < descriptors.size(); ++i) d2[i] = squared_l2(descriptors[i], cb.centroids[0]);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (cb.centroids.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t chosen = 0;
    if (total <= 0.0) {
      chosen = pick(rng);
    } else {
      double target = unit(rng) * total;
      chosen = descriptors.size() - 1;
      for (std::size_t i = 0; i < descriptors.size(); ++i) {
        target -= d2[i];
        if (target < 0.0) {
          chosen = i;
          break;
        }
      }
    }
    cb.centroids.push_back(descriptors[chosen]);
    for (std::size_t i = 0; i < descriptors.size(); ++i)
      d2[i] = std::min(d2[i], squared_l2(descriptors[i], cb.centroids.back()));
  }

  std::vector<std::size_t> assignment(descriptors.size());
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    for (std::size_t i = 0; i < descriptors.size(); ++i) assignment[i] = nearest_centroid(cb, descriptors[i]);
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < descriptors.size(); ++i) {
      ++counts[assignment[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[assignment[i]][d] += descriptors[i][d];
    }
    double max_shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty clusters keep their centroid
      for (double& v : sums[c]) v /= static_cast<double>(counts[c]);
      max_shift = std::max(max_shift, std::sqrt(squared_l2(sums[c], cb.centroids[c])));
      cb.centroids[c] = std::move(sums[c]);
    }
    if (max_shift < params.tolerance) break;
  }
  return cb;
}

DescriptorVector bow_histogram(std::span<const LocalDescriptor> descriptors, const Codebook& codebook) {
  DescriptorVector out{std::string(category::kSurfBow), std::vector<double>(codebook.k(), 0.0), {}};
  if (descriptors.empty()) return out;
  for (const auto& d : descriptors) {
    if (d.size() != codebook.dim())
      throw Error(ErrorCode::DimensionMismatch, "descriptor does not match codebook dimension");
    out.values[nearest_centroid(codebook, d)] += 1.0;
  }
  for (double& v : out.values) v /= static_cast<double>(descriptors.size());
  return out;
}

}  // namespace cbmr
