#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace cbmr {

enum class KnnMethod { Exact, VaFile, Lsh };

std::string_view to_string(KnnMethod method);
KnnMethod knn_method_from_string(std::string_view name);

/// Engine settings. The text form is one `key = value` per line; `#` starts
/// a comment. Keys match the member names below.
struct EngineConfig {
  std::filesystem::path data_dir = "cbmr-data";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string token;  // empty disables authentication

  std::size_t codebook_k = 512;
  std::uint64_t codebook_seed = 42;
  std::uint64_t dmax_seed = 7;
  std::size_t dmax_pairs = 1000;
  double dmax_percentile = 0.95;

  KnnMethod knn_method = KnnMethod::VaFile;
  int va_bits = 6;
  int lsh_tables = 8;
  int lsh_projections = 8;
  double lsh_width = 4.0;
  std::uint64_t lsh_seed = 42;

  std::size_t default_k = 100;
  std::size_t fetch_factor = 4;
  std::size_t max_upload_bytes = 32u << 20;
  double timeout_seconds = 30.0;
  double session_ttl_seconds = 15 * 60;

  // Evaluation.
  std::string ndcg_gain = "linear";  // or "exponential" (2^r - 1)
  double ndcg_log_base = 2.0;

  static EngineConfig parse(std::string_view text, const std::filesystem::path& base_dir = {});
  static EngineConfig load(const std::filesystem::path& path);
  std::string dump() const;
};

}  // namespace cbmr
