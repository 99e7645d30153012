#include "cbmr/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "cbmr/error.hpp"
#include "cbmr/media.hpp"

namespace cbmr {

std::string_view to_string(KnnMethod method) {
  switch (method) {
    case KnnMethod::Exact: return "exact";
    case KnnMethod::VaFile: return "va";
    case KnnMethod::Lsh: return "lsh";
  }
  return "exact";
}

KnnMethod knn_method_from_string(std::string_view name) {
  if (name == "exact") return KnnMethod::Exact;
  if (name == "va" || name == "vafile") return KnnMethod::VaFile;
  if (name == "lsh") return KnnMethod::Lsh;
  throw Error(ErrorCode::InvalidConfig, "unknown knn_method '" + std::string(name) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw Error(ErrorCode::InvalidConfig, std::string(key) + ": not a number: '" + std::string(value) + "'");
  return out;
}

}  // namespace

EngineConfig EngineConfig::parse(std::string_view text, const std::filesystem::path& base_dir) {
  EngineConfig c;
  using Setter = std::function<void(std::string_view, std::string_view)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"data_dir",
       [&](auto, auto v) {
         std::filesystem::path p{std::string(v)};
         c.data_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
       }},
      {"host", [&](auto, auto v) { c.host = std::string(v); }},
      {"port", [&](auto k, auto v) { c.port = number<int>(k, v); }},
      {"token", [&](auto, auto v) { c.token = std::string(v); }},
      {"codebook_k", [&](auto k, auto v) { c.codebook_k = number<std::size_t>(k, v); }},
      {"codebook_seed", [&](auto k, auto v) { c.codebook_seed = number<std::uint64_t>(k, v); }},
      {"dmax_seed", [&](auto k, auto v) { c.dmax_seed = number<std::uint64_t>(k, v); }},
      {"dmax_pairs", [&](auto k, auto v) { c.dmax_pairs = number<std::size_t>(k, v); }},
      {"dmax_percentile", [&](auto k, auto v) { c.dmax_percentile = number<double>(k, v); }},
      {"knn_method", [&](auto, auto v) { c.knn_method = knn_method_from_string(v); }},
      {"va_bits", [&](auto k, auto v) { c.va_bits = number<int>(k, v); }},
      {"lsh_tables", [&](auto k, auto v) { c.lsh_tables = number<int>(k, v); }},
      {"lsh_projections", [&](auto k, auto v) { c.lsh_projections = number<int>(k, v); }},
      {"lsh_width", [&](auto k, auto v) { c.lsh_width = number<double>(k, v); }},
      {"lsh_seed", [&](auto k, auto v) { c.lsh_seed = number<std::uint64_t>(k, v); }},
      {"default_k", [&](auto k, auto v) { c.default_k = number<std::size_t>(k, v); }},
      {"fetch_factor", [&](auto k, auto v) { c.fetch_factor = number<std::size_t>(k, v); }},
      {"max_upload_bytes", [&](auto k, auto v) { c.max_upload_bytes = number<std::size_t>(k, v); }},
      {"timeout_seconds", [&](auto k, auto v) { c.timeout_seconds = number<double>(k, v); }},
      {"session_ttl_seconds", [&](auto k, auto v) { c.session_ttl_seconds = number<double>(k, v); }},
      {"ndcg_gain",
       [&](auto k, auto v) {
         if (v != "linear" && v != "exponential")
           throw Error(ErrorCode::InvalidConfig, std::string(k) + ": expected linear or exponential");
         c.ndcg_gain = std::string(v);
       }},
      {"ndcg_log_base", [&](auto k, auto v) { c.ndcg_log_base = number<double>(k, v); }},
  };

  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw Error(ErrorCode::InvalidConfig, "unknown key '" + std::string(key) + "'");
    it->second(key, value);
  }
  if (c.va_bits < 1 || c.va_bits > 16) throw Error(ErrorCode::InvalidConfig, "va_bits must be in [1, 16]");
  if (c.codebook_k < 2) throw Error(ErrorCode::InvalidConfig, "codebook_k must be at least 2");
  if (!(c.dmax_percentile > 0.0 && c.dmax_percentile <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "dmax_percentile must be in (0, 1]");
  if (c.fetch_factor < 1) throw Error(ErrorCode::InvalidConfig, "fetch_factor must be at least 1");
  return c;
}

EngineConfig EngineConfig::load(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
               path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

std::string EngineConfig::dump() const {
  std::ostringstream out;
  out.precision(17);
  out << "data_dir = " << data_dir.string() << "\n"
      << "host = " << host << "\n"
      << "port = " << port << "\n"
      << "token = " << token << "\n"
      << "codebook_k = " << codebook_k << "\n"
      << "codebook_seed = " << codebook_seed << "\n"
      << "dmax_seed = " << dmax_seed << "\n"
      << "dmax_pairs = " << dmax_pairs << "\n"
      << "dmax_percentile = " << dmax_percentile << "\n"
      << "knn_method = " << to_string(knn_method) << "\n"
      << "va_bits = " << va_bits << "\n"
      << "lsh_tables = " << lsh_tables << "\n"
      << "lsh_projections = " << lsh_projections << "\n"
      << "lsh_width = " << lsh_width << "\n"
      << "lsh_seed = " << lsh_seed << "\n"
      << "default_k = " << default_k << "\n"
      << "fetch_factor = " << fetch_factor << "\n"
      << "max_upload_bytes = " << max_upload_bytes << "\n"
      << "timeout_seconds = " << timeout_seconds << "\n"
      << "session_ttl_seconds = " << session_ttl_seconds << "\n"
      << "ndcg_gain = " << ndcg_gain << "\n"
      << "ndcg_log_base = " << ndcg_log_base << "\n";
  return out.str();
}

}  // namespace cbmr
