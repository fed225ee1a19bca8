#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <tuple>

#include "cpsense/estimator.hpp"

namespace cpsense {

/// Sensing autocorrelations keyed by (r0, r1, p, q, M), held in memory and
/// optionally persisted as binary files under a cache directory.
///
/// File layout (little-endian): 8-byte magic "CPSRA\0\0\0", u32 version,
/// u32 reserved, i64 r0, r1, p, q, M, N, then 2M-1 i64 pair counts in
/// ascending lag order. A file whose header disagrees with the key is
/// recomputed and overwritten.
class SensingCache {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  enum class Source { Memory, Disk, Computed };

  struct Lookup {
    std::shared_ptr<const AutocorrSeq> sensing;
    Source source;
  };

  explicit SensingCache(std::optional<std::filesystem::path> directory = std::nullopt);

  Lookup get(const CoprimeScheme& scheme, const LagWindow& window);

  std::optional<std::filesystem::path> file_for(const CoprimeScheme& scheme,
                                                std::int64_t M) const;

 private:
  using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t>;

  std::optional<std::filesystem::path> directory_;
  std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const AutocorrSeq>> entries_;
};

/// Reads a cache file; nullopt when missing, truncated, or keyed differently.
std::optional<AutocorrSeq> read_sensing_file(const std::filesystem::path& path,
                                             const CoprimeScheme& scheme,
                                             const LagWindow& window);

void write_sensing_file(const std::filesystem::path& path, const CoprimeScheme& scheme,
                        const AutocorrSeq& ra);

}  // namespace cpsense
