#include "cpsense/sensing_cache.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

#include "cpsense/error.hpp"

namespace cpsense {

static_assert(std::endian::native == std::endian::little,
              "cache and frame files are written in host order");

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'P', 'S', 'R', 'A', 0, 0, 0};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

}  // namespace

SensingCache::SensingCache(std::optional<std::filesystem::path> directory)
    : directory_(std::move(directory)) {}

std::optional<std::filesystem::path> SensingCache::file_for(const CoprimeScheme& s,
                                                            std::int64_t M) const {
  if (!directory_) return std::nullopt;
  return *directory_ /
         fmt::format("ra_{}_{}_{}_{}_{}.bin", s.r0(), s.r1(), s.p(), s.q(), M);
}

SensingCache::Lookup SensingCache::get(const CoprimeScheme& scheme, const LagWindow& window) {
  const Key key{scheme.r0(), scheme.r1(), scheme.p(), scheme.q(), window.M};
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      // Same pair counts, possibly a different fs / delta_f on the window.
      if (it->second->window == window) return {it->second, Source::Memory};
      auto copy = std::make_shared<AutocorrSeq>(*it->second);
      copy->window = window;
      return {copy, Source::Memory};
    }
  }

  std::unique_lock lock(mutex_);
  Source source = Source::Computed;
  std::shared_ptr<const AutocorrSeq> ra;
  const auto path = file_for(scheme, window.M);
  if (path) {
    if (auto loaded = read_sensing_file(*path, scheme, window)) {
      ra = std::make_shared<const AutocorrSeq>(std::move(*loaded));
      source = Source::Disk;
    }
  }
  if (!ra) {
    ra = std::make_shared<const AutocorrSeq>(sensing_autocorr(scheme, window));
    if (path) write_sensing_file(*path, scheme, *ra);
  }
  entries_.insert_or_assign(key, ra);
  return {ra, source};
}

std::optional<AutocorrSeq> read_sensing_file(const std::filesystem::path& path,
                                             const CoprimeScheme& scheme,
                                             const LagWindow& window) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) return std::nullopt;
  std::uint32_t version = 0, reserved = 0;
  if (!get(is, version) || !get(is, reserved) || version != SensingCache::kFormatVersion)
    return std::nullopt;
  std::array<std::int64_t, 6> header{};
  for (auto& h : header)
    if (!get(is, h)) return std::nullopt;
  const std::array<std::int64_t, 6> expected = {scheme.r0(), scheme.r1(), scheme.p(),
                                                scheme.q(),  window.M,    scheme.frame_length()};
  if (header != expected) return std::nullopt;

  AutocorrSeq ra;
  ra.window = window;
  ra.kind = AutocorrKind::Sensing;
  ra.frame_length = scheme.frame_length();
  ra.values.resize(static_cast<std::size_t>(window.lag_count()));
  const auto N = static_cast<double>(ra.frame_length);
  for (auto& v : ra.values) {
    std::int64_t count = 0;
    if (!get(is, count) || count < 0) return std::nullopt;
    v = static_cast<double>(count) / N;
  }
  if (is.peek() != std::char_traits<char>::eof()) return std::nullopt;
  return ra;
}

void write_sensing_file(const std::filesystem::path& path, const CoprimeScheme& scheme,
                        const AutocorrSeq& ra) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ostringstream tag;
  tag << ::getpid() << '.' << std::this_thread::get_id();
  auto tmp = path;
  tmp += ".tmp." + tag.str();
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::Io, fmt::format("cannot write {}", tmp.string()));
    os.write(kMagic.data(), kMagic.size());
    put(os, SensingCache::kFormatVersion);
    put(os, std::uint32_t{0});
    for (std::int64_t h : {scheme.r0(), scheme.r1(), scheme.p(), scheme.q(), ra.window.M,
                           scheme.frame_length()})
      put(os, h);
    for (std::int64_t c : pair_counts(ra)) put(os, c);
    if (!os) throw Error(ErrorCode::Io, fmt::format("short write to {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Io, fmt::format("cannot move cache file into {}", path.string()));
  }
}

}  // namespace cpsense
