#include "cpsense/io.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <unistd.h>

#include "cpsense/error.hpp"

namespace cpsense::io {
namespace {

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::InvalidConfig, fmt::format("missing '{}'", key));
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("bad '{}': {}", key, e.what()));
  }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return field<T>(j, key);
}

std::pair<double, double> band_of(const json& c) {
  const auto band = field<std::vector<double>>(c, "band_hz");
  if (band.size() != 2 || !(band[0] < band[1])) {
    throw Error(ErrorCode::InvalidConfig, "band_hz must be [low, high] with low < high");
  }
  return {band[0], band[1]};
}

}  // namespace

std::string format_double(double v) { return fmt::format("{}", v); }

json scheme_to_json(const CoprimeScheme& s) {
  return json{{"r0", s.r0()}, {"r1", s.r1()}, {"p", s.p()}, {"q", s.q()}, {"fs_hz", s.fs()}};
}

CoprimeScheme scheme_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "scheme must be an object");
  return CoprimeScheme::make(field<std::int64_t>(j, "r0"), field<std::int64_t>(j, "r1"),
                             field<std::int64_t>(j, "p"), field<std::int64_t>(j, "q"),
                             field<double>(j, "fs_hz"));
}

void write_positions(std::ostream& os, const std::vector<std::int64_t>& positions) {
  for (auto n : positions) os << n << '\n';
}

std::vector<std::int64_t> read_positions(std::istream& is) {
  std::vector<std::int64_t> out;
  std::int64_t v = 0;
  while (is >> v) out.push_back(v);
  return out;
}

void write_autocorr_csv(std::ostream& os, const AutocorrSeq& seq) {
  os << "lag,real,imag\n";
  for (std::size_t i = 0; i < seq.values.size(); ++i) {
    os << seq.min_lag() + static_cast<std::int64_t>(i) << ','
       << format_double(seq.values[i].real()) << ',' << format_double(seq.values[i].imag())
       << '\n';
  }
}

json autocorr_to_json(const AutocorrSeq& seq, const CoprimeScheme& scheme) {
  std::vector<double> re, im;
  for (const auto& v : seq.values) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  return json{{"kind", to_string(seq.kind)},
              {"scheme", scheme_to_json(scheme)},
              {"frame_length", seq.frame_length},
              {"M", seq.window.M},
              {"delta_f_hz", seq.window.delta_f},
              {"min_lag", seq.min_lag()},
              {"real", re},
              {"imag", im}};
}

void write_spectrum_csv(std::ostream& os, const PowerSpectrum& spectrum) {
  os << "bin,frequency_hz,magnitude\n";
  for (std::size_t i = 0; i < spectrum.bins(); ++i) {
    os << i << ',' << format_double(spectrum.frequency(i)) << ','
       << format_double(spectrum.magnitudes[i]) << '\n';
  }
}

json spectrum_to_json(const PowerSpectrum& spectrum, const CoprimeScheme& scheme,
                      const LagWindow& window) {
  return json{{"scheme", scheme_to_json(scheme)},
              {"M", window.M},
              {"delta_f_hz", window.delta_f},
              {"fs_hz", spectrum.fs},
              {"bins", spectrum.bins()},
              {"bin_width_hz", spectrum.bin_width()},
              {"magnitude", spectrum.magnitudes}};
}

void write_coverage_csv(std::ostream& os, const AutocorrSeq& seq,
                        const std::vector<std::uint8_t>& covered) {
  os << "lag,covered\n";
  for (std::size_t i = 0; i < covered.size(); ++i)
    os << seq.min_lag() + static_cast<std::int64_t>(i) << ',' << int(covered[i]) << '\n';
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "scenario must be an object");
  Scenario sc;
  if (j.contains("scheme")) sc.scheme = scheme_from_json(j.at("scheme"));
  sc.seed = field_or<std::uint64_t>(j, "seed", 0);
  sc.delay_samples = field_or<std::int64_t>(j, "delay_samples", 0);
  if (sc.delay_samples < 0) throw Error(ErrorCode::InvalidConfig, "delay_samples must be >= 0");

  const json noise = j.value("noise", json::object());
  sc.noise.seed = field_or<std::uint64_t>(noise, "seed", derive_seed(sc.seed, 1));
  if (noise.contains("snr_db") && !noise.at("snr_db").is_null())
    sc.noise.snr_db = field<double>(noise, "snr_db");

  if (!j.contains("components") || !j.at("components").is_array() ||
      j.at("components").empty()) {
    throw Error(ErrorCode::InvalidConfig, "scenario needs a nonempty 'components' list");
  }
  const double fs = sc.scheme.fs();
  const auto N = sc.scheme.frame_length();
  std::mt19937_64 rng(derive_seed(sc.seed, 0));
  for (const auto& c : j.at("components")) {
    const auto type = field<std::string>(c, "type");
    if (type == "mp") {
      sc.components.emplace_back(ToneSpec{field<double>(c, "frequency_hz"),
                                          field_or<double>(c, "amplitude", 1.0),
                                          field_or<double>(c, "phase_rad", 0.0)});
    } else if (type == "bpsk") {
      BpskSpec b;
      b.carrier = field<double>(c, "carrier_hz");
      b.symbol_rate = field<double>(c, "symbol_rate_hz");
      b.code = field<std::vector<std::uint8_t>>(c, "code");
      b.amplitude = field_or<double>(c, "amplitude", 1.0);
      b.phase = field_or<double>(c, "phase_rad", 0.0);
      sc.components.emplace_back(std::move(b));
    } else if (type == "lfm") {
      sc.components.emplace_back(LfmSpec{
          field<double>(c, "start_hz"), field<double>(c, "bandwidth_hz"),
          field_or<double>(c, "duration_s", static_cast<double>(N) / fs),
          field_or<double>(c, "amplitude", 1.0), field_or<double>(c, "phase_rad", 0.0)});
    } else if (type == "random_mp") {
      const auto [lo, hi] = band_of(c);
      for (auto& t : random_tones(field<std::size_t>(c, "count"), lo, hi, rng))
        sc.components.emplace_back(t);
    } else if (type == "random_bpsk") {
      const auto [lo, hi] = band_of(c);
      for (auto& b : random_bpsk(field<std::size_t>(c, "count"), lo, hi,
                                 field<double>(c, "symbol_rate_hz"), fs,
                                 N + sc.delay_samples, rng))
        sc.components.emplace_back(std::move(b));
    } else {
      throw Error(ErrorCode::InvalidConfig, fmt::format("unknown component type '{}'", type));
    }
  }
  if (sc.components.empty()) throw Error(ErrorCode::InvalidConfig, "no components generated");
  return sc;
}

json components_to_json(const std::vector<ComponentSpec>& components) {
  json out = json::array();
  for (const auto& c : components) {
    std::visit(
        [&](const auto& spec) {
          using T = std::decay_t<decltype(spec)>;
          if constexpr (std::is_same_v<T, ToneSpec>) {
            out.push_back({{"type", "mp"},
                           {"frequency_hz", spec.frequency},
                           {"amplitude", spec.amplitude},
                           {"phase_rad", spec.phase}});
          } else if constexpr (std::is_same_v<T, BpskSpec>) {
            out.push_back({{"type", "bpsk"},
                           {"carrier_hz", spec.carrier},
                           {"symbol_rate_hz", spec.symbol_rate},
                           {"code", spec.code},
                           {"amplitude", spec.amplitude},
                           {"phase_rad", spec.phase}});
          } else {
            out.push_back({{"type", "lfm"},
                           {"start_hz", spec.start_frequency},
                           {"bandwidth_hz", spec.bandwidth},
                           {"duration_s", spec.duration},
                           {"amplitude", spec.amplitude},
                           {"phase_rad", spec.phase}});
          }
        },
        c);
  }
  return out;
}

NyquistFrame render(const Scenario& scenario) {
  const NyquistFrame clean = apply_delay(
      [&](std::int64_t d) { return synthesize(scenario.components, scenario.scheme, d); },
      scenario.delay_samples);
  return add_awgn(clean, scenario.noise);
}

std::filesystem::path sidecar_path(const std::filesystem::path& frame_path) {
  auto p = frame_path;
  p += ".json";
  return p;
}

void write_frame(const std::filesystem::path& path, const NyquistFrame& frame, const json& extra) {
  std::string bytes(frame.x.size() * 2 * sizeof(double), '\0');
  std::memcpy(bytes.data(), frame.x.data(), bytes.size());
  write_file_atomic(path, bytes);

  json header = extra;
  header["format"] = "cf64le";
  header["samples"] = frame.x.size();
  header["fs_hz"] = frame.fs;
  write_file_atomic(sidecar_path(path), header.dump(2) + "\n");
}

LoadedFrame read_frame(const std::filesystem::path& path) {
  LoadedFrame out;
  const std::string side = read_file(sidecar_path(path));
  try {
    out.header = json::parse(side);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, fmt::format("bad frame header {}: {}", path.string(), e.what()));
  }
  if (out.header.value("format", "") != "cf64le") {
    throw Error(ErrorCode::Io, fmt::format("{}: unsupported frame format", path.string()));
  }
  const auto samples = out.header.value("samples", std::size_t{0});
  const std::string bytes = read_file(path);
  if (bytes.size() != samples * 2 * sizeof(double)) {
    throw Error(ErrorCode::Io, fmt::format("{}: {} bytes, header says {} samples", path.string(),
                                           bytes.size(), samples));
  }
  out.frame.fs = out.header.value("fs_hz", 1.0);
  out.frame.x.resize(samples);
  std::memcpy(out.frame.x.data(), bytes.data(), bytes.size());
  return out;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "axis_value,rmse,trials,failed\n";
  for (const auto& r : rows) {
    os << format_double(r.axis_value) << ',' << format_double(r.rmse) << ',' << r.trials << ','
       << r.failed << '\n';
  }
}

void write_sweep_timing_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "axis_value,mean_time_s,trials\n";
  for (const auto& r : rows)
    os << format_double(r.axis_value) << ',' << format_double(r.mean_time_s) << ',' << r.trials
       << '\n';
}

void write_timing_csv(std::ostream& os, const std::vector<TimingRow>& rows) {
  os << "p,N,M,fast_s,oracle_s,speedup\n";
  for (const auto& r : rows) {
    const double speedup = r.oracle_s > 0.0 && r.fast_s > 0.0 ? r.oracle_s / r.fast_s : 0.0;
    os << r.p << ',' << r.N << ',' << r.M << ',' << format_double(r.fast_s) << ','
       << format_double(r.oracle_s) << ',' << format_double(speedup) << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ostringstream tag;
  tag << ".tmp." << ::getpid() << '.' << std::this_thread::get_id();
  auto tmp = path;
  tmp += tag.str();
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::Io, fmt::format("cannot open {} for writing", tmp.string()));
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!os) throw Error(ErrorCode::Io, fmt::format("short write to {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Io, fmt::format("cannot rename into {}", path.string()));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string file_digest(const std::filesystem::path& path) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : read_file(path)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace cpsense::io
