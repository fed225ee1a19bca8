#pragma once

// File formats shared by the library and the command-line tool.
//
//  scheme JSON     {"r0":3,"r1":4,"p":3000,"q":1,"fs_hz":3.2e10}
//  positions text  one sample index per line, ascending
//  autocorr CSV    lag,real,imag
//  spectrum CSV    bin,frequency_hz,magnitude
//  coverage CSV    lag,covered
//  frame binary    interleaved re/im float64 little-endian, sidecar <frame>.json
//  sweep CSV       axis_value,rmse,trials,failed (timing lives in a separate file)

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpsense/coprime.hpp"
#include "cpsense/estimator.hpp"
#include "cpsense/eval.hpp"
#include "cpsense/siggen.hpp"

namespace cpsense::io {

using nlohmann::json;

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

json scheme_to_json(const CoprimeScheme& scheme);
/// Throws Error(InvalidConfig) on missing or mistyped fields, and the scheme
/// validation errors otherwise.
CoprimeScheme scheme_from_json(const json& j);

void write_positions(std::ostream& os, const std::vector<std::int64_t>& positions);
std::vector<std::int64_t> read_positions(std::istream& is);

void write_autocorr_csv(std::ostream& os, const AutocorrSeq& seq);
json autocorr_to_json(const AutocorrSeq& seq, const CoprimeScheme& scheme);

void write_spectrum_csv(std::ostream& os, const PowerSpectrum& spectrum);
json spectrum_to_json(const PowerSpectrum& spectrum, const CoprimeScheme& scheme,
                      const LagWindow& window);

void write_coverage_csv(std::ostream& os, const AutocorrSeq& seq,
                        const std::vector<std::uint8_t>& covered);

/// A signal scene: components, noise and an optional delay, bound to a scheme.
struct Scenario {
  CoprimeScheme scheme = CoprimeScheme::make(3, 4, 300, 1, 32e9);
  std::vector<ComponentSpec> components;
  NoiseSpec noise;
  std::int64_t delay_samples = 0;
  std::uint64_t seed = 0;
};

/// Parses a scenario document. Components are explicit ("mp", "bpsk", "lfm")
/// or drawn from the scenario seed ("random_mp", "random_bpsk"). Throws
/// Error(InvalidConfig) for an empty component list or malformed entries.
Scenario scenario_from_json(const json& j);
json components_to_json(const std::vector<ComponentSpec>& components);

/// Synthesizes the scene, applies the delay, then adds noise.
NyquistFrame render(const Scenario& scenario);

std::filesystem::path sidecar_path(const std::filesystem::path& frame_path);

/// Writes the binary frame and its JSON sidecar ({"format":"cf64le","samples":N,
/// "fs_hz":..} merged with `extra`).
void write_frame(const std::filesystem::path& path, const NyquistFrame& frame,
                 const json& extra = json::object());

struct LoadedFrame {
  NyquistFrame frame;
  json header;
};

LoadedFrame read_frame(const std::filesystem::path& path);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_sweep_timing_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_timing_csv(std::ostream& os, const std::vector<TimingRow>& rows);

/// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace cpsense::io
