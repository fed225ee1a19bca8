#include "cpsense/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "cpsense/coprime.hpp"
#include "cpsense/estimator.hpp"
#include "cpsense/eval.hpp"
#include "cpsense/io.hpp"
#include "cpsense/sensing_cache.hpp"

namespace cpsense::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json parse_json_file(const fs::path& path) {
  const std::string text = io::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string text_of(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

fs::path with_suffix(const std::string& prefix, const char* suffix) { return prefix + suffix; }

// --r0 --r1 -p -q --fs, each remembering whether it was given explicitly.
struct SchemeFlags {
  std::int64_t r0 = 3, r1 = 4, p = 300, q = 1;
  double fs = 32e9;
  std::vector<std::pair<const char*, CLI::Option*>> options;

  void attach(CLI::App* app) {
    options = {{"r0", app->add_option("--r0", r0, "undersampling factor of channel 0")},
               {"r1", app->add_option("--r1", r1, "undersampling factor of channel 1")},
               {"p", app->add_option("-p,--p", p, "multiple coprime unit factor")},
               {"q", app->add_option("-q,--q", q, "non-overlapping factor")},
               {"fs_hz", app->add_option("--fs", fs, "Nyquist rate in Hz")}};
  }

  json value(const char* key) const {
    const std::string k = key;
    if (k == "r0") return r0;
    if (k == "r1") return r1;
    if (k == "p") return p;
    if (k == "q") return q;
    return fs;
  }

  /// Keys absent from `base` come from the flags (or their defaults).
  json fill_missing(json base) const {
    if (!base.is_object()) base = json::object();
    for (const char* key : {"r0", "r1", "p", "q", "fs_hz"})
      if (!base.contains(key)) base[key] = value(key);
    return base;
  }

  /// Explicitly given flags replace keys in `base`.
  json override_explicit(json base) const {
    base = fill_missing(std::move(base));
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) base[key] = value(key);
    return base;
  }
};

fs::path manifest_path(const std::string& command, const json& config) {
  if (command == "gen" || command == "positions") return config.at("out").get<std::string>() + ".manifest.json";
  return config.at("out_prefix").get<std::string>() + ".manifest.json";
}

// ---------------------------------------------------------------------------

std::vector<OutputFile> run_gen(const json& cfg, std::ostream& out) {
  const io::Scenario sc = io::scenario_from_json(cfg.at("scenario"));
  const NyquistFrame frame = io::render(sc);
  const fs::path path = cfg.at("out").get<std::string>();
  json header{{"scheme", io::scheme_to_json(sc.scheme)},
              {"components", io::components_to_json(sc.components)},
              {"delay_samples", sc.delay_samples},
              {"seed", sc.seed},
              {"noise", {{"snr_db", sc.noise.snr_db ? json(*sc.noise.snr_db) : json(nullptr)},
                         {"seed", sc.noise.seed}}}};
  io::write_frame(path, frame, header);
  out << fmt::format("wrote {} samples ({} components) to {}\n", frame.x.size(),
                     sc.components.size(), path.string());
  return {{path, true}, {io::sidecar_path(path), true}};
}

std::vector<OutputFile> run_estimate(const json& cfg, std::ostream& out, std::ostream& err) {
  const CoprimeScheme scheme = io::scheme_from_json(cfg.at("scheme"));
  const json& input = cfg.at("input");
  NyquistFrame frame;
  if (input.contains("frame")) {
    frame = io::read_frame(input.at("frame").get<std::string>()).frame;
  } else {
    io::Scenario sc = io::scenario_from_json(input.at("scenario"));
    frame = io::render(sc);
  }
  if (static_cast<std::int64_t>(frame.x.size()) != scheme.frame_length()) {
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("frame has {} samples but the scheme needs N={}", frame.x.size(),
                            scheme.frame_length()));
  }
  if (frame.fs != scheme.fs()) {
    err << fmt::format("note: frame fs {} Hz differs from scheme fs {} Hz; using the scheme\n",
                       frame.fs, scheme.fs());
    frame.fs = scheme.fs();
  }

  const LagWindow window = cfg.at("delta_f_hz").is_null()
                               ? LagWindow::default_for(scheme)
                               : LagWindow::from_resolution(scheme.fs(),
                                                            cfg.at("delta_f_hz").get<double>());
  if (window.M > scheme.frame_length()) {
    throw Error(ErrorCode::WindowTooWide,
                fmt::format("delta_f gives M={} > N={}", window.M, scheme.frame_length()));
  }

  std::optional<fs::path> cache_dir;
  if (!cfg.at("cache_dir").is_null()) cache_dir = cfg.at("cache_dir").get<std::string>();
  SensingCache cache(cache_dir);
  const auto lookup = cache.get(scheme, window);
  if (cache_dir) {
    err << fmt::format("sensing autocorrelation: {} ({})\n",
                       lookup.source == SensingCache::Source::Disk ? "cache hit" : "computed",
                       cache.file_for(scheme, window.M)->string());
  }

  EstimateOptions options;
  options.sensing = lookup.sensing;
  options.coverage = cfg.at("strict").get<bool>() ? CoverageMode::Strict : CoverageMode::ZeroFill;
  options.fft_length =
      cfg.at("fft_length").get<std::string>() == "fast" ? FftLength::FastPadded : FftLength::Exact;
  const Estimate est = estimate(frame, scheme, window, options);

  const std::string prefix = cfg.at("out_prefix").get<std::string>();
  const auto spectrum_csv = with_suffix(prefix, ".spectrum.csv");
  const auto spectrum_json = with_suffix(prefix, ".spectrum.json");
  const auto autocorr_csv = with_suffix(prefix, ".autocorr.csv");
  const auto coverage_csv = with_suffix(prefix, ".coverage.csv");
  io::write_file_atomic(spectrum_csv,
                        text_of([&](std::ostream& os) { io::write_spectrum_csv(os, est.spectrum); }));
  io::write_file_atomic(spectrum_json,
                        io::spectrum_to_json(est.spectrum, scheme, window).dump() + "\n");
  io::write_file_atomic(autocorr_csv, text_of([&](std::ostream& os) {
                          io::write_autocorr_csv(os, est.reconstruction.rx);
                        }));
  io::write_file_atomic(coverage_csv, text_of([&](std::ostream& os) {
                          io::write_coverage_csv(os, est.reconstruction.rx,
                                                 est.reconstruction.covered);
                        }));

  const auto& mags = est.spectrum.magnitudes;
  const auto peak = static_cast<std::size_t>(
      std::max_element(mags.begin(), mags.end()) - mags.begin());
  const auto covered = std::count(est.reconstruction.covered.begin(),
                                  est.reconstruction.covered.end(), std::uint8_t{1});
  out << fmt::format("N={} M={} bins={} covered_lags={}/{} peak_bin={} peak_hz={}\n",
                     scheme.frame_length(), window.M, est.spectrum.bins(), covered,
                     est.reconstruction.covered.size(), peak, est.spectrum.frequency(peak));
  return {{spectrum_csv, true}, {spectrum_json, true}, {autocorr_csv, true}, {coverage_csv, true}};
}

SweepConfig sweep_config_from_json(const json& cfg) {
  SweepConfig sc;
  const auto axis = parse_sweep_axis(cfg.value("axis", std::string{}));
  if (!axis) {
    throw Error(ErrorCode::InvalidConfig,
                fmt::format("unknown sweep axis '{}'", cfg.value("axis", std::string{})));
  }
  sc.axis = *axis;
  try {
    sc.grid = cfg.at("grid").get<std::vector<double>>();
    sc.trials = cfg.at("trials").get<std::size_t>();
    sc.scheme = io::scheme_from_json(cfg.at("scheme"));
    const json& sig = cfg.at("signal");
    const auto type = sig.value("type", std::string("mp"));
    if (type == "mp") {
      sc.signal = SignalKind::Mp;
    } else if (type == "bpsk") {
      sc.signal = SignalKind::Bpsk;
    } else {
      throw Error(ErrorCode::InvalidConfig, fmt::format("unknown signal type '{}'", type));
    }
    sc.components = sig.value("count", std::size_t{18});
    const auto band = sig.value("band_hz", std::vector<double>{2e9, 18e9});
    if (band.size() != 2) throw Error(ErrorCode::InvalidConfig, "band_hz needs two values");
    sc.band_lo = band[0];
    sc.band_hi = band[1];
    sc.symbol_rate = sig.value("symbol_rate_hz", 1e6);
    sc.snr_db = cfg.at("snr_db").is_null() ? std::nullopt
                                           : std::optional<double>(cfg.at("snr_db").get<double>());
    sc.delay_samples = cfg.value("delay_samples", std::int64_t{0});
    if (cfg.contains("delta_f_hz") && !cfg.at("delta_f_hz").is_null())
      sc.delta_f = cfg.at("delta_f_hz").get<double>();
    sc.base_seed = cfg.at("seed").get<std::uint64_t>();
    sc.known_count = cfg.value("known_count", true);
    sc.threads = cfg.value("threads", 0u);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  if (sc.grid.empty()) throw Error(ErrorCode::InvalidConfig, "grid is empty");
  if (sc.trials == 0) throw Error(ErrorCode::InvalidConfig, "trials must be >= 1");
  return sc;
}

std::vector<OutputFile> run_sweep(const json& cfg, std::ostream& out) {
  const std::string prefix = cfg.at("out_prefix").get<std::string>();
  const auto csv = with_suffix(prefix, ".csv");
  const auto js = with_suffix(prefix, ".json");
  const auto mode = cfg.value("mode", std::string("rmse"));

  if (mode == "timing") {
    TimingConfig tc;
    try {
      tc.scheme = io::scheme_from_json(cfg.at("scheme"));
      tc.p_grid = cfg.at("grid").get<std::vector<std::int64_t>>();
      tc.lag_fraction = cfg.value("lag_fraction", 0.1);
      tc.repeats = cfg.value("repeats", std::size_t{5});
      tc.run_oracle = cfg.value("run_oracle", true);
      tc.seed = cfg.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidConfig, e.what());
    }
    if (tc.p_grid.empty()) throw Error(ErrorCode::InvalidConfig, "grid is empty");
    const auto rows = time_benchmark(tc);
    io::write_file_atomic(csv, text_of([&](std::ostream& os) { io::write_timing_csv(os, rows); }));
    json jrows = json::array();
    for (const auto& r : rows)
      jrows.push_back({{"p", r.p}, {"N", r.N}, {"M", r.M}, {"fast_s", r.fast_s},
                       {"oracle_s", r.oracle_s}});
    io::write_file_atomic(js, json{{"config", cfg}, {"rows", jrows}}.dump(2) + "\n");
    for (const auto& r : rows)
      out << fmt::format("p={} N={} M={} fast={:.6f}s oracle={:.6f}s\n", r.p, r.N, r.M, r.fast_s,
                         r.oracle_s);
    return {{csv, false}, {js, false}};
  }
  if (mode != "rmse") throw Error(ErrorCode::InvalidConfig, fmt::format("unknown mode '{}'", mode));

  const SweepConfig sc = sweep_config_from_json(cfg);
  const auto rows = monte_carlo_sweep(sc);
  const auto timing_csv = with_suffix(prefix, ".timing.csv");
  io::write_file_atomic(csv, text_of([&](std::ostream& os) { io::write_sweep_csv(os, rows); }));
  io::write_file_atomic(timing_csv,
                        text_of([&](std::ostream& os) { io::write_sweep_timing_csv(os, rows); }));
  json jrows = json::array();
  for (const auto& r : rows)
    jrows.push_back({{"axis_value", r.axis_value},
                     {"rmse", r.rmse},
                     {"trials", r.trials},
                     {"failed", r.failed}});
  json echo = cfg;
  echo.erase("out_prefix");
  echo.erase("threads");
  io::write_file_atomic(js, json{{"config", echo}, {"rows", jrows}}.dump(2) + "\n");
  for (const auto& r : rows) {
    out << fmt::format("{}={} rmse={:.6e} trials={} failed={}\n", to_string(sc.axis),
                       r.axis_value, r.rmse, r.trials, r.failed);
  }
  return {{csv, true}, {js, true}, {timing_csv, false}};
}

std::vector<OutputFile> run_positions(const json& cfg, std::ostream& out) {
  const CoprimeScheme scheme = io::scheme_from_json(cfg.at("scheme"));
  const auto positions = sample_positions(scheme);
  const fs::path path = cfg.at("out").get<std::string>();
  io::write_file_atomic(path, text_of([&](std::ostream& os) { io::write_positions(os, positions); }));
  out << fmt::format("N={} |P|={} written to {}\n", scheme.frame_length(), positions.size(),
                     path.string());
  return {{path, true}};
}

void write_manifest(const std::string& command, const json& config,
                    const std::vector<OutputFile>& outputs, const std::string& started) {
  json files = json::array();
  for (const auto& f : outputs) {
    files.push_back({{"path", f.path.string()},
                     {"bytes", fs::file_size(f.path)},
                     {"fnv1a64", io::file_digest(f.path)},
                     {"deterministic", f.deterministic}});
  }
  const json manifest{{"tool", "cpsense"},
                      {"version", kVersion},
                      {"command", command},
                      {"config", config},
                      {"seed", config.contains("seed") ? config.at("seed") : json(nullptr)},
                      {"outputs", files},
                      {"started_at", started},
                      {"finished_at", utc_now()}};
  io::write_file_atomic(manifest_path(command, config), manifest.dump(2) + "\n");
}

int replay(const fs::path& manifest_file, const std::optional<fs::path>& out_dir, bool verify,
           std::ostream& out, std::ostream& err) {
  const json manifest = parse_json_file(manifest_file);
  if (!manifest.contains("command") || !manifest.contains("config")) {
    throw Error(ErrorCode::InvalidConfig, "not a cpsense manifest");
  }
  const auto command = manifest.at("command").get<std::string>();
  json config = manifest.at("config");
  std::map<std::string, std::string> renamed;
  if (out_dir) {
    for (const char* key : {"out", "out_prefix"}) {
      if (config.contains(key)) {
        const fs::path old = config.at(key).get<std::string>();
        config[key] = (*out_dir / old.filename()).string();
      }
    }
  }
  const auto outputs = execute(command, config, out, err);
  if (!verify) return kOk;

  int status = kOk;
  for (const auto& recorded : manifest.at("outputs")) {
    if (!recorded.at("deterministic").get<bool>()) continue;
    fs::path path = recorded.at("path").get<std::string>();
    if (out_dir) path = *out_dir / path.filename();
    const auto digest = io::file_digest(path);
    const bool same = digest == recorded.at("fnv1a64").get<std::string>();
    out << fmt::format("{} {}\n", same ? "match   " : "MISMATCH", path.string());
    if (!same) status = kFailure;
  }
  return status;
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Io: return kIo;
    case ErrorCode::LengthMismatch:
    case ErrorCode::LagWindowMismatch: return kShape;
    case ErrorCode::AllLagsUncovered:
    case ErrorCode::UncoveredLag: return kCoverage;
    default: return kConfig;
  }
}

std::vector<OutputFile> execute(const std::string& command, const json& config, std::ostream& out,
                                std::ostream& err) {
  const std::string started = utc_now();
  std::vector<OutputFile> outputs;
  if (command == "gen") {
    outputs = run_gen(config, out);
  } else if (command == "estimate") {
    outputs = run_estimate(config, out, err);
  } else if (command == "sweep") {
    outputs = run_sweep(config, out);
  } else if (command == "positions") {
    outputs = run_positions(config, out);
  } else {
    throw Error(ErrorCode::InvalidConfig, fmt::format("unknown command '{}'", command));
  }
  write_manifest(command, config, outputs, started);
  return outputs;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Power-spectrum sensing from generalized coprime samples", "cpsense"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // gen
  auto* gen = app.add_subcommand("gen", "synthesize a Nyquist frame from a scenario file");
  std::string gen_scenario, gen_out;
  std::uint64_t gen_seed = 0;
  SchemeFlags gen_scheme;
  gen->add_option("--scenario", gen_scenario, "scenario JSON")->required();
  gen->add_option("-o,--out", gen_out, "output frame path")->required();
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "seed when the scenario has none");
  gen_scheme.attach(gen);

  // estimate
  auto* est = app.add_subcommand("estimate", "reconstruct the power spectrum from coprime samples");
  std::string est_frame, est_scenario, est_out, est_cache, est_fft = "exact";
  double est_delta_f = 0.0;
  bool est_strict = false;
  SchemeFlags est_scheme;
  auto* frame_opt = est->add_option("--frame", est_frame, "binary frame written by gen");
  auto* scen_opt = est->add_option("--scenario", est_scenario, "scenario JSON to synthesize");
  frame_opt->excludes(scen_opt);
  auto* df_opt = est->add_option("--delta-f", est_delta_f, "frequency resolution in Hz");
  est->add_flag("--strict", est_strict, "fail when a lag in the window has no sample pairs");
  auto* cache_opt = est->add_option("--cache-dir", est_cache, "sensing autocorrelation cache");
  est->add_option("--fft-length", est_fft, "exact (2N) or fast (7-smooth >= 2N)")
      ->check(CLI::IsMember({"exact", "fast"}));
  est->add_option("-o,--out", est_out, "output prefix")->required();
  est_scheme.attach(est);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo RMSE sweep or timing benchmark");
  std::string sweep_config, sweep_out;
  std::size_t sweep_trials = 100;
  std::uint64_t sweep_seed = 1;
  unsigned sweep_threads = 0;
  sweep->add_option("--config", sweep_config, "sweep JSON")->required();
  sweep->add_option("-o,--out", sweep_out, "output prefix")->required();
  sweep->add_option("--trials", sweep_trials, "trials per grid point when the config has none");
  sweep->add_option("--seed", sweep_seed, "base seed when the config has none");
  sweep->add_option("--threads", sweep_threads, "worker threads (0: all cores)");

  // positions
  auto* pos = app.add_subcommand("positions", "write the sample position set, one per line");
  std::string pos_out;
  SchemeFlags pos_scheme;
  pos->add_option("-o,--out", pos_out, "output text file")->required();
  pos_scheme.attach(pos);

  // replay
  auto* rep = app.add_subcommand("replay", "re-run a command from its manifest");
  std::string rep_manifest, rep_dir;
  bool rep_verify = false;
  rep->add_option("manifest", rep_manifest, "manifest JSON")->required();
  auto* rep_dir_opt = rep->add_option("--out-dir", rep_dir, "write outputs here instead");
  rep->add_flag("--verify", rep_verify, "compare deterministic outputs against the manifest");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kConfig;
  }

  try {
    if (*gen) {
      json scenario = parse_json_file(gen_scenario);
      if (!scenario.is_object()) throw Error(ErrorCode::InvalidConfig, "scenario must be an object");
      scenario["scheme"] = gen_scheme.fill_missing(scenario.value("scheme", json::object()));
      if (!scenario.contains("seed")) scenario["seed"] = gen_seed_opt->count() ? gen_seed : 0;
      execute("gen", json{{"scenario", scenario}, {"out", gen_out}}, out, err);
    } else if (*est) {
      json cfg{{"delta_f_hz", df_opt->count() ? json(est_delta_f) : json(nullptr)},
               {"strict", est_strict},
               {"cache_dir", cache_opt->count() ? json(est_cache) : json(nullptr)},
               {"fft_length", est_fft},
               {"out_prefix", est_out}};
      if (frame_opt->count()) {
        const json header = parse_json_file(io::sidecar_path(est_frame));
        cfg["scheme"] = est_scheme.override_explicit(header.value("scheme", json::object()));
        cfg["input"] = {{"frame", est_frame}};
      } else if (scen_opt->count()) {
        json scenario = parse_json_file(est_scenario);
        if (!scenario.is_object()) throw Error(ErrorCode::InvalidConfig, "scenario must be an object");
        scenario["scheme"] = est_scheme.fill_missing(scenario.value("scheme", json::object()));
        cfg["scheme"] = scenario["scheme"];
        cfg["input"] = {{"scenario", scenario}};
      } else {
        throw Error(ErrorCode::InvalidConfig, "estimate needs --frame or --scenario");
      }
      execute("estimate", cfg, out, err);
    } else if (*sweep) {
      json cfg = parse_json_file(sweep_config);
      if (!cfg.is_object()) throw Error(ErrorCode::InvalidConfig, "sweep config must be an object");
      if (!cfg.contains("trials")) cfg["trials"] = sweep_trials;
      if (!cfg.contains("seed")) cfg["seed"] = sweep_seed;
      if (!cfg.contains("threads")) cfg["threads"] = sweep_threads;
      if (!cfg.contains("snr_db")) cfg["snr_db"] = 0.0;
      if (!cfg.contains("signal")) cfg["signal"] = json::object();
      cfg["scheme"] = SchemeFlags{}.fill_missing(cfg.value("scheme", json::object()));
      cfg["out_prefix"] = sweep_out;
      // Validate up front so a bad axis fails before any output is written.
      if (cfg.value("mode", std::string("rmse")) == "rmse") (void)sweep_config_from_json(cfg);
      execute("sweep", cfg, out, err);
    } else if (*pos) {
      execute("positions", json{{"scheme", pos_scheme.fill_missing(json::object())}, {"out", pos_out}},
              out, err);
    } else if (*rep) {
      return replay(rep_manifest, rep_dir_opt->count() ? std::optional<fs::path>(rep_dir)
                                                       : std::nullopt,
                    rep_verify, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}

}  // namespace cpsense::cli
