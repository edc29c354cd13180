#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "xqd/coincidence.hpp"
#include "xqd/config.hpp"
#include "xqd/error.hpp"
#include "xqd/event_io.hpp"
#include "xqd/imaging.hpp"
#include "xqd/montecarlo.hpp"
#include "xqd/phasematch.hpp"
#include "xqd/postselect.hpp"
#include "xqd/report.hpp"
#include "xqd/stats.hpp"

namespace xqd::cli {
namespace {

RunConfig config_from(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::Io, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error(Errc::Io, "write to '" + path + "' failed");
}

template <typename Fn>
void write_file(const std::string& path, Fn&& fn) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::Io, "cannot open '" + path + "' for writing");
  fn(f);
  if (!f) throw Error(Errc::Io, "write to '" + path + "' failed");
}

Json histogram_json(const JointHistogram& h) {
  Json cells = Json::array();
  for (const auto& [cell, n] : h.counts) cells.push_back({{"ancilla", cell.first}, {"object", cell.second}, {"windows", n}});
  return {{"window_width_ns", h.window_width_ns}, {"total_windows", h.total_windows}, {"cells", std::move(cells)}};
}

Json truth_counts(const EventStream& s) {
  std::map<TruthKind, std::uint64_t> n;
  for (const auto& e : s) ++n[e.truth];
  Json j = Json::object();
  for (const auto& [k, c] : n) j[std::string(to_string(k))] = c;
  return j;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::Parse:
    case Errc::Validation:
    case Errc::InvalidConfig:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config;
  std::uint64_t seed = 1;
  std::optional<double> duration_s;
  double transmission = 1.0;
  std::string source = "quantum";
  bool gated = false;
  std::string out;
  std::string report;
};

int simulate(const SimulateArgs& a, std::ostream& out) {
  const auto cfg = config_from(a.config);
  auto source = a.source == "classical" ? cfg.classical_source : cfg.source;
  if (a.duration_s) source.run_duration_s = *a.duration_s;
  const auto pairs = cfg.pair_sampler();
  mc::AcquisitionOptions opts;
  if (a.gated) opts.object_gate = mc::coincidence_gate(cfg.detectors);
  const auto streams =
      mc::acquire(source, pairs.pump_energy_ev(), pairs, a.transmission, cfg.detectors, a.seed, opts);
  write_events(std::filesystem::path(a.out), streams, format_for_path(a.out));

  out << "wrote " << streams.ancilla.size() << " ancilla and " << streams.object.size() << " object events to "
      << a.out << '\n';
  if (!a.report.empty()) {
    Json r = report_header("simulate", config_hash(cfg), a.seed);
    r["source"] = a.source;
    r["duration_s"] = source.run_duration_s;
    r["object_transmission"] = a.transmission;
    r["gated"] = a.gated;
    r["ancilla_events"] = streams.ancilla.size();
    r["object_events"] = streams.object.size();
    r["ancilla_truth"] = truth_counts(streams.ancilla);
    r["object_truth"] = truth_counts(streams.object);
    write_text(a.report, render_report(std::move(r)));
  }
  return kExitOk;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string config;
  std::string events;
  std::string pipeline = "quantum";
  std::string report;
  std::string out_records;
  std::optional<double> window_ns;
};

int analyze(const AnalyzeArgs& a, std::ostream& out) {
  const auto cfg = config_from(a.config);
  const auto streams = read_events(std::filesystem::path(a.events), format_for_path(a.events));
  const double window = a.window_ns.value_or(cfg.detectors.ancilla.logic_pulse_width_ns);
  const auto& f = cfg.filters;

  Json r = report_header("analyze", config_hash(cfg), std::nullopt);
  r["events_file"] = a.events;
  r["pipeline"] = a.pipeline;
  r["ancilla_events"] = streams.ancilla.size();
  r["object_events"] = streams.object.size();

  RecordList selected;
  JointHistogram histogram;
  if (a.pipeline == "classical-singles") {
    const auto band = band_events(streams.object, f);
    r["object_band_events"] = band.size();
    histogram = window_histogram(streams.ancilla, streams.object, window, WindowAnchor::AncillaTriggered);
  } else {
    const auto records = and_gate_match(streams.ancilla, streams.object, cfg.detectors.ancilla.logic_pulse_width_ns,
                                        cfg.detectors.object.logic_pulse_width_ns);
    r["and_gate_records"] = records.size();
    if (a.pipeline == "quantum") {
      selected = quantum_select(records, f);
      const auto photons = selected_events(selected);
      histogram = window_histogram(photons.ancilla, photons.object, window, WindowAnchor::AncillaTriggered);
    } else {
      selected = classical_coincidence_select(records, f, cfg.scan.band_in_mode_c);
      const auto raw = window_histogram(streams.ancilla, streams.object, window, WindowAnchor::AncillaTriggered);
      histogram = raw.total_windows > 0 ? classical_postselect(raw) : raw;
    }
    r["selected_records"] = selected.size();
  }
  r["histogram"] = histogram_json(histogram);
  if (!a.out_records.empty()) write_file(a.out_records, [&](std::ostream& o) { write_records_csv(o, selected); });

  int code = kExitOk;
  try {
    const double sigma = degree_of_correlation(histogram);
    r["sigma"] = sigma;
    out << a.pipeline << ": " << histogram.total_windows << " windows, sigma = " << sigma << '\n';
  } catch (const Error& e) {
    r["sigma"] = nullptr;
    r["status"] = std::string(to_string(e.code()));
    r["message"] = e.what();
    out << a.pipeline << ": " << to_string(e.code()) << " (" << e.what() << ")\n";
    code = kExitRuntime;
  }
  if (!a.report.empty()) write_text(a.report, render_report(std::move(r)));
  return code;
}

// -------------------------------------------------------------------- scan

struct ScanArgs {
  std::string config;
  std::string mode = "A";
  std::uint64_t seed = 1;
  std::string out_image;
  std::string report;
  unsigned threads = 0;
};

int scan(const ScanArgs& a, std::ostream& out) {
  auto cfg = config_from(a.config);
  cfg.scan.mode = parse_scan_mode(a.mode);
  const auto& source = cfg.source_for(cfg.scan.mode);
  ScanOptions opts;
  opts.threads = a.threads;
  const auto result = run_scan(cfg.object, cfg.scan, source, cfg.pair_sampler(), cfg.detectors, cfg.filters, a.seed, opts);
  if (!a.out_image.empty()) write_file(a.out_image, [&](std::ostream& o) { write_image_csv(o, result.image); });

  Json r = report_header("scan", config_hash(cfg), a.seed);
  r["scan"] = to_json(result);
  int code = kExitOk;
  try {
    const auto st = image_stats(result.image);
    r["stats"] = to_json(st);
    out << to_string(cfg.scan.mode) << ": visibility " << st.visibility << " +- " << st.visibility_error << ", snr ";
    if (st.snr.infinite()) {
      out << "INFINITE";
    } else {
      out << *st.snr.value;
    }
    out << '\n';
  } catch (const Error& e) {
    r["stats"] = {{"status", std::string(to_string(e.code()))}, {"message", e.what()}};
    out << to_string(cfg.scan.mode) << ": " << to_string(e.code()) << " (" << e.what() << ")\n";
    code = kExitRuntime;
  }
  if (!a.report.empty()) write_text(a.report, render_report(std::move(r)));
  return code;
}

// -------------------------------------------------------------- phasematch

int phasematch_cmd(const std::string& config, double signal_energy_ev, std::ostream& out) {
  const auto cfg = config_from(config);
  const auto& g = cfg.crystal;
  const auto s = phasematch::solve_phase_matching(g, signal_energy_ev);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "bragg_angle_deg      %.6f\n"
                "signal_energy_ev     %.4f\n"
                "idler_energy_ev      %.4f\n"
                "signal_angle_deg     %.6f\n"
                "idler_angle_deg      %.6f\n"
                "separation_deg       %.6f\n"
                "momentum_residual    %.3e\n",
                rad_to_deg(phasematch::bragg_angle(g)), s.signal_energy_ev, s.idler_energy_ev,
                rad_to_deg(s.signal_angle_rad), rad_to_deg(s.idler_angle_rad), rad_to_deg(s.separation_rad()),
                s.momentum_residual);
  out << buf;
  return kExitOk;
}

// ----------------------------------------------------------------- spectra

struct SpectraArgs {
  std::string config;
  double angle_deg = 0.0;
  double acceptance_deg = 0.02;
  std::optional<double> span_deg;
  int samples = 201;
  std::string out;
};

int spectra(const SpectraArgs& a, std::ostream& out) {
  const auto cfg = config_from(a.config);
  if (a.samples < 2) throw Error(Errc::Validation, "--samples must be >= 2");
  if (!(a.acceptance_deg >= 0.0)) throw Error(Errc::Validation, "--acceptance-deg must be >= 0");
  const double half = 0.5 * a.span_deg.value_or(a.acceptance_deg > 0.0 ? a.acceptance_deg : 0.02);
  const auto curve = phasematch::angle_energy_curve(cfg.crystal, deg_to_rad(a.angle_deg - half),
                                                    deg_to_rad(a.angle_deg + half), a.samples);
  if (!a.out.empty()) write_file(a.out, [&](std::ostream& o) { write_curve_csv(o, curve); });
  const auto band =
      phasematch::predict_spectrum(cfg.crystal, deg_to_rad(a.angle_deg), deg_to_rad(a.acceptance_deg));
  char buf[256];
  std::snprintf(buf, sizeof buf, "band_center_ev %.4f\nband_width_ev  %.4f\nband_low_ev    %.4f\nband_high_ev   %.4f\n",
                band.center_ev, band.width_ev, band.low_ev, band.high_ev);
  out << buf;
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"x-ray PDC quantum-enhanced detection simulator. Angles are degrees and energies eV at the command line."};
  app.require_subcommand(1);
  app.set_version_flag("--version", XQD_VERSION);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo acquisition written to an event file (.bin or .csv)");
  c_sim->add_option("--config", sim.config, "INI run configuration")->check(CLI::ExistingFile);
  c_sim->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  c_sim->add_option("--duration-s", sim.duration_s, "Acquisition time in seconds (default: the source run_duration_s)")
      ->check(CLI::NonNegativeNumber);
  c_sim->add_option("--transmission", sim.transmission, "Object transmission in [0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  c_sim->add_option("--source", sim.source, "Illumination profile")
      ->check(CLI::IsMember({"quantum", "classical"}))
      ->capture_default_str();
  c_sim->add_flag("--gated", sim.gated, "Only simulate object singles near ancilla emissions");
  c_sim->add_option("--out", sim.out, "Event file")->required();
  c_sim->add_option("--report", sim.report, "JSON run report");

  AnalyzeArgs an;
  auto* c_an = app.add_subcommand("analyze", "Coincidence analysis of an event file");
  c_an->add_option("--config", an.config, "INI run configuration")->check(CLI::ExistingFile);
  c_an->add_option("--events", an.events, "Event file (.bin or .csv)")->required();
  c_an->add_option("--pipeline", an.pipeline, "Selection pipeline")
      ->check(CLI::IsMember({"quantum", "classical-coinc", "classical-singles"}))
      ->capture_default_str();
  c_an->add_option("--window-ns", an.window_ns, "Histogram window (default: ancilla logic pulse width)")
      ->check(CLI::PositiveNumber);
  c_an->add_option("--out-records", an.out_records, "CSV of selected coincidence records");
  c_an->add_option("--report", an.report, "JSON run report");

  ScanArgs sc;
  auto* c_sc = app.add_subcommand("scan", "Slit scan of the object in one detection mode");
  c_sc->add_option("--config", sc.config, "INI run configuration")->check(CLI::ExistingFile);
  c_sc->add_option("--mode", sc.mode, "A (quantum), B (classical singles) or C (classical coincidence)")
      ->check(CLI::IsMember({"A", "B", "C", "a", "b", "c"}))
      ->capture_default_str();
  c_sc->add_option("--seed", sc.seed, "RNG seed")->capture_default_str();
  c_sc->add_option("--threads", sc.threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
  c_sc->add_option("--out-image", sc.out_image, "Image CSV (position_mm,counts,error)");
  c_sc->add_option("--report", sc.report, "JSON run report");

  std::string pm_config;
  double pm_energy = 11150.0;
  auto* c_pm = app.add_subcommand("phasematch", "Solve the phase matching for one signal energy");
  c_pm->add_option("--config", pm_config, "INI run configuration")->check(CLI::ExistingFile);
  c_pm->add_option("--signal-energy-ev", pm_energy, "Signal photon energy, eV")->required();

  SpectraArgs sp;
  auto* c_sp = app.add_subcommand("spectra", "Angle-energy curve and the band seen through an acceptance window");
  c_sp->add_option("--config", sp.config, "INI run configuration")->check(CLI::ExistingFile);
  c_sp->add_option("--angle-deg", sp.angle_deg, "Detector angle from the pump direction, degrees")->required();
  c_sp->add_option("--acceptance-deg", sp.acceptance_deg, "Full angular acceptance, degrees")->capture_default_str();
  c_sp->add_option("--span-deg", sp.span_deg, "Width of the sampled curve (default: the acceptance)");
  c_sp->add_option("--samples", sp.samples, "Curve samples")->capture_default_str();
  c_sp->add_option("--out", sp.out, "Curve CSV");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (c_sim->parsed()) return simulate(sim, out);
    if (c_an->parsed()) return analyze(an, out);
    if (c_sc->parsed()) return scan(sc, out);
    if (c_pm->parsed()) return phasematch_cmd(pm_config, pm_energy, out);
    if (c_sp->parsed()) return spectra(sp, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace xqd::cli
