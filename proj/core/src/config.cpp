#include "xqd/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "xqd/crystal_table.hpp"
#include "xqd/error.hpp"

namespace xqd {
namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void bad_value(const std::string& where, const std::string& what) {
  throw Error(Errc::Validation, where + ": " + what);
}

double to_number(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    bad_value(where, "expected a number, got '" + t + "'");
  }
  return v;
}

std::vector<double> to_numbers(const std::string& text, const std::string& where) {
  std::string t = text;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(to_number(tok, where));
  return out;
}

bool to_bool(const std::string& text, const std::string& where) {
  const std::string t = lower(trim(text));
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  bad_value(where, "expected true or false, got '" + t + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Degree text that parses back to the same radian value.
std::string fmt_deg(double rad) {
  const double d = rad_to_deg(rad);
  double up = d;
  double down = d;
  for (int i = 0; i < 8; ++i) {
    if (deg_to_rad(up) == rad) return fmt(up);
    if (deg_to_rad(down) == rad) return fmt(down);
    up = std::nextafter(up, INFINITY);
    down = std::nextafter(down, -INFINITY);
  }
  return fmt(d);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s;
}

struct NoiseKeys {
  std::optional<double> low;
  std::optional<double> high;
  std::vector<double> line_energies;
  std::vector<double> line_weights;
  bool touched = false;
};

using Handler = std::function<void(const std::string& value, const std::string& where)>;
using Section = std::map<std::string, Handler>;

void add_source_keys(Section& s, mc::SourceConfig& src, NoiseKeys& noise) {
  s["pdc_pair_rate_hz"] = [&](auto& v, auto& w) { src.pdc_pair_rate_hz = to_number(v, w); };
  s["noise_rate_ancilla_hz"] = [&](auto& v, auto& w) { src.noise_rate_ancilla_hz = to_number(v, w); };
  s["noise_rate_object_ambient_hz"] = [&](auto& v, auto& w) { src.noise_rate_object_ambient_hz = to_number(v, w); };
  s["noise_rate_object_transmitted_hz"] = [&](auto& v, auto& w) {
    src.noise_rate_object_transmitted_hz = to_number(v, w);
  };
  s["object_fluorescence_coefficient_hz"] = [&](auto& v, auto& w) {
    src.object_fluorescence_coefficient_hz = to_number(v, w);
  };
  s["run_duration_s"] = [&](auto& v, auto& w) { src.run_duration_s = to_number(v, w); };
  s["noise_continuum_low_ev"] = [&](auto& v, auto& w) { noise.low = to_number(v, w), noise.touched = true; };
  s["noise_continuum_high_ev"] = [&](auto& v, auto& w) { noise.high = to_number(v, w), noise.touched = true; };
  s["noise_line_energies_ev"] = [&](auto& v, auto& w) { noise.line_energies = to_numbers(v, w), noise.touched = true; };
  s["noise_line_weights"] = [&](auto& v, auto& w) { noise.line_weights = to_numbers(v, w), noise.touched = true; };
}

void add_detector_keys(Section& s, mc::DetectorConfig& d) {
  s["quantum_efficiency"] = [&](auto& v, auto& w) { d.quantum_efficiency = to_number(v, w); };
  s["energy_sigma_ev"] = [&](auto& v, auto& w) { d.energy_sigma_ev = to_number(v, w); };
  s["dead_time_ns"] = [&](auto& v, auto& w) { d.dead_time_ns = to_number(v, w); };
  s["pulse_width_ns"] = [&](auto& v, auto& w) { d.logic_pulse_width_ns = to_number(v, w); };
  s["calibration_gain"] = [&](auto& v, auto& w) { d.calibration_gain = to_number(v, w); };
}

void apply_noise(mc::SourceConfig& src, const NoiseKeys& k, const std::string& section) {
  if (!k.touched) return;
  const std::string where = "[" + section + "]";
  if (k.line_energies.size() != k.line_weights.size()) {
    bad_value(where, "noise_line_energies_ev and noise_line_weights differ in length");
  }
  // Start from the current continuum so partial overrides keep the rest.
  double low = 9000.0;
  double high = 13000.0;
  if (!src.noise_spectrum.segments().empty()) {
    low = src.noise_spectrum.segments().front().low_ev;
    high = src.noise_spectrum.segments().front().high_ev;
  }
  low = k.low.value_or(low);
  high = k.high.value_or(high);
  std::vector<mc::SpectrumLine> lines;
  double line_total = 0.0;
  for (std::size_t i = 0; i < k.line_energies.size(); ++i) {
    lines.push_back({k.line_energies[i], k.line_weights[i]});
    line_total += k.line_weights[i];
  }
  std::vector<mc::SpectrumSegment> segments;
  const double rest = 1.0 - line_total;
  if (rest < -1e-12) bad_value(where, "noise_line_weights sum to more than 1");
  if (rest > 1e-12) segments.push_back({low, high, rest});
  src.noise_spectrum = mc::EnergySpectrum(std::move(segments), std::move(lines));
}

template <typename F>
void rethrow_as_validation(const std::string& section, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidConfig || e.code() == Errc::Unsolvable) {
      throw Error(Errc::Validation, "[" + section + "] " + e.what());
    }
    throw;
  }
}

}  // namespace

mc::PairEnergySampler RunConfig::pair_sampler() const {
  return mc::PairEnergySampler::from_phase_matching(crystal, angular_acceptance_rad);
}

const mc::SourceConfig& RunConfig::source_for(ScanMode mode) const {
  return mode == ScanMode::A_Quantum ? source : classical_source;
}

void validate(const RunConfig& c) {
  rethrow_as_validation("crystal", [&] {
    phasematch::validate(c.crystal);
    if (!(std::isfinite(c.angular_acceptance_rad) && c.angular_acceptance_rad >= 0.0)) {
      throw Error(Errc::InvalidConfig, "angular_acceptance_deg must be >= 0");
    }
  });
  rethrow_as_validation("source", [&] { mc::validate(c.source); });
  rethrow_as_validation("source.classical", [&] { mc::validate(c.classical_source); });
  rethrow_as_validation("detector.ancilla", [&] { mc::validate(c.detectors.ancilla); });
  rethrow_as_validation("detector.object", [&] { mc::validate(c.detectors.object); });
  rethrow_as_validation("filters", [&] { validate(c.filters); });
  rethrow_as_validation("scan", [&] { validate(c.scan); });
  rethrow_as_validation("object", [&] { validate(c.object); });
  for (const auto* s : {&c.source, &c.classical_source}) {
    if (s->noise_spectrum.segments().size() > 1) {
      throw Error(Errc::Validation, "[source] only one noise continuum segment is supported");
    }
  }
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::Parse, std::string("config syntax: ") + e.what());
  }

  RunConfig c;
  NoiseKeys quantum_noise;
  NoiseKeys classical_noise;
  std::optional<std::string> material;
  std::optional<std::string> table_path;
  bool lattice_given = false;
  bool filter_pump_given = false;
  bool filter_center_given = false;
  std::vector<double> slit_centers;
  std::vector<double> slit_widths;
  std::vector<double> slit_transmissions;
  bool slits_given = false;

  std::map<std::string, Section> sections;
  {
    auto& s = sections["crystal"];
    s["material"] = [&](auto& v, auto&) { material = trim(v); };
    s["crystal_table"] = [&](auto& v, auto&) { table_path = trim(v); };
    s["lattice_constant_angstrom"] = [&](auto& v, auto& w) {
      c.crystal.lattice_constant_angstrom = to_number(v, w);
      lattice_given = true;
    };
    s["miller_indices"] = [&](auto& v, auto& w) {
      const auto n = to_numbers(v, w);
      if (n.size() != 3) bad_value(w, "expected three integers");
      for (double x : n) {
        if (x != std::floor(x)) bad_value(w, "Miller indices must be integers");
      }
      c.crystal.miller = {static_cast<int>(n[0]), static_cast<int>(n[1]), static_cast<int>(n[2])};
    };
    s["pump_energy_ev"] = [&](auto& v, auto& w) { c.crystal.pump_energy_ev = to_number(v, w); };
    s["pump_deviation_deg"] = [&](auto& v, auto& w) { c.crystal.pump_deviation_rad = deg_to_rad(to_number(v, w)); };
    s["geometry_mode"] = [&](auto& v, auto& w) {
      if (lower(trim(v)) != "laue") bad_value(w, "only 'laue' geometry is supported");
      c.crystal.mode = phasematch::GeometryMode::Laue;
    };
    s["angular_acceptance_deg"] = [&](auto& v, auto& w) { c.angular_acceptance_rad = deg_to_rad(to_number(v, w)); };
  }
  add_source_keys(sections["source"], c.source, quantum_noise);
  add_source_keys(sections["source.classical"], c.classical_source, classical_noise);
  add_detector_keys(sections["detector.ancilla"], c.detectors.ancilla);
  add_detector_keys(sections["detector.object"], c.detectors.object);
  {
    auto& s = sections["filters"];
    s["pump_energy_ev"] = [&](auto& v, auto& w) {
      c.filters.pump_energy_ev = to_number(v, w);
      filter_pump_given = true;
    };
    s["energy_sum_tolerance_ev"] = [&](auto& v, auto& w) { c.filters.energy_sum_tolerance_ev = to_number(v, w); };
    s["degeneracy_center_ev"] = [&](auto& v, auto& w) {
      c.filters.degeneracy_center_ev = to_number(v, w);
      filter_center_given = true;
    };
    s["degeneracy_band_width_ev"] = [&](auto& v, auto& w) { c.filters.degeneracy_band_width_ev = to_number(v, w); };
    s["time_cut_ns"] = [&](auto& v, auto& w) { c.filters.time_cut_ns = to_number(v, w); };
  }
  {
    auto& s = sections["scan"];
    s["positions_mm"] = [&](auto& v, auto& w) { c.scan.positions_mm = to_numbers(v, w); };
    s["detector_slit_width_mm"] = [&](auto& v, auto& w) { c.scan.detector_slit_width_mm = to_number(v, w); };
    s["photon_budget_per_position"] = [&](auto& v, auto& w) { c.scan.photon_budget_per_position = to_number(v, w); };
    s["budget_normalization"] = [&](auto& v, auto& w) {
      const auto t = lower(trim(v));
      if (t == "mean") c.scan.budget_normalization = BudgetNormalization::Mean;
      else if (t == "peak") c.scan.budget_normalization = BudgetNormalization::Peak;
      else bad_value(w, "expected 'mean' or 'peak'");
    };
    s["mode"] = [&](auto& v, auto& w) {
      try {
        c.scan.mode = parse_scan_mode(trim(v));
      } catch (const Error& e) {
        bad_value(w, e.what());
      }
    };
    s["band_in_mode_c"] = [&](auto& v, auto& w) { c.scan.band_in_mode_c = to_bool(v, w); };
  }
  {
    auto& s = sections["object"];
    s["slit_centers_mm"] = [&](auto& v, auto& w) { slit_centers = to_numbers(v, w), slits_given = true; };
    s["slit_widths_mm"] = [&](auto& v, auto& w) { slit_widths = to_numbers(v, w), slits_given = true; };
    s["slit_transmissions"] = [&](auto& v, auto& w) { slit_transmissions = to_numbers(v, w), slits_given = true; };
    s["background_transmission"] = [&](auto& v, auto& w) { c.object.background_transmission = to_number(v, w); };
  }

  for (const auto& [name, node] : tree) {
    if (node.empty()) throw Error(Errc::Validation, "key '" + name + "' must be inside a section");
    const auto sec = sections.find(name);
    if (sec == sections.end()) throw Error(Errc::Validation, "unknown section [" + name + "]");
    for (const auto& [key, value] : node) {
      const std::string where = "[" + name + "] " + key;
      const auto h = sec->second.find(key);
      if (h == sec->second.end()) throw Error(Errc::Validation, "unknown key " + where);
      h->second(value.data(), where);
    }
  }

  if (material) {
    if (lattice_given) {
      throw Error(Errc::Validation, "[crystal] give either material or lattice_constant_angstrom, not both");
    }
    std::filesystem::path p = table_path ? std::filesystem::path(*table_path) : phasematch::CrystalTable::default_path();
    if (table_path && p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.crystal.lattice_constant_angstrom = phasematch::CrystalTable::load(p).lattice_constant(*material);
  } else if (table_path) {
    throw Error(Errc::Validation, "[crystal] crystal_table given without material");
  }
  if (!filter_pump_given) c.filters.pump_energy_ev = c.crystal.pump_energy_ev;
  if (!filter_center_given) c.filters.degeneracy_center_ev = 0.5 * c.filters.pump_energy_ev;

  apply_noise(c.source, quantum_noise, "source");
  apply_noise(c.classical_source, classical_noise, "source.classical");
  rethrow_as_validation("source", [&] { c.source.noise_spectrum.validate(); });
  rethrow_as_validation("source.classical", [&] { c.classical_source.noise_spectrum.validate(); });

  if (slits_given) {
    const std::size_t n = slit_centers.size();
    if (slit_widths.size() != n || slit_transmissions.size() != n) {
      throw Error(Errc::Validation, "[object] slit_centers_mm, slit_widths_mm and slit_transmissions differ in length");
    }
    c.object.slits.clear();
    for (std::size_t i = 0; i < n; ++i) c.object.slits.push_back({slit_centers[i], slit_widths[i], slit_transmissions[i]});
  }

  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

std::string dump_config(const RunConfig& c) {
  std::ostringstream o;
  auto source = [&](const char* name, const mc::SourceConfig& s) {
    o << "\n[" << name << "]\n";
    o << "pdc_pair_rate_hz = " << fmt(s.pdc_pair_rate_hz) << '\n';
    o << "noise_rate_ancilla_hz = " << fmt(s.noise_rate_ancilla_hz) << '\n';
    o << "noise_rate_object_ambient_hz = " << fmt(s.noise_rate_object_ambient_hz) << '\n';
    o << "noise_rate_object_transmitted_hz = " << fmt(s.noise_rate_object_transmitted_hz) << '\n';
    o << "object_fluorescence_coefficient_hz = " << fmt(s.object_fluorescence_coefficient_hz) << '\n';
    o << "run_duration_s = " << fmt(s.run_duration_s) << '\n';
    if (!s.noise_spectrum.segments().empty()) {
      o << "noise_continuum_low_ev = " << fmt(s.noise_spectrum.segments().front().low_ev) << '\n';
      o << "noise_continuum_high_ev = " << fmt(s.noise_spectrum.segments().front().high_ev) << '\n';
    }
    std::vector<double> e;
    std::vector<double> w;
    for (const auto& l : s.noise_spectrum.lines()) e.push_back(l.energy_ev), w.push_back(l.weight);
    o << "noise_line_energies_ev = " << fmt_list(e) << '\n';
    o << "noise_line_weights = " << fmt_list(w) << '\n';
  };
  auto detector = [&](const char* name, const mc::DetectorConfig& d) {
    o << "\n[" << name << "]\n";
    o << "quantum_efficiency = " << fmt(d.quantum_efficiency) << '\n';
    o << "energy_sigma_ev = " << fmt(d.energy_sigma_ev) << '\n';
    o << "dead_time_ns = " << fmt(d.dead_time_ns) << '\n';
    o << "pulse_width_ns = " << fmt(d.logic_pulse_width_ns) << '\n';
    o << "calibration_gain = " << fmt(d.calibration_gain) << '\n';
  };

  const auto& m = c.crystal.miller;
  o << "[crystal]\n";
  o << "lattice_constant_angstrom = " << fmt(c.crystal.lattice_constant_angstrom) << '\n';
  o << "miller_indices = " << m.h << ' ' << m.k << ' ' << m.l << '\n';
  o << "pump_energy_ev = " << fmt(c.crystal.pump_energy_ev) << '\n';
  o << "pump_deviation_deg = " << fmt_deg(c.crystal.pump_deviation_rad) << '\n';
  o << "geometry_mode = laue\n";
  o << "angular_acceptance_deg = " << fmt_deg(c.angular_acceptance_rad) << '\n';
  source("source", c.source);
  source("source.classical", c.classical_source);
  detector("detector.ancilla", c.detectors.ancilla);
  detector("detector.object", c.detectors.object);
  o << "\n[filters]\n";
  o << "pump_energy_ev = " << fmt(c.filters.pump_energy_ev) << '\n';
  o << "energy_sum_tolerance_ev = " << fmt(c.filters.energy_sum_tolerance_ev) << '\n';
  o << "degeneracy_center_ev = " << fmt(c.filters.degeneracy_center_ev) << '\n';
  o << "degeneracy_band_width_ev = " << fmt(c.filters.degeneracy_band_width_ev) << '\n';
  o << "time_cut_ns = " << fmt(c.filters.time_cut_ns) << '\n';
  o << "\n[scan]\n";
  o << "positions_mm = " << fmt_list(c.scan.positions_mm) << '\n';
  o << "detector_slit_width_mm = " << fmt(c.scan.detector_slit_width_mm) << '\n';
  o << "photon_budget_per_position = " << fmt(c.scan.photon_budget_per_position) << '\n';
  o << "budget_normalization = " << (c.scan.budget_normalization == BudgetNormalization::Mean ? "mean" : "peak") << '\n';
  o << "mode = " << to_string(c.scan.mode).substr(0, 1) << '\n';
  o << "band_in_mode_c = " << (c.scan.band_in_mode_c ? "true" : "false") << '\n';
  o << "\n[object]\n";
  std::vector<double> centers, widths, trans;
  for (const auto& s : c.object.slits) {
    centers.push_back(s.center_mm);
    widths.push_back(s.width_mm);
    trans.push_back(s.transmission);
  }
  o << "slit_centers_mm = " << fmt_list(centers) << '\n';
  o << "slit_widths_mm = " << fmt_list(widths) << '\n';
  o << "slit_transmissions = " << fmt_list(trans) << '\n';
  o << "background_transmission = " << fmt(c.object.background_transmission) << '\n';
  return o.str();
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(dump_config(config))));
  return buf;
}

}  // namespace xqd
