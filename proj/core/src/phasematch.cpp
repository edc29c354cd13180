#include "xqd/phasematch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "xqd/error.hpp"

namespace xqd::phasematch {
namespace {

Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double norm(Vec2 a) { return std::hypot(a.x, a.y); }
Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

struct Kinematics {
  Vec2 diffracted;
  double diffracted_angle;
  double pump_norm;
  double signal_norm;
  double idler_norm;
};

Vec2 mismatch(const Kinematics& kin, double signal_angle, double idler_angle) {
  return kin.signal_norm * unit(signal_angle) + kin.idler_norm * unit(idler_angle) - kin.diffracted;
}

std::string describe(double value) {
  std::ostringstream out;
  out.precision(6);
  out << value;
  return out.str();
}

// Damped Newton on (signal_angle, idler_angle). Returns false when it
// stalls or lands on the mirrored branch.
bool newton(const Kinematics& kin, double tolerance, int max_iterations, double& signal_angle,
            double& idler_angle, double& residual) {
  const double opening = std::acos(std::clamp(norm(kin.diffracted) / kin.pump_norm, -1.0, 1.0));
  double ts = kin.diffracted_angle + opening;
  double ti = kin.diffracted_angle - opening;
  double r = norm(mismatch(kin, ts, ti));

  for (int it = 0; it < max_iterations && r > 1e-3 * tolerance; ++it) {
    const Vec2 f = mismatch(kin, ts, ti);
    // Columns of the Jacobian: d/d(ts) and d/d(ti).
    const double a = -kin.signal_norm * std::sin(ts);
    const double c = kin.signal_norm * std::cos(ts);
    const double b = -kin.idler_norm * std::sin(ti);
    const double d = kin.idler_norm * std::cos(ti);
    const double det = a * d - b * c;
    if (std::abs(det) < std::numeric_limits<double>::min()) break;
    const double ds = -(d * f.x - b * f.y) / det;
    const double di = -(-c * f.x + a * f.y) / det;

    double step = 1.0;
    bool improved = false;
    for (int h = 0; h < 40; ++h, step *= 0.5) {
      const double rn = norm(mismatch(kin, ts + step * ds, ti + step * di));
      if (rn < r) {
        ts += step * ds;
        ti += step * di;
        r = rn;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }

  const double side_s = std::remainder(ts - kin.diffracted_angle, 2.0 * kPi);
  const double side_i = std::remainder(ti - kin.diffracted_angle, 2.0 * kPi);
  signal_angle = kin.diffracted_angle + side_s;
  idler_angle = kin.diffracted_angle + side_i;
  residual = r;
  return r <= tolerance && side_s > 0.0 && side_i <= 0.0;
}

// Bracketing fallback: scan the signal direction over (0, pi) beyond Q and
// bisect on |Q - k_s| - |k_i|, which grows monotonically with the offset.
bool bracket(const Kinematics& kin, double tolerance, int samples, double& signal_angle,
             double& idler_angle, double& residual) {
  auto f = [&](double offset) {
    return norm(kin.diffracted - kin.signal_norm * unit(kin.diffracted_angle + offset)) - kin.idler_norm;
  };
  double lo = 0.0;
  double flo = f(lo);
  double hi = lo;
  bool found = false;
  for (int i = 1; i <= samples; ++i) {
    hi = kPi * i / samples;
    const double fhi = f(hi);
    if ((flo <= 0.0) != (fhi <= 0.0)) {
      found = true;
      break;
    }
    lo = hi;
    flo = fhi;
  }
  if (!found) return false;

  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) <= 0.0) == (flo <= 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double offset = 0.5 * (lo + hi);
  signal_angle = kin.diffracted_angle + offset;
  const Vec2 idler = kin.diffracted - kin.signal_norm * unit(signal_angle);
  idler_angle = std::atan2(idler.y, idler.x);
  residual = norm(mismatch(kin, signal_angle, idler_angle));
  return residual <= tolerance;
}

}  // namespace

void validate(const CrystalGeometry& geometry) {
  if (!(geometry.lattice_constant_angstrom > 0.0) || !std::isfinite(geometry.lattice_constant_angstrom)) {
    throw Error(Errc::InvalidConfig, "lattice_constant must be positive");
  }
  if (!(geometry.pump_energy_ev > 0.0) || !std::isfinite(geometry.pump_energy_ev)) {
    throw Error(Errc::InvalidConfig, "pump_energy must be positive");
  }
  if (!std::isfinite(geometry.pump_deviation_rad)) {
    throw Error(Errc::InvalidConfig, "pump_deviation must be finite");
  }
  bragg_angle(geometry);
}

double d_spacing(const CrystalGeometry& geometry) {
  const auto& m = geometry.miller;
  const double n2 = static_cast<double>(m.h) * m.h + static_cast<double>(m.k) * m.k +
                    static_cast<double>(m.l) * m.l;
  return geometry.lattice_constant_angstrom / std::sqrt(n2);
}

double bragg_angle(const CrystalGeometry& geometry) {
  const auto& m = geometry.miller;
  if (m.h == 0 && m.k == 0 && m.l == 0) {
    throw Error(Errc::InvalidConfig, "Miller indices (0,0,0) do not define a reflection");
  }
  // sin(theta) = |G| / (2 |k_p|) = pi / (d |k_p|)
  const double ratio = kPi / (d_spacing(geometry) * wavenumber(geometry.pump_energy_ev));
  if (ratio > 1.0) {
    throw Error(Errc::Unsolvable, "Bragg condition unsolvable: lambda / (2 d) = " + describe(ratio));
  }
  return std::asin(ratio);
}

ScatteringVectors scattering_vectors(const CrystalGeometry& geometry) {
  const double theta = bragg_angle(geometry) + geometry.pump_deviation_rad;
  const double k = wavenumber(geometry.pump_energy_ev);
  const double g = 2.0 * kPi / d_spacing(geometry);

  ScatteringVectors out;
  out.pump = {k, 0.0};
  // Plane normal chosen so that k_p . n = -k sin(theta).
  out.reciprocal = {-g * std::sin(theta), g * std::cos(theta)};
  out.diffracted = out.pump + out.reciprocal;
  out.pump_norm = k;
  out.diffracted_norm = norm(out.diffracted);
  out.diffracted_angle_rad = std::atan2(out.diffracted.y, out.diffracted.x);
  return out;
}

PhaseMatchSolution solve_phase_matching(const CrystalGeometry& geometry, double signal_energy_ev,
                                        const SolverOptions& options) {
  validate(geometry);
  const double pump = geometry.pump_energy_ev;
  if (!(signal_energy_ev > 0.0 && signal_energy_ev < pump)) {
    throw Error(Errc::InvalidConfig, "signal energy must lie strictly between 0 and the pump energy");
  }

  const ScatteringVectors sv = scattering_vectors(geometry);
  PhaseMatchSolution out;
  out.idler_energy_ev = pump - signal_energy_ev;
  out.signal_energy_ev = pump - out.idler_energy_ev;

  const Kinematics kin{sv.diffracted, sv.diffracted_angle_rad, sv.pump_norm, wavenumber(out.signal_energy_ev),
                       wavenumber(out.idler_energy_ev)};
  const double tolerance = options.relative_tolerance * sv.pump_norm;
  // The triangle k_s + k_i = Q must close with a nonzero opening angle.
  if (!(sv.diffracted_norm < kin.signal_norm + kin.idler_norm - tolerance) ||
      !(sv.diffracted_norm > std::abs(kin.signal_norm - kin.idler_norm))) {
    throw Error(Errc::NoSolution, "no phase-matching solution at signal energy " + describe(signal_energy_ev) +
                                      " eV; |k_p + G| = " + describe(sv.diffracted_norm) +
                                      " 1/A admits no momentum triangle");
  }

  double ts = 0.0;
  double ti = 0.0;
  double newton_residual = std::numeric_limits<double>::infinity();
  if (newton(kin, tolerance, options.max_newton_iterations, ts, ti, newton_residual)) {
    out.signal_angle_rad = ts;
    out.idler_angle_rad = ti;
    out.momentum_residual = newton_residual;
    return out;
  }

  double bracket_residual = std::numeric_limits<double>::infinity();
  if (bracket(kin, tolerance, options.bracket_samples, ts, ti, bracket_residual)) {
    out.signal_angle_rad = ts;
    out.idler_angle_rad = ti;
    out.momentum_residual = bracket_residual;
    return out;
  }

  const double best = std::min(newton_residual, bracket_residual);
  throw Error(Errc::NoSolution, "no phase-matching solution at signal energy " + describe(signal_energy_ev) +
                                    " eV; best residual " + describe(best) + " 1/A");
}

PhaseMatchSolution solve_for_signal_angle(const CrystalGeometry& geometry, double signal_angle_rad,
                                          const SolverOptions& options) {
  validate(geometry);
  const ScatteringVectors sv = scattering_vectors(geometry);
  const double pump = geometry.pump_energy_ev;
  const double q = sv.diffracted_norm / sv.pump_norm;
  if (!(q < 1.0)) {
    throw Error(Errc::NoSolution, "pump deviation leaves |k_p + G| >= |k_p|; no down-converted pairs");
  }

  // Triangle inequality limits the signal energy to pump * (1 -+ q) / 2.
  const double margin = 1e-9 * pump;
  const double e_lo = 0.5 * pump * (1.0 - q) + margin;
  const double e_hi = 0.5 * pump * (1.0 + q) - margin;

  auto angle_at = [&](double energy) { return solve_phase_matching(geometry, energy, options).signal_angle_rad; };

  const double angle_lo_energy = angle_at(e_lo);  // largest angle
  const double angle_hi_energy = angle_at(e_hi);  // smallest angle
  if (!(signal_angle_rad <= angle_lo_energy && signal_angle_rad >= angle_hi_energy)) {
    throw Error(Errc::NoSolution, "detector angle " + describe(rad_to_deg(signal_angle_rad)) +
                                      " deg lies outside the phase-matched band");
  }

  auto g = [&](double energy) { return angle_at(energy) - signal_angle_rad; };
  std::uintmax_t max_iter = 200;
  const auto tol = boost::math::tools::eps_tolerance<double>(50);
  const auto [a, b] = boost::math::tools::toms748_solve(g, e_lo, e_hi, g(e_lo), g(e_hi), tol, max_iter);
  const double energy = std::abs(g(a)) <= std::abs(g(b)) ? a : b;
  return solve_phase_matching(geometry, energy, options);
}

std::vector<CurveSample> angle_energy_curve(const CrystalGeometry& geometry, double angle_min_rad,
                                            double angle_max_rad, int n_samples, const SolverOptions& options) {
  if (n_samples < 2) throw Error(Errc::InvalidConfig, "angle_energy_curve needs at least 2 samples");
  if (!(angle_max_rad > angle_min_rad)) throw Error(Errc::InvalidConfig, "angle_max must exceed angle_min");
  validate(geometry);

  std::vector<CurveSample> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    CurveSample s;
    s.detector_angle_rad = angle_min_rad + (angle_max_rad - angle_min_rad) * i / (n_samples - 1);
    try {
      s.solution = solve_for_signal_angle(geometry, s.detector_angle_rad, options);
    } catch (const Error& e) {
      if (e.code() != Errc::NoSolution) throw;
    }
    out.push_back(s);
  }
  return out;
}

EnergyBand predict_spectrum(const CrystalGeometry& geometry, double detector_angle_rad,
                            double angular_acceptance_rad, const SolverOptions& options) {
  if (!(angular_acceptance_rad >= 0.0)) throw Error(Errc::InvalidConfig, "angular acceptance must be >= 0");
  const double half = 0.5 * angular_acceptance_rad;
  const double e1 = solve_for_signal_angle(geometry, detector_angle_rad - half, options).signal_energy_ev;
  const double e2 =
      half > 0.0 ? solve_for_signal_angle(geometry, detector_angle_rad + half, options).signal_energy_ev : e1;
  EnergyBand band;
  band.low_ev = std::min(e1, e2);
  band.high_ev = std::max(e1, e2);
  band.center_ev = 0.5 * (band.low_ev + band.high_ev);
  band.width_ev = band.high_ev - band.low_ev;
  return band;
}

PhaseMatchSolution degenerate_solution(const CrystalGeometry& geometry, const SolverOptions& options) {
  return solve_phase_matching(geometry, 0.5 * geometry.pump_energy_ev, options);
}

double deviation_for_separation(const CrystalGeometry& geometry, double separation_rad,
                                const SolverOptions& options) {
  if (!(separation_rad > 0.0 && separation_rad < kPi)) {
    throw Error(Errc::InvalidConfig, "target separation must lie in (0, pi)");
  }
  auto separation_at = [&](double deviation) {
    CrystalGeometry g = geometry;
    g.pump_deviation_rad = deviation;
    return degenerate_solution(g, options).separation_rad() - separation_rad;
  };
  // Separation grows like sqrt(deviation); find an upper bracket.
  double lo = 1e-12;
  double hi = 1e-6;
  while (separation_at(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 0.5 * kPi) throw Error(Errc::NoSolution, "no pump deviation reaches the requested separation");
  }
  std::uintmax_t max_iter = 200;
  const auto tol = boost::math::tools::eps_tolerance<double>(50);
  const auto [a, b] = boost::math::tools::toms748_solve(separation_at, lo, hi, tol, max_iter);
  return 0.5 * (a + b);
}

DetectorPairEnergies offset_detector_energies(const CrystalGeometry& geometry, double separation_rad,
                                              const SolverOptions& options) {
  const PhaseMatchSolution degenerate = degenerate_solution(geometry, options);
  DetectorPairEnergies out;
  out.separation_rad = separation_rad;
  out.object_angle_rad = degenerate.idler_angle_rad + separation_rad;
  const PhaseMatchSolution at_object = solve_for_signal_angle(geometry, out.object_angle_rad, options);
  out.object_energy_ev = at_object.signal_energy_ev;
  out.ancilla_energy_ev = geometry.pump_energy_ev - at_object.signal_energy_ev;
  return out;
}

}  // namespace xqd::phasematch
