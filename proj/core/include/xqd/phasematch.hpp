#pragma once

// In-plane x-ray parametric down-conversion kinematics.
//
// Angles are measured in the scattering plane, counter-clockwise from the
// pump propagation direction. The crystal is oriented so the pump meets the
// (h,k,l) planes at bragg_angle + pump_deviation; the reciprocal lattice
// vector G then carries the pump onto the diffracted direction Q = k_p + G,
// close to twice the Bragg angle. Signal photons are reported on the far
// side of Q (larger angle), idler photons on the near side.

#include <optional>
#include <string>
#include <vector>

#include "xqd/units.hpp"

namespace xqd::phasematch {

struct MillerIndices {
  int h = 0;
  int k = 0;
  int l = 0;
};

enum class GeometryMode { Laue };

struct CrystalGeometry {
  double lattice_constant_angstrom = 3.56679;
  MillerIndices miller{6, 6, 0};
  double pump_energy_ev = 22300.0;
  double pump_deviation_rad = deg_to_rad(0.010);
  GeometryMode mode = GeometryMode::Laue;
};

/// Throws Errc::InvalidConfig for non-physical inputs and Errc::Unsolvable
/// when the pump wavelength exceeds 2 d_hkl.
void validate(const CrystalGeometry& geometry);

/// Interplanar spacing a / sqrt(h^2 + k^2 + l^2), angstrom.
double d_spacing(const CrystalGeometry& geometry);

/// arcsin(lambda_p / 2 d_hkl). Errc::Unsolvable reports the ratio when > 1.
double bragg_angle(const CrystalGeometry& geometry);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Pump wavevector, reciprocal lattice vector and their sum, inverse angstrom.
struct ScatteringVectors {
  Vec2 pump;
  Vec2 reciprocal;
  Vec2 diffracted;
  double pump_norm = 0.0;
  double diffracted_norm = 0.0;
  double diffracted_angle_rad = 0.0;
};

ScatteringVectors scattering_vectors(const CrystalGeometry& geometry);

struct SolverOptions {
  /// Accept a solution when |k_p + G - k_s - k_i| <= relative_tolerance * |k_p|.
  double relative_tolerance = 1e-8;
  int max_newton_iterations = 60;
  /// Grid size of the bracketing fallback over the half-plane beyond Q.
  int bracket_samples = 4096;
};

struct PhaseMatchSolution {
  double signal_energy_ev = 0.0;
  double idler_energy_ev = 0.0;
  double signal_angle_rad = 0.0;
  double idler_angle_rad = 0.0;
  /// Norm of the momentum mismatch, inverse angstrom.
  double momentum_residual = 0.0;

  double separation_rad() const { return signal_angle_rad - idler_angle_rad; }
};

/// Solves k_p + G = k_s + k_i for a given signal energy with the idler
/// energy fixed by subtraction. Damped Newton on the two emission angles,
/// with a bracketing bisection fallback. Errc::NoSolution when neither
/// converges (message carries the best residual).
/// The returned signal energy may move by one ulp so the pair sums to the
/// pump exactly.
PhaseMatchSolution solve_phase_matching(const CrystalGeometry& geometry, double signal_energy_ev,
                                        const SolverOptions& options = {});

/// Inverse problem: the solution whose signal photon leaves at the given
/// angle. Errc::NoSolution outside the phase-matched band.
PhaseMatchSolution solve_for_signal_angle(const CrystalGeometry& geometry, double signal_angle_rad,
                                          const SolverOptions& options = {});

struct CurveSample {
  double detector_angle_rad = 0.0;
  /// Empty when the angle lies outside the phase-matched band.
  std::optional<PhaseMatchSolution> solution;
};

/// n_samples detector angles evenly spaced on [angle_min, angle_max],
/// sorted ascending. Unsolvable angles are kept and flagged.
std::vector<CurveSample> angle_energy_curve(const CrystalGeometry& geometry, double angle_min_rad,
                                            double angle_max_rad, int n_samples,
                                            const SolverOptions& options = {});

struct EnergyBand {
  double center_ev = 0.0;
  double width_ev = 0.0;
  double low_ev = 0.0;
  double high_ev = 0.0;
};

/// Energy interval seen by a detector at detector_angle with the given full
/// angular acceptance: the curve evaluated at the two window edges.
EnergyBand predict_spectrum(const CrystalGeometry& geometry, double detector_angle_rad,
                            double angular_acceptance_rad, const SolverOptions& options = {});

/// Degenerate (half-pump) solution.
PhaseMatchSolution degenerate_solution(const CrystalGeometry& geometry, const SolverOptions& options = {});

/// Pump deviation that puts the degenerate pair at the requested angular
/// separation; the geometry's own deviation is ignored.
double deviation_for_separation(const CrystalGeometry& geometry, double separation_rad,
                                const SolverOptions& options = {});

/// Energies registered when the ancilla detector sits at the degenerate idler
/// angle and the object detector is swung to `separation` from it: the object
/// sees the curve energy at its angle, the ancilla the energy-conserving partner.
struct DetectorPairEnergies {
  double separation_rad = 0.0;
  double object_angle_rad = 0.0;
  double object_energy_ev = 0.0;
  double ancilla_energy_ev = 0.0;
};

DetectorPairEnergies offset_detector_energies(const CrystalGeometry& geometry, double separation_rad,
                                              const SolverOptions& options = {});

}  // namespace xqd::phasematch
