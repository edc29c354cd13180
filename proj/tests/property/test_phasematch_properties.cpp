#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"
#include "xqd/phasematch.hpp"

using namespace xqd;
using namespace xqd::phasematch;

namespace {

struct Case {
  CrystalGeometry geometry;
  double signal_energy_ev;
};

Case random_case(gen::Gen& g) {
  const std::vector<MillerIndices> planes{{2, 2, 0}, {4, 0, 0}, {4, 4, 0}, {6, 6, 0}, {3, 3, 3}, {8, 0, 0}};
  Case c;
  c.geometry.lattice_constant_angstrom = g.uniform(3.0, 6.5);
  c.geometry.miller = g.pick(planes);
  const auto& m = c.geometry.miller;
  const double d = oracle::cubic_d(c.geometry.lattice_constant_angstrom, m.h, m.k, m.l);
  // Pump between 1.05 and 3 times the Bragg cutoff energy.
  const double e_min = oracle::kHc / (2.0 * d);
  c.geometry.pump_energy_ev = e_min * g.uniform(1.05, 3.0);
  c.geometry.pump_deviation_rad = oracle::rad(g.uniform(0.001, 0.05));
  c.signal_energy_ev = c.geometry.pump_energy_ev * g.uniform(0.45, 0.55);
  return c;
}

}  // namespace

TEST(PhaseMatchProperty, SolutionsCloseTheMomentumTriangle) {
  gen::Gen g(0x5eed0201);
  int solved = 0;
  for (int c = 0; c < 300; ++c) {
    const auto k = random_case(g);
    const auto& geo = k.geometry;
    const auto& m = geo.miller;
    const double a = geo.lattice_constant_angstrom;
    const double theta = oracle::bragg(a, m.h, m.k, m.l, geo.pump_energy_ev);
    ASSERT_NEAR(bragg_angle(geo), theta, 1e-12) << "case " << c;
    PhaseMatchSolution s;
    try {
      s = solve_phase_matching(geo, k.signal_energy_ev);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), Errc::NoSolution) << "case " << c;
      continue;
    }
    ++solved;
    ASSERT_EQ(s.signal_energy_ev + s.idler_energy_ev, geo.pump_energy_ev) << "case " << c;
    const auto [q, q_angle] = oracle::diffracted(a, m.h, m.k, m.l, geo.pump_energy_ev, theta + geo.pump_deviation_rad);
    // Independent residual from the returned angles.
    const double ks = 2.0 * oracle::kPi * s.signal_energy_ev / oracle::kHc;
    const double ki = 2.0 * oracle::kPi * s.idler_energy_ev / oracle::kHc;
    const double rx = q * std::cos(q_angle) - ks * std::cos(s.signal_angle_rad) - ki * std::cos(s.idler_angle_rad);
    const double ry = q * std::sin(q_angle) - ks * std::sin(s.signal_angle_rad) - ki * std::sin(s.idler_angle_rad);
    const double kp = 2.0 * oracle::kPi * geo.pump_energy_ev / oracle::kHc;
    ASSERT_LE(std::hypot(rx, ry), 1e-7 * kp) << "case " << c;
    ASSERT_LE(s.momentum_residual, 1e-8 * kp) << "case " << c;
    const auto [sig, idl] = oracle::triangle_angles(q, q_angle, s.signal_energy_ev, s.idler_energy_ev);
    ASSERT_NEAR(s.signal_angle_rad, sig, 1e-7) << "case " << c;
    ASSERT_NEAR(s.idler_angle_rad, idl, 1e-7) << "case " << c;
  }
  EXPECT_GT(solved, 150);
}

TEST(PhaseMatchProperty, InverseSolveRoundTrips) {
  gen::Gen g(0x5eed0202);
  for (int c = 0; c < 100; ++c) {
    const auto k = random_case(g);
    PhaseMatchSolution s;
    try {
      s = solve_phase_matching(k.geometry, k.signal_energy_ev);
    } catch (const Error&) {
      continue;
    }
    const auto back = solve_for_signal_angle(k.geometry, s.signal_angle_rad);
    ASSERT_NEAR(back.signal_energy_ev, s.signal_energy_ev, 1e-6 * s.signal_energy_ev) << "case " << c;
  }
}

TEST(PhaseMatchProperty, EnergyFallsWithSignalAngle) {
  gen::Gen g(0x5eed0203);
  for (int c = 0; c < 50; ++c) {
    const auto k = random_case(g);
    PhaseMatchSolution d;
    try {
      d = degenerate_solution(k.geometry);
    } catch (const Error&) {
      continue;
    }
    const double span = oracle::rad(0.01);
    const auto curve = angle_energy_curve(k.geometry, d.signal_angle_rad - span, d.signal_angle_rad + span, 21);
    double last = INFINITY;
    for (const auto& p : curve) {
      if (!p.solution) continue;
      ASSERT_LT(p.solution->signal_energy_ev, last) << "case " << c;
      last = p.solution->signal_energy_ev;
    }
  }
}

TEST(PhaseMatchProperty, BeyondCutoffIsUnsolvable) {
  gen::Gen g(0x5eed0204);
  for (int c = 0; c < 100; ++c) {
    auto k = random_case(g);
    const auto& m = k.geometry.miller;
    const double d = oracle::cubic_d(k.geometry.lattice_constant_angstrom, m.h, m.k, m.l);
    k.geometry.pump_energy_ev = oracle::kHc / (2.0 * d) * g.uniform(0.2, 0.99);
    ASSERT_EQ(testing_support::error_of([&] { bragg_angle(k.geometry); }), Errc::Unsolvable) << "case " << c;
  }
}
