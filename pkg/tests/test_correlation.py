#!/usr/bin/env python3

import math

import numpy

from utils import *

import cpisim
from cpisim.correlation import CorrelationMap, Correlator, EvaluationPath, \
  PhaseSpec, Provenance, QuadratureSpec, amplitude_gaussian_fast, \
  amplitude_oracle, check_envelope, coherent_ghost_image, \
  convolution_ghost_image, gamma_map, geometric_gamma, \
  incoherent_ghost_image, phase_phi, stationary_object_point, \
  stationary_source_point
from cpisim.image import Normalization, normalize
from cpisim.refocus import unrefocused_image
from cpisim.scene import ApertureMask, PumpProfile, make_double_slit, \
  make_letter_E, make_slit

def slit(width = 0.2, count = 64, pitch = 0.01, center = 0.0):
  return make_slit(width, grid(count, pitch), center)


def test_phase_phi():
  setup = bench_setup()
  spec = PhaseSpec.from_setup(setup)
  assertClose(spec.beta, 1 / 3 - 0.1)
  assertClose(spec.gamma_a, 20 / 300)
  assertClose(spec.gamma_b, 1 / 3)
  assertClose(phase_phi(0.2, 0.1, 0.3, 0.4, spec, setup.M),
              -0.040833333333333)
  assertClose(phase_phi(0.2, 0.0, 0.3, 0.4, spec, setup.M), -0.2 / 6)
  planar = phase_phi((0.2, 0.0), (0.1, 0.0), (0.3, 0.0), (0.4, 0.0),
                     spec, setup.M)
  assertClose(planar, -0.040833333333333)
  # Beta vanishes at focus.
  assertClose(PhaseSpec.from_setup(bench_setup(z_b = 10)).beta, 0.0,
              atol = 1e-12)


def test_fast_matches_oracle():
  # 100 random pairs on a slit, 100 on a double slit.
  setup = small_setup()
  pump = small_pump()
  quad = QuadratureSpec(object_oversample = 2)
  rng = numpy.random.default_rng(7)
  errors = []
  for mask in (slit(), make_double_slit(0.1, 0.3, grid(64, 0.01))):
    for rho_a, rho_b in zip(rng.uniform(-0.5, 0.5, 100),
                            rng.uniform(-0.1, 0.1, 100)):
      a = amplitude_gaussian_fast(rho_a, rho_b, mask, pump, setup, quad)
      b = amplitude_oracle(rho_a, rho_b, mask, pump, setup, quad)
      assertEq(a.provenance, Provenance.gaussian_fast)
      assertEq(b.provenance, Provenance.oracle_quadrature)
      errors.append(abs(abs(a.value) - abs(b.value)) / abs(b.value))
  errors = numpy.array(errors)
  assertEq(errors.size, 200)
  assert numpy.mean(errors <= 1e-6) >= 0.95, numpy.sort(errors)[-10:]
  assert errors.max() <= 1e-4, errors.max()


def test_fast_matches_oracle_in_2D():
  setup = small_setup()
  mask = make_letter_E(0.1, grid(24, 0.025, dim = 2))
  pump = small_pump()
  quad = QuadratureSpec(object_oversample = 2)
  for rho_a, rho_b in (((0.1, -0.2), (0.02, 0.01)),
                       ((0.0, 0.0), (0.0, 0.0)),
                       ((-0.3, 0.15), (-0.03, 0.04))):
    a = amplitude_gaussian_fast(rho_a, rho_b, mask, pump, setup, quad)
    b = amplitude_oracle(rho_a, rho_b, mask, pump, setup, quad)
    assertClose(a.value, b.value, rtol = 1e-6,
                atol = 1e-6 * abs(b.value) + 1e-12)


def test_opaque_object():
  setup = small_setup()
  opaque = ApertureMask(grid(32, 0.01), numpy.zeros(32), 0.1)
  for path in EvaluationPath:
    correlator = Correlator(opaque, small_pump(), setup, path)
    assertEq(correlator.amplitude(0.1, 0.02).value, 0j)
    assertEq(correlator.amplitude(0.1, 0.02).intensity, 0.0)


def test_parity():
  setup = small_setup()
  values = gamma_map(slit(), small_pump(), setup, grid(21, 0.05),
                     grid(11, 0.02)).values
  assert numpy.all(values >= 0)
  assertClose(values, values[::-1, ::-1], rtol = 1e-9,
              atol = 1e-12 * values.max())


def test_mirror_symmetry_in_2D():
  # The letter E is symmetric under y -> -y.
  setup = small_setup()
  mask = make_letter_E(0.1, grid(24, 0.025, dim = 2))
  values = gamma_map(mask, small_pump(), setup, grid(8, 0.1, dim = 2),
                     grid(5, 0.02, dim = 2)).values
  assertEq(values.shape, (8, 8, 5, 5))
  assertClose(values, values[::-1, :, ::-1, :], rtol = 1e-9,
              atol = 1e-12 * values.max())


def test_pump_kinds():
  setup = small_setup()
  top_hat = PumpProfile(0.05, 'top_hat')
  e = assertRaises(cpisim.NonGaussianPump, Correlator, slit(), top_hat,
                   setup)
  assertEq(e.kind, top_hat.kind)
  value = amplitude_oracle(0.1, 0.0, slit(), top_hat, setup)
  assert value.intensity > 0


def test_undersampled_quadrature():
  setup = small_setup()
  explicit = Correlator(slit(), small_pump(), setup,
                        quad = QuadratureSpec(object_oversample = 1))
  e = assertRaises(cpisim.UndersampledQuadrature, explicit.oversample,
                   0, 0.0, 10.0)
  assertEq(e.integral, 'object')
  assert e.step >= math.pi
  capped = Correlator(slit(), small_pump(), setup,
                      quad = QuadratureSpec(max_oversample = 2))
  e = assertRaises(cpisim.UndersampledQuadrature, capped.oversample,
                   0, 0.0, 100.0)
  assertEq(e.integral, 'object')
  coarse = Correlator(slit(), small_pump(), setup, EvaluationPath.oracle,
                      QuadratureSpec(source_pitch = 0.1))
  e = assertRaises(cpisim.UndersampledQuadrature, coarse.amplitude,
                   10.0, 0.0)
  assertEq(e.integral, 'source')
  # Automatic factors grow with the reach.
  auto = Correlator(slit(), small_pump(), setup)
  assert auto.oversample(0, 0.0, 10.0) > auto.oversample(0, 0.0, 0.1)
  assert auto.object_pitch_limit(0.0, 10.0) < auto.object_pitch_limit(
    0.0, 0.1)


def test_coherent_image_matches_map():
  setup = small_setup(z_b = 10)
  mask = slit(0.1, 32)
  quad = QuadratureSpec(object_oversample = 2)
  grid_a = grid(41, 0.05)
  coherent = coherent_ghost_image(mask, small_pump(), setup, grid_a,
                                  quad = quad)
  map = gamma_map(mask, small_pump(), setup, grid_a, grid(5, 0.02),
                  quad = quad)
  column = map.values[:, 2] / map.values[:, 2].max()
  assertClose(normalize(coherent).values, column, rtol = 1e-9, atol = 1e-12)
  assertRaises(cpisim.NotAtFocus, coherent_ghost_image, mask, small_pump(),
               small_setup(), grid_a)


def test_coherent_image_of_narrow_slit():
  setup = small_setup(z_b = 10)
  mask = slit(0.02, center = 0.1)
  grid_a = grid(61, 0.01)
  image = coherent_ghost_image(mask, small_pump(), setup, grid_a)
  peak = grid_a.axis()[numpy.argmax(image.values)]
  assertClose(peak, -setup.m * 0.1, atol = 0.01)


def test_incoherent_image_matches_convolution():
  # N_b pitch_b = λ M z_bF / pitch_o makes the S_b sum an exact
  # discrete Parseval identity.
  setup = small_setup(z_b = 10)
  mask = slit(0.1, 32)
  quad = QuadratureSpec(object_oversample = 1)
  grid_a = grid(41, 0.05)
  pitch_b = setup.wavelength * setup.M * setup.z_bF / 0.01 / 16
  map = gamma_map(mask, small_pump(), setup, grid_a, grid(16, pitch_b),
                  quad = quad)
  with cpisim.capture_warnings():
    incoherent = incoherent_ghost_image(map)
  reference = convolution_ghost_image(mask, small_pump(), setup, grid_a)
  assertClose(normalize(incoherent).values, normalize(reference).values,
              rtol = 1e-6, atol = 1e-9)


def test_focused_slit_matches_convolution():
  # Γ of a 26 μm slit spreads along ρ_b far past the pump envelope: the
  # S_b grid reaches ±23 mm.
  setup = bench_setup(z_b = 10)
  pump = PumpProfile(0.6)
  mask = make_slit(0.026, grid(16, 0.026 / 6))
  grid_a = grid(61, 0.003)
  with cpisim.capture_warnings():
    focused = unrefocused_image(mask, pump, setup, grid_a, grid(481, 0.096))
  assertEq(focused.label, 'focused')
  reference = convolution_ghost_image(mask, pump, setup, grid_a,
                                      oversample = 16)
  assertClose(normalize(focused).values, normalize(reference).values,
              atol = 1e-2)


def test_ridges_follow_geometric_optics():
  # At λ / 16 each column Γ(·, ρ_b) of a narrow slit peaks on its
  # geometric image.
  setup = bench_setup(wavelength = 1e-3 / 16)
  pump = PumpProfile(0.6)
  mask = make_slit(0.01, grid(16, 0.001, center = 0.1), center = 0.1)
  grid_a = grid(171, 0.02, center = -0.5)
  grid_b = grid(41, 0.015)
  map = gamma_map(mask, pump, setup, grid_a, grid_b)
  rho_a = grid_a.axis()
  ratio = setup.z_b / setup.z_bF
  rng = numpy.random.default_rng(3)
  for j in rng.choice(grid_b.count, 5, replace = False):
    rho_b = grid_b.axis()[j]
    peak = rho_a[numpy.argmax(map.values[:, j])]
    lit = rho_a[geometric_gamma(mask, pump, setup, rho_a, rho_b) > 0]
    assert lit.size >= 2, rho_b
    assertClose(peak, (lit.min() + lit.max()) / 2, atol = 2 * grid_a.pitch)
    assertClose(stationary_object_point(peak, rho_b, setup), 0.1,
                atol = 2 * grid_a.pitch * ratio / setup.m)


def test_incoherent_image_of_empty_map():
  map = CorrelationMap(grid(5, 0.1), grid(4, 0.1), numpy.zeros((5, 4)),
                       small_setup())
  with cpisim.capture_warnings() as caught:
    image = incoherent_ghost_image(map)
  assertEq(caught, [])
  assertEq(image.values.tolist(), [0.0] * 5)


def test_incoherent_image_grows_with_samples():
  setup = small_setup()
  map = gamma_map(slit(), small_pump(), setup, grid(11, 0.1),
                  grid(8, 0.02))
  full = incoherent_ghost_image(map)
  part = incoherent_ghost_image(CorrelationMap(
    map.grid_a, grid(4, 0.02, center = -0.04), map.values[:, :4], setup))
  assert numpy.all(full.values >= part.values)


def test_source_image_of_displaced_pump():
  # A wide object images a narrow pump centered at c onto ρ_b = -M c.
  setup = small_setup()
  pump = PumpProfile(0.02, center = 0.1)
  mask = slit(1.0, 128)
  grid_b = grid(81, 0.005)
  values = gamma_map(mask, pump, setup, grid(3, 0.01), grid_b).values[1]
  peak = grid_b.axis()[numpy.argmax(values)]
  assertClose(peak, -setup.M * 0.1, atol = grid_b.pitch)


def test_stationary_points():
  setup = bench_setup()
  assertClose(stationary_object_point(1.5, 0.0, setup), -0.3)
  assertClose(stationary_object_point(0.0, 0.8, setup), -0.7)
  assertClose(stationary_object_point((1.5, 0.0), (0.0, 0.8), setup),
              (-0.3, -0.7))
  focused = bench_setup(z_b = 10)
  assertClose(stationary_object_point(1.5, 0.8, focused), -1.0)
  assertClose(stationary_source_point(-0.4, 0.8), 0.5)
  assertClose(stationary_source_point(0.8 * 0.6, 0.8), -0.6)
  assertEq(stationary_source_point((0.0, 0.0), 0.8), (0.0, 0.0))
  assertRaises(cpisim.ValidationError, stationary_source_point, 0.1, 0)


def test_geometric_gamma():
  setup = bench_setup()
  mask = slit()
  pump = PumpProfile(0.6)
  assertEq(float(geometric_gamma(mask, pump, setup, 1.5, 0.0)), 0.0)
  assertClose(geometric_gamma(mask, pump, setup, 0.15, 0.0), 1.0)
  # The source factor is |F(-ρ_b/M)|².
  assertClose(geometric_gamma(mask, pump, bench_setup(z_b = 10), 0.0,
                              0.8 * 0.6), math.exp(-1))


def test_envelope_check():
  with cpisim.capture_warnings() as caught:
    assertEq(check_envelope(numpy.array([1e-5, 1.0, 1e-5])), 1e-5)
  assertEq(caught, [])
  with cpisim.capture_warnings() as caught:
    ratio = check_envelope(numpy.array([[0.5, 0.5, 0.5],
                                        [0.5, 1.0, 0.5],
                                        [0.5, 0.5, 0.5]]))
  assertEq(ratio, 0.5)
  assertEq(len(caught), 1)
  assert isinstance(caught[0], cpisim.TruncatedEnvelope)
  assertEq(caught[0].ratio, 0.5)


def test_map_validation():
  setup = small_setup()
  assertRaises(cpisim.ValidationError, CorrelationMap, grid(5, 0.1),
               grid(4, 0.1), numpy.zeros((4, 5)), setup)
  assertRaises(cpisim.ValidationError, CorrelationMap, grid(5, 0.1),
               grid(4, 0.1), -numpy.ones((5, 4)), setup)
  assertRaises(cpisim.ValidationError, CorrelationMap, grid(5, 0.1),
               grid(4, 0.1, dim = 2), numpy.zeros((5, 4, 4)), setup)


def test_map_archive():
  setup = small_setup()
  map = gamma_map(slit(), small_pump(), setup, grid(5, 0.05),
                  grid(4, 0.02, center = 0.01))
  with TemporaryDirectory():
    map.save('map.npz')
    loaded = CorrelationMap.load('map.npz')
  assertEq(loaded.values.tolist(), map.values.tolist())
  assertEq(loaded.grid_a, map.grid_a)
  assertEq(loaded.grid_b, map.grid_b)
  assertEq(loaded.setup, setup)
  assertEq(loaded.provenance, Provenance.gaussian_fast)


if __name__ == '__main__':
  run_tests(globals())
