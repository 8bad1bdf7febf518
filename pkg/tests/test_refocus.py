#!/usr/bin/env python3

import math

import numpy

from utils import *

import cpisim
from cpisim.correlation import QuadratureSpec, gamma_map, \
  incoherent_ghost_image
from cpisim.geometry import object_distance_for_alpha
from cpisim.image import Image, Normalization, normalize
from cpisim.refocus import IDENTITY, PeakReport, RefocusMap, \
  cross_correlation, focus_range, fwhm, ground_truth, lobes, refocus_remap, \
  refocus_tabulated, refocused_image, resolved_peaks, unrefocus_tabulated, \
  unrefocused_image, viewpoint_image
from cpisim.scene import PumpProfile, make_double_slit, make_letter_E, \
  make_slit
from cpisim.threadpool import ThreadPool

def slit():
  return make_slit(0.2, grid(64, 0.01))


def double_slit():
  return make_double_slit(0.2, 0.4, grid(80, 0.01))


def gaussian(grid_, center = 0.0, width = 0.1):
  return numpy.exp(-(grid_.axis() - center) ** 2 / (2 * width ** 2))


def test_refocus_map():
  map = RefocusMap.from_setup(bench_setup())
  assertClose(map.scale, 10 / 3)
  assertClose(map.shift_coeff, -4.375)
  assert not map.identity
  assertClose(refocus_remap(0.3, 0.16, map), 0.3)
  assertClose(refocus_remap((0.3, 0.0), (0.16, 0.0), map), (0.3, 0.0))
  focused = RefocusMap.from_setup(bench_setup(z_b = 10))
  assert focused.identity
  assert IDENTITY.identity
  assertEq(refocus_remap(0.3, 0.16, focused), 0.3)


def test_refocus_at_focus_is_plain_integration():
  setup = small_setup(z_b = 10)
  grid_a = grid(21, 0.05)
  grid_b = grid(11, 0.02)
  refocused = refocused_image(slit(), small_pump(), setup, grid_a, grid_b)
  plain = unrefocused_image(slit(), small_pump(), setup, grid_a, grid_b)
  assertEq(refocused.values.tolist(), plain.values.tolist())
  assertEq(refocused.label, 'refocused')
  assertEq(plain.label, 'focused')


def test_plain_integration_matches_map():
  setup = small_setup(z_b = 10)
  quad = QuadratureSpec(object_oversample = 2)
  grid_a = grid(21, 0.05)
  grid_b = grid(11, 0.02)
  lazy = unrefocused_image(slit(), small_pump(), setup, grid_a, grid_b,
                           quad = quad)
  map = gamma_map(slit(), small_pump(), setup, grid_a, grid_b, quad = quad)
  tabulated = incoherent_ghost_image(map)
  assertClose(lazy.values, tabulated.values, rtol = 1e-12)
  assertClose(unrefocus_tabulated(map).values, tabulated.values,
              rtol = 1e-12)


def test_integration_is_linear():
  setup = small_setup()
  quad = QuadratureSpec(object_oversample = 2)
  grid_a = grid(21, 0.05)
  whole = refocused_image(slit(), small_pump(), setup, grid_a,
                          grid(16, 0.02), quad = quad)
  with cpisim.capture_warnings():
    parts = [refocused_image(slit(), small_pump(), setup, grid_a,
                             grid(8, 0.02, center = center), quad = quad)
             for center in (-0.08, 0.08)]
  assertClose(whole.values, parts[0].values + parts[1].values, rtol = 1e-9)


def test_thread_count_does_not_change_images():
  setup = small_setup()
  grid_a = grid(31, 0.04)
  grid_b = grid(41, 0.006)
  images = []
  for workers in (1, 3):
    with ThreadPool(workers) as pool:
      images.append(refocused_image(slit(), small_pump(), setup, grid_a,
                                    grid_b, pool = pool))
  assertEq(images[0].values.tolist(), images[1].values.tolist())


def test_tabulated_refocus_matches_lazy():
  setup = small_setup()
  quad = QuadratureSpec(object_oversample = 2)
  grid_a = grid(121, 0.025)
  grid_b = grid(25, 0.01)
  lazy = refocused_image(slit(), small_pump(), setup, grid_a, grid_b,
                         quad = quad)
  map = gamma_map(slit(), small_pump(), setup, grid_a, grid_b, quad = quad)
  tabulated = refocus_tabulated(map)
  assertEq(tabulated.label, 'refocused')
  center = slice(50, 71)
  scale = lazy.values[center].max()
  assertClose(tabulated.values[center] / scale, lazy.values[center] / scale,
              atol = 2e-2)


def test_refocus_resolves_double_slit():
  setup = bench_setup()
  grid_a = grid(61, 0.03)
  grid_b = grid(481, 0.006)
  with cpisim.capture_warnings():
    refocused = refocused_image(double_slit(), PumpProfile(0.6), setup,
                                grid_a, grid_b)
    plain = unrefocused_image(double_slit(), PumpProfile(0.6), setup,
                              grid_a, grid_b)
  assertEq(plain.label, 'misfocused')
  report = resolved_peaks(refocused)
  assert report.resolved(), report
  assert not resolved_peaks(plain).resolved()
  centers = lobes(refocused, level = 0.25)
  assertEq(len(centers), 2)
  assertClose(centers, [-0.3, 0.3], atol = 0.06)


def test_viewpoints_shift_in_opposite_directions():
  setup = bench_setup()
  grid_a = grid(267, 0.03, center = 0.0)
  expected = {0.48: [-3.1, -1.1], -0.48: [1.1, 3.1]}
  for rho_b, positions in expected.items():
    image = viewpoint_image(double_slit(), PumpProfile(0.6), setup, grid_a,
                            rho_b)
    assertEq(image.label, 'viewpoint rho_s = %.6g mm' % (-rho_b / 0.8))
    centers = lobes(image, level = 0.25)
    assertEq(len(centers), 2)
    assertClose(centers, positions, atol = 2 * grid_a.pitch)


def test_viewpoints_agree_at_focus():
  setup = bench_setup(z_b = 10)
  grid_a = grid(121, 0.01)
  centers = [lobes(viewpoint_image(double_slit(), PumpProfile(0.6), setup,
                                   grid_a, rho_b))
             for rho_b in (-0.48, 0.48)]
  assertEq(len(centers[0]), 2)
  assertClose(centers[0], centers[1], atol = grid_a.pitch)
  assertClose(centers[0], [-0.3, 0.3], atol = 2 * grid_a.pitch)


def test_viewpoint_of_symmetric_object():
  setup = small_setup()
  image = viewpoint_image(slit(), small_pump(), setup, grid(41, 0.05), 0.0)
  assertClose(image.values, image.values[::-1], rtol = 1e-9,
              atol = 1e-12 * image.peak)


def test_refocus_recovers_letter_E():
  setup = bench_setup()
  mask = make_letter_E(0.2, grid(60, 0.02, dim = 2))
  grid_a = grid(64, 2.0 / 64, dim = 2)
  grid_b = grid(48, 6 * 0.8 * 0.6 / 47, dim = 2)
  truth = ground_truth(mask, setup, grid_a)
  with cpisim.capture_warnings():
    refocused = refocused_image(mask, PumpProfile(0.6), setup, grid_a,
                                grid_b)
    plain = unrefocused_image(mask, PumpProfile(0.6), setup, grid_a, grid_b)
  good = cross_correlation(refocused, truth)
  bad = cross_correlation(plain, truth)
  assert good >= 0.8, good
  assert bad <= 0.5, bad


def test_refocus_beats_plain_integration():
  grid_a = grid(61, 0.03)
  grid_b = grid(481, 0.006)
  for z_b in (3.0, 5.0, 7.0):
    setup = bench_setup(z_b)
    truth = ground_truth(double_slit(), setup, grid_a)
    with cpisim.capture_warnings():
      refocused = refocused_image(double_slit(), PumpProfile(0.6), setup,
                                  grid_a, grid_b)
      plain = unrefocused_image(double_slit(), PumpProfile(0.6), setup,
                                grid_a, grid_b)
    good = cross_correlation(refocused, truth)
    bad = cross_correlation(plain, truth)
    assert good > bad, (z_b, good, bad)


def test_refocus_restores_magnification():
  # A narrow slit at x0 comes back at -m x0 wherever it sits.
  mask = make_slit(0.02, grid(16, 0.0025, center = 0.1), center = 0.1)
  grid_a = grid(41, 0.02)
  grid_b = grid(481, 0.006)
  for z_b in (3.0, 5.0, 7.0):
    setup = bench_setup(z_b)
    with cpisim.capture_warnings():
      image = refocused_image(mask, PumpProfile(0.6), setup, grid_a, grid_b)
    peak = grid_a.axis()[numpy.argmax(image.values)]
    assertClose(peak, -setup.m * 0.1, atol = grid_a.pitch)


def test_coherent_image_keeps_focus_longer():
  # A 26 μm slit on the bench focused at z_b = 10: edge fringes narrow
  # the coherent image, parallax blurs the integrated one.
  focused = bench_setup(z_b = 10)
  mask = make_slit(0.026, grid(16, 0.026 / 6))
  pump = PumpProfile(0.6)
  grid_a = grid(101, 0.003)
  grid_b = grid(121, 0.024)
  alphas = (0.97, 0.98, 0.99, 1.0, 1.01, 1.02, 1.03)
  coherent = []
  incoherent = []
  for alpha in alphas:
    setup = focused.with_object_distance(
      object_distance_for_alpha(focused, alpha))
    coherent.append(fwhm(viewpoint_image(mask, pump, setup, grid_a, 0.0)))
    with cpisim.capture_warnings():
      incoherent.append(fwhm(unrefocused_image(mask, pump, setup, grid_a,
                                               grid_b)))
  assertClose(coherent[3], 0.035, rtol = 0.1)
  assertClose(incoherent[3], 0.0375, rtol = 0.1)
  assertEq(focus_range(alphas, coherent), (0.97, 1.03))
  low, high = focus_range(alphas, incoherent)
  assert 0.97 < low <= 0.99 and 1.01 <= high < 1.03, (low, high)
  # Far out the coherent image is the sharper one.
  assert coherent[0] < incoherent[0] and coherent[-1] < incoherent[-1]


def test_focus_range():
  alphas = [0.98, 0.99, 1.0, 1.01, 1.02]
  assertEq(focus_range(alphas, [0.9, 1.1, 1.0, 1.2, 1.3]), (0.98, 1.01))
  # Narrowing stays in range.
  assertEq(focus_range(alphas, [0.5, 0.7, 1.0, 0.6, 1.0]), (0.98, 1.02))
  assertEq(focus_range(alphas[::-1], [1.3, 1.2, 1.0, 1.1, 0.9]),
           (0.98, 1.01))
  assertEq(focus_range(alphas, [2, 2, 1, 2, 2], tolerance = 1.0),
           (0.98, 1.02))
  assertRaises(cpisim.ValidationError, focus_range, [0.99, 1.01], [1, 1])
  assertRaises(cpisim.ValidationError, focus_range, alphas, [1, 1])


def test_normalize():
  g = grid(21, 0.1)
  image = Image(g, 2 * gaussian(g), label = 'g')
  peak = normalize(image)
  assertEq(peak.peak, 1.0)
  assertEq(peak.normalization, Normalization.peak)
  assertEq(peak.label, 'g')
  assertEq(normalize(peak).values.tolist(), peak.values.tolist())
  center = normalize(image, 'center')
  assertEq(center.values[10], 1.0)
  e = assertRaises(cpisim.ZeroReference, normalize, Image(g, numpy.zeros(21)))
  assertEq(e.mode, Normalization.peak)
  assertRaises(cpisim.ValidationError, normalize, image, Normalization.none)
  shifted = Image(grid(4, 0.1, center = 1.0), numpy.ones(4))
  assertRaises(cpisim.ValidationError, normalize, shifted, 'center')


def test_image_validation():
  g = grid(4, 0.1)
  assertRaises(cpisim.ValidationError, Image, g, [1, 2, 3])
  assertRaises(cpisim.ValidationError, Image, g, [1, -2, 3, 4])
  assertRaises(cpisim.ValidationError, Image, g, [1, math.nan, 3, 4])
  image = Image(g, [1, 2, 3, 4])
  assertRaises(ValueError, image.values.__setitem__, 0, 5.0)
  assertEq(image.relabel('x').label, 'x')


def test_metrics():
  g = grid(401, 0.005)
  image = Image(g, gaussian(g))
  assertClose(fwhm(image), 2 * math.sqrt(2 * math.log(2)) * 0.1, rtol = 1e-2)
  assertClose(cross_correlation(image, image), 1.0)
  inverted = Image(g, 1 - gaussian(g))
  assertClose(cross_correlation(image, inverted), -1.0)
  assertRaises(cpisim.ValidationError, cross_correlation, image,
               Image(grid(401, 0.01), gaussian(grid(401, 0.01))))
  assertRaises(cpisim.ZeroReference, fwhm, Image(g, numpy.zeros(401)))


def test_peaks_and_lobes():
  g = grid(401, 0.005)
  pair = Image(g, gaussian(g, -0.3) + gaussian(g, 0.3))
  report = resolved_peaks(pair)
  assert report.resolved()
  assertClose(report.positions, [-0.3, 0.3], atol = 0.005)
  assert report.dip < 0.1
  assertClose(lobes(pair), [-0.3, 0.3], atol = 1e-3)
  single = Image(g, gaussian(g))
  assert not resolved_peaks(single).resolved()
  assertEq(len(lobes(single)), 1)
  merged = Image(g, gaussian(g, -0.1) + gaussian(g, 0.1))
  assert not resolved_peaks(merged).resolved()
  assert not PeakReport([0.0, 1.0], [1.0, 1.0], 0.7).resolved()


def test_ground_truth():
  truth = ground_truth(slit(), small_setup(), grid(61, 0.01))
  x = truth.grid.axis()
  inside = numpy.abs(x) < 0.14
  outside = numpy.abs(x) > 0.16
  assert numpy.all(truth.values[inside] == 1)
  assert numpy.all(truth.values[outside] == 0)


if __name__ == '__main__':
  run_tests(globals())
