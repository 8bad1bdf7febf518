# Copyright (C) 2026, the cpisim authors
#
# This software is provided "as is" without warranty of any kind,
# either expressed or implied, including but not limited to the
# implied warranties of fitness for a particular purpose.
#
# See the LICENSE file for more information.

'''Refocusing, plain integration and viewpoints of the correlation
function, plus the image metrics used to judge them.'''

import math

import numpy
import scipy.interpolate
import scipy.signal

import cpisim
from cpisim.correlation import Correlator, EvaluationPath, CHUNK, \
  check_envelope, grid_reach, stationary_source_point
from cpisim.image import Image, Normalization, normalize
from cpisim.log import logger, LogLevel
from cpisim.threadpool import ThreadPool
from cpisim.utils import Accumulator, chunks

class RefocusMap:

  '''ρ_a ↦ scale ρ_a + shift_coeff ρ_b, undoing the parallax of an
  object out of the focused plane.'''

  def __init__(self, scale, shift_coeff):
    self.__scale = float(scale)
    self.__shift_coeff = float(shift_coeff)

  scale = property(lambda self: self.__scale)
  shift_coeff = property(lambda self: self.__shift_coeff)

  @property
  def identity(self):
    return self.__scale == 1 and self.__shift_coeff == 0

  @staticmethod
  def from_setup(setup):
    if setup.at_focus():
      return RefocusMap(1.0, 0.0)
    ratio = setup.z_bF / setup.z_b
    return RefocusMap(ratio, setup.m * (1 - ratio) / setup.M)

  def __repr__(self):
    return 'RefocusMap(scale = %g, shift_coeff = %g)' % (
      self.__scale, self.__shift_coeff)


IDENTITY = RefocusMap(1.0, 0.0)

def refocus_remap(rho_a, rho_b, map):
  '''Where Γ must be read for the refocused image at ρ_a.

  >>> round(refocus_remap(0.3, 0.16, RefocusMap(10 / 3, -4.375)), 12)
  0.3
  '''
  if isinstance(rho_a, tuple):
    return tuple(map.scale * a + map.shift_coeff * b
                 for a, b in zip(rho_a, rho_b))
  return map.scale * rho_a + map.shift_coeff * rho_b


def _integrate(correlator, grid_a, grid_b, remap, pool, label):
  '''Σ_j Γ(remap(ρ_a, ρ_b(j)), ρ_b(j)) pitch_b^dim, evaluated lazily.

  The S_b samples are cut in fixed chunks (rows of ρ_b_y in 2D); the
  partial sums are merged in chunk order, whatever the worker count.
  '''
  if grid_a.dim != correlator.dim or grid_b.dim != correlator.dim:
    raise cpisim.ValidationError('grid dimension',
                                 'grids must match the mask dimension')
  pool = pool if pool is not None else ThreadPool(1)
  scale = remap.scale
  shift = remap.shift_coeff
  reach = grid_reach(grid_a, grid_b, scale, shift)
  a_axes = grid_a.axes
  b_axes = grid_b.axes
  if grid_a.dim == 1:
    a, = a_axes
    b, = b_axes
    def job(bounds):
      partial = Accumulator()
      envelope = []
      for j in range(*bounds):
        values = numpy.abs(correlator.amplitudes(
          scale * a + shift * b[j], b[j], reach)) ** 2
        partial.add(values)
        envelope.append(values.max())
      return partial, envelope
  else:
    # Per axis projections depend on one component of ρ_b only.
    projections = []
    for axis in range(2):
      def project(bounds, axis = axis):
        return [correlator.projections(
          scale * a_axes[axis] + shift * b_axes[axis][j], b_axes[axis][j],
          axis, reach[axis]) for j in range(*bounds)]
      projections.append(numpy.array(
        [p for part in pool.map(project, chunks(grid_b.count, CHUNK))
         for p in part]))
    x, y = projections
    def job(bounds):
      partial = Accumulator()
      envelope = []
      for j in range(*bounds):
        values = numpy.abs(numpy.einsum('ra,irb->iab', y[j], x)) ** 2
        partial.add(numpy.sum(values, axis = 0))
        envelope.append(values.max(axis = (1, 2)))
      return partial, envelope
  total = Accumulator()
  envelope = []
  with logger.log('cpisim.refocus', LogLevel.trace,
                  '%s: integrate over %r', label, grid_b):
    for partial, part in pool.map(job, chunks(grid_b.count, CHUNK)):
      total.merge(partial)
      envelope.extend(part)
  check_envelope(numpy.array(envelope))
  return Image(grid_a, total.total * grid_b.cell, label = label)


def refocused_image(mask, pump, setup, grid_a, grid_b,
                    path = EvaluationPath.fast, quad = None, pool = None):
  '''Σ^ref, Γ integrated over S_b at the remapped ρ_a.'''
  correlator = Correlator(mask, pump, setup, path, quad)
  return _integrate(correlator, grid_a, grid_b,
                    RefocusMap.from_setup(setup), pool, 'refocused')


def unrefocused_image(mask, pump, setup, grid_a, grid_b,
                      path = EvaluationPath.fast, quad = None, pool = None):
  '''Σ, Γ integrated over S_b as is.'''
  correlator = Correlator(mask, pump, setup, path, quad)
  label = 'focused' if setup.at_focus() else 'misfocused'
  return _integrate(correlator, grid_a, grid_b, IDENTITY, pool, label)


def viewpoint_image(mask, pump, setup, grid_a, rho_b,
                    path = EvaluationPath.fast, quad = None):
  '''Γ(·, ρ_b): the object seen from the source point -ρ_b/M.'''
  correlator = Correlator(mask, pump, setup, path, quad)
  values = numpy.abs(correlator.amplitudes(grid_a.axes, rho_b)) ** 2
  rho_s = stationary_source_point(rho_b, setup.M)
  if isinstance(rho_s, tuple):
    where = '(%.6g, %.6g)' % rho_s
  else:
    where = '%.6g' % rho_s
  return Image(grid_a, values, label = 'viewpoint rho_s = %s mm' % where)


## Tabulated maps

def _interpolator(map):
  dim = map.grid_a.dim
  # values are [y, x] ordered per plane, the interpolator wants axes in
  # the same order.
  if dim == 1:
    points = (map.grid_a.axis(0), map.grid_b.axis(0))
  else:
    points = (map.grid_a.axis(1), map.grid_a.axis(0),
              map.grid_b.axis(1), map.grid_b.axis(0))
  return scipy.interpolate.RegularGridInterpolator(
    points, map.values, method = 'linear', bounds_error = False,
    fill_value = 0.0)


def _integrate_tabulated(map, remap, label):
  grid_a = map.grid_a
  grid_b = map.grid_b
  interpolate = _interpolator(map)
  check_envelope(map.envelope())
  total = Accumulator()
  if grid_a.dim == 1:
    a = grid_a.axis(0)
    for b in grid_b.axis(0):
      points = numpy.stack([remap.scale * a + remap.shift_coeff * b,
                            numpy.full_like(a, b)], axis = -1)
      total.add(interpolate(points))
  else:
    x, y = grid_a.coordinates()
    for by in grid_b.axis(1):
      for bx in grid_b.axis(0):
        points = numpy.stack(
          [remap.scale * y + remap.shift_coeff * by,
           remap.scale * x + remap.shift_coeff * bx,
           numpy.full_like(x, by), numpy.full_like(x, bx)], axis = -1)
        total.add(interpolate(points))
  values = numpy.maximum(total.total, 0) * grid_b.cell
  return Image(grid_a, values, label = label)


def refocus_tabulated(map):
  '''Σ^ref of an archived map, by multilinear interpolation; reads
  outside the table are zero.'''
  return _integrate_tabulated(map, RefocusMap.from_setup(map.setup),
                              'refocused')


def unrefocus_tabulated(map):
  return _integrate_tabulated(map, IDENTITY, 'misfocused')


## Metrics

def ground_truth(mask, setup, grid_a):
  '''|A(-ρ_a/m)|², the geometric image of the mask on S_a.'''
  m = setup.m
  if grid_a.dim == 1:
    rho_o = -grid_a.axis(0) / m
  else:
    x, y = grid_a.coordinates()
    rho_o = (-x / m, -y / m)
  values = numpy.abs(mask.evaluate(rho_o)) ** 2
  return Image(grid_a, values, label = 'ground truth')


def cross_correlation(image, truth):
  '''Zero mean, unit variance correlation of two peak normalized
  images, in [-1, 1].'''
  if image.grid != truth.grid:
    raise cpisim.ValidationError('image grids',
                                 'cannot compare images on different grids')
  u = normalize(image, Normalization.peak).values.reshape(-1)
  v = normalize(truth, Normalization.peak).values.reshape(-1)
  u = u - u.mean()
  v = v - v.mean()
  norm = math.sqrt(float(numpy.dot(u, u)) * float(numpy.dot(v, v)))
  if norm == 0:
    raise cpisim.ZeroReference(Normalization.peak, 0.0)
  return float(numpy.dot(u, v)) / norm


def _profile(image):
  if image.grid.dim != 1:
    raise cpisim.ValidationError('image dimension',
                                 'profiles metrics need 1D images')
  return image.grid.axis(0), image.values


def fwhm(image):
  '''Full width at half maximum of the highest peak, interpolated.'''
  x, values = _profile(image)
  peak = int(numpy.argmax(values))
  if values[peak] <= 0:
    raise cpisim.ZeroReference(Normalization.peak, 0.0)
  widths = scipy.signal.peak_widths(values, [peak], rel_height = 0.5)
  return float(widths[0][0]) * image.grid.pitch


FOCUS_TOLERANCE = 0.2

def focus_range(alphas, widths, tolerance = FOCUS_TOLERANCE):
  '''(low, high), the sampled alphas around focus over which widths
  stay at most (1 + tolerance) times the width at alpha = 1.

  Only broadening ends the range: edge fringes narrow a coherent image
  without costing resolution.

  >>> focus_range([0.9, 0.95, 1, 1.05], [0.05, 0.03, 0.035, 0.04])
  (0.95, 1.05)
  >>> focus_range([0.9, 0.95, 1, 1.05], [0.05, 0.03, 0.035, 0.044])
  (0.95, 1.0)
  '''
  alphas = numpy.asarray(alphas, dtype = float)
  widths = numpy.asarray(widths, dtype = float)
  if alphas.ndim != 1 or alphas.shape != widths.shape:
    raise cpisim.ValidationError('focus range', 'one width per alpha')
  order = numpy.argsort(alphas)
  alphas = alphas[order]
  widths = widths[order]
  focus = numpy.flatnonzero(numpy.isclose(alphas, 1.0, rtol = 0,
                                          atol = 1e-12))
  if focus.size == 0:
    raise cpisim.ValidationError('focus range', 'alpha = 1 is not sampled')
  bound = (1 + tolerance) * widths[focus[0]]
  low = high = int(focus[0])
  while low > 0 and widths[low - 1] <= bound:
    low -= 1
  while high < len(alphas) - 1 and widths[high + 1] <= bound:
    high += 1
  return float(alphas[low]), float(alphas[high])


class PeakReport:

  '''Maxima of the regions of a profile above half its peak, with the
  lowest value between the two highest of them relative to the peak.'''

  def __init__(self, positions, heights, dip):
    self.__positions = list(positions)
    self.__heights = list(heights)
    self.__dip = dip

  positions = property(lambda self: self.__positions)
  heights = property(lambda self: self.__heights)
  dip = property(lambda self: self.__dip)

  def resolved(self, threshold = 0.5):
    return len(self.__positions) >= 2 and self.__dip <= threshold

  def __repr__(self):
    return 'PeakReport(%s, dip = %.3g)' % (
      ', '.join('%.4g' % p for p in self.__positions), self.__dip)


def _regions(values, threshold):
  '''[start, stop) index ranges where values reach threshold.'''
  above = numpy.concatenate([[False], values >= threshold, [False]])
  edges = numpy.flatnonzero(numpy.diff(above.astype(int)))
  return list(zip(edges[::2], edges[1::2]))


def resolved_peaks(image, level = 0.5):
  '''Locate the maxima of a 1D image, one per region above level times
  its peak.'''
  x, values = _profile(image)
  top = float(values.max())
  if top <= 0:
    return PeakReport([], [], 1.0)
  peaks = [start + int(numpy.argmax(values[start:stop]))
           for start, stop in _regions(values, level * top)]
  if len(peaks) < 2:
    return PeakReport(x[peaks], values[peaks], 1.0)
  first, second = sorted(sorted(peaks, key = lambda p: -values[p])[:2])
  dip = float(values[first:second + 1].min()) / top
  return PeakReport(x[peaks], values[peaks], dip)


def lobes(image, level = 0.5):
  '''Centers of the connected regions above level times the peak, from
  interpolated crossings.'''
  x, values = _profile(image)
  threshold = level * float(values.max())
  pitch = image.grid.pitch
  centers = []
  for start, stop in _regions(values, threshold):
    left = x[start]
    if start > 0:
      v0, v1 = values[start - 1], values[start]
      left = x[start - 1] + (threshold - v0) / (v1 - v0) * pitch
    right = x[stop - 1]
    if stop < len(values):
      v0, v1 = values[stop - 1], values[stop]
      right = x[stop - 1] + (v0 - threshold) / (v0 - v1) * pitch
    centers.append(float(left + right) / 2)
  return centers
