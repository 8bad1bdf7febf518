# Copyright (C) 2026, the cpisim authors
#
# This software is provided "as is" without warranty of any kind,
# either expressed or implied, including but not limited to the
# implied warranties of fitness for a particular purpose.
#
# See the LICENSE file for more information.

'''Sampled transverse grids, object masks and the pump profile.

Two dimensional arrays are indexed [y, x], y ascending with the row.
Transverse positions are either scalars (or arrays of scalars) in one
dimension, or (x, y) tuples in two.
'''

import math

import numpy
import scipy.fft

import cpisim
import cpisim.enumeration
from cpisim.log import logger, LogLevel

def squared_norm(rho):
  if isinstance(rho, tuple):
    return sum(numpy.square(component) for component in rho)
  return numpy.square(rho)


def dot(u, v):
  if isinstance(u, tuple):
    return sum(a * b for a, b in zip(u, v))
  return u * v


class SampledGrid:

  '''A uniform grid of count samples per axis.

  >>> grid = SampledGrid(1, 0.5, 4)
  >>> grid.axis().tolist()
  [-0.75, -0.25, 0.25, 0.75]
  >>> grid.extent
  2.0
  '''

  def __init__(self, dim, pitch, count, center = None):
    if dim not in (1, 2):
      raise cpisim.ValidationError('grid dimension',
                                   'dim must be 1 or 2, got %r' % dim)
    pitch = float(pitch)
    if not math.isfinite(pitch) or pitch <= 0:
      raise cpisim.ValidationError('grid pitch',
                                   'pitch must be positive, got %r' % pitch)
    if int(count) != count or count < 2:
      raise cpisim.ValidationError('grid count',
                                   'count must be at least 2, got %r' % count)
    if center is None:
      center = (0.0,) * dim
    elif numpy.isscalar(center):
      center = (float(center),) * dim
    else:
      center = tuple(float(c) for c in center)
      if len(center) != dim:
        raise cpisim.ValidationError(
          'grid center', '%s-dimensional center for a %sD grid' % (
            len(center), dim))
    self.__dim = dim
    self.__pitch = pitch
    self.__count = int(count)
    self.__center = center

  dim = property(lambda self: self.__dim)
  pitch = property(lambda self: self.__pitch)
  count = property(lambda self: self.__count)
  center = property(lambda self: self.__center)

  @property
  def extent(self):
    '''Width covered by the samples, count * pitch.'''
    return self.__count * self.__pitch

  @property
  def shape(self):
    return (self.__count,) * self.__dim

  @property
  def cell(self):
    '''Quadrature weight of one sample, pitch ** dim.'''
    return self.__pitch ** self.__dim

  def axis(self, index = 0):
    '''Coordinates along axis index (0 is x, 1 is y).'''
    offsets = numpy.arange(self.__count) - (self.__count - 1) / 2
    return self.__center[index] + offsets * self.__pitch

  @property
  def axes(self):
    return tuple(self.axis(i) for i in range(self.__dim))

  def coordinates(self):
    '''Sample positions: an array in 1D, an (X, Y) pair of [y, x]
    arrays in 2D.'''
    if self.__dim == 1:
      return self.axis(0)
    return tuple(numpy.meshgrid(self.axis(0), self.axis(1),
                                indexing = 'xy'))

  def index_of(self, position, axis = 0):
    '''Index of the sample nearest to position along axis.'''
    index = round((position - self.__center[axis]) / self.__pitch
                  + (self.__count - 1) / 2)
    return min(max(index, 0), self.__count - 1)

  def oversampled(self, factor):
    '''The grid splitting every cell in factor samples per axis.'''
    return SampledGrid(self.__dim, self.__pitch / factor,
                       self.__count * factor, self.__center)

  def __eq__(self, other):
    return isinstance(other, SampledGrid) and \
      (self.__dim, self.__pitch, self.__count, self.__center) == \
      (other.dim, other.pitch, other.count, other.center)

  def __hash__(self):
    return hash((self.__dim, self.__pitch, self.__count, self.__center))

  def __repr__(self):
    return 'SampledGrid(%sD, pitch = %g mm, count = %s, center = %s)' % (
      self.__dim, self.__pitch, self.__count, self.__center)


def grid_covering(dim, pitch, half_width, center = None):
  '''The smallest grid of the given pitch spanning ±half_width.'''
  count = max(2, int(math.ceil(2 * half_width / pitch)) + 1)
  return SampledGrid(dim, pitch, count, center)


class ApertureMask:

  '''Complex transmission A(ρ_o) sampled on the object plane grid.

  smallest_feature is the length scale d limiting the resolution of the
  source image on S_b.
  '''

  def __init__(self, grid, values, smallest_feature, label = 'custom'):
    values = numpy.array(values)
    if values.shape != grid.shape:
      raise cpisim.ValidationError(
        'mask shape', 'values %s on a grid of shape %s' % (
          values.shape, grid.shape))
    if not numpy.all(numpy.isfinite(values)):
      raise cpisim.ValidationError('mask transmission',
                                   'values must be finite')
    if numpy.any(numpy.abs(values) > 1 + 1e-12):
      raise cpisim.ValidationError('mask transmission',
                                   '|A| must not exceed 1')
    if not 0 < smallest_feature <= grid.extent * (1 + 1e-12):
      raise cpisim.ValidationError(
        'mask feature', 'smallest feature %g mm outside (0, %g]' % (
          smallest_feature, grid.extent))
    if not numpy.iscomplexobj(values):
      values = values.astype(float)
    values.setflags(write = False)
    self.__grid = grid
    self.__values = values
    self.__smallest_feature = float(smallest_feature)
    self.__label = label
    self.__factors = None

  grid = property(lambda self: self.__grid)
  values = property(lambda self: self.__values)
  smallest_feature = property(lambda self: self.__smallest_feature)
  label = property(lambda self: self.__label)

  @property
  def binary(self):
    return bool(numpy.all((self.__values == 0) | (self.__values == 1)))

  @property
  def open_area(self):
    '''Transmitting area (length in 1D) counted in grid cells.'''
    return float(numpy.sum(numpy.abs(self.__values) ** 2)) * self.__grid.cell

  def factors(self):
    '''Exact separable decomposition as (column, row) pairs.

    A[y, x] = sum(column[y] * row[x]), one pair per distinct nonzero
    row of the mask; in 1D the single pair has no column.
    '''
    if self.__factors is None:
      if self.__grid.dim == 1:
        self.__factors = [(None, self.__values)]
      else:
        rows, inverse = numpy.unique(self.__values, axis = 0,
                                     return_inverse = True)
        inverse = numpy.asarray(inverse).reshape(-1)
        factors = []
        for index, row in enumerate(rows):
          if not numpy.any(row):
            continue
          column = (inverse == index).astype(float)
          factors.append((column, row))
        self.__factors = factors
        logger.log('cpisim.scene', LogLevel.debug,
                   '%s mask: %s separable factors', self.__label,
                   len(factors))
    return self.__factors

  def support(self, axis = 0):
    '''(min, max) coordinates of the transmitting samples along axis.'''
    values = numpy.abs(self.__values) > 0
    if self.__grid.dim == 2:
      values = numpy.any(values, axis = axis)
    coordinates = self.__grid.axis(axis)[values]
    if coordinates.size == 0:
      return (0.0, 0.0)
    return (float(coordinates.min()), float(coordinates.max()))

  def evaluate(self, rho):
    '''Nearest-sample transmission at arbitrary positions, 0 outside.'''
    grid = self.__grid
    if grid.dim == 1:
      rho = (rho,)
    indices = []
    inside = True
    for axis, component in enumerate(rho):
      component = numpy.asarray(component, dtype = float)
      position = (component - grid.center[axis]) / grid.pitch \
        + (grid.count - 1) / 2
      index = numpy.rint(position).astype(int)
      inside = inside & (index >= 0) & (index < grid.count)
      indices.append(numpy.clip(index, 0, grid.count - 1))
    if grid.dim == 1:
      values = self.__values[indices[0]]
    else:
      values = self.__values[indices[1], indices[0]]
    return numpy.where(inside, values, 0)

  def __repr__(self):
    return 'ApertureMask(%s, d = %g mm, %r)' % (
      self.__label, self.__smallest_feature, self.__grid)


def _band(x, center, width, pitch):
  # Samples exactly on an edge are outside.
  return numpy.abs(x - center) < width / 2 - 1e-9 * pitch


def _check_resolved(feature, grid):
  if feature < 2 * grid.pitch * (1 - 1e-12):
    raise cpisim.UnderresolvedMask(feature, grid.pitch)


def _check_inside(low, high, grid, axis = 0):
  coordinates = grid.axis(axis)
  start = coordinates[0] - grid.pitch / 2
  stop = coordinates[-1] + grid.pitch / 2
  tolerance = 1e-9 * grid.pitch
  if low < start - tolerance or high > stop + tolerance:
    raise cpisim.GridTooSmall(high - low, grid.extent)


def make_slit(width, grid, center = 0.0):
  '''Unit transmission for |x - center| < width / 2.

  Samples strictly inside the band are open, a sample on an edge is
  closed. A slit n pitches wide centered on the grid therefore opens n
  samples when n and the grid count have the same parity, and n - 1
  otherwise: 26 μm at 2 μm pitch opens 13 samples on an odd count grid
  but 12 on an even one.
  '''
  _check_resolved(width, grid)
  _check_inside(center - width / 2, center + width / 2, grid)
  x = grid.coordinates()[0] if grid.dim == 2 else grid.coordinates()
  values = _band(x, center, width, grid.pitch).astype(float)
  return ApertureMask(grid, values, width, label = 'slit')


def make_double_slit(width, center_to_center, grid, center = 0.0):
  '''Two slits of the given width, center_to_center apart.'''
  if center_to_center <= width:
    raise cpisim.OverlapError(width, center_to_center)
  _check_resolved(width, grid)
  half = center_to_center / 2
  _check_inside(center - half - width / 2, center + half + width / 2, grid)
  x = grid.coordinates()[0] if grid.dim == 2 else grid.coordinates()
  values = _band(x, center - half, width, grid.pitch) \
    | _band(x, center + half, width, grid.pitch)
  return ApertureMask(grid, values.astype(float), width,
                      label = 'double_slit')


def letter_E_area(stroke):
  '''Analytic open area of the glyph drawn by make_letter_E.'''
  # One 5d stem plus three 2d bars.
  return 11 * stroke ** 2


def make_letter_E(stroke, grid, center = (0.0, 0.0)):
  '''A transparent letter E: a vertical stem and three horizontal bars
  of thickness stroke, 5 strokes tall and 3 strokes wide.'''
  if grid.dim != 2:
    raise cpisim.ValidationError('mask dimension',
                                 'the letter E needs a 2D grid')
  _check_resolved(stroke, grid)
  cx, cy = center
  for axis, (c, half) in enumerate(((cx, 1.5 * stroke),
                                    (cy, 2.5 * stroke))):
    _check_inside(c - half, c + half, grid, axis)
  x, y = grid.coordinates()
  u = x - cx
  v = y - cy
  pitch = grid.pitch
  inside = _band(u, 0.0, 3 * stroke, pitch) & _band(v, 0.0, 5 * stroke, pitch)
  stem = _band(u, -stroke, stroke, pitch)
  bars = _band(v, 2 * stroke, stroke, pitch) \
    | _band(v, 0.0, stroke, pitch) \
    | _band(v, -2 * stroke, stroke, pitch)
  values = inside & (stem | bars)
  return ApertureMask(grid, values.astype(float), stroke, label = 'letter_e')


def _runs(flags):
  '''Lengths of the runs of True along the last axis.'''
  padded = numpy.zeros(flags.shape[:-1] + (flags.shape[-1] + 2,), bool)
  padded[..., 1:-1] = flags
  edges = numpy.diff(padded.astype(int), axis = -1)
  starts = numpy.argwhere(edges == 1)
  stops = numpy.argwhere(edges == -1)
  return stops[:, -1] - starts[:, -1]


def load_mask(path):
  '''Read a custom mask.

  The first line is `rows cols pitch_mm`, followed by rows * cols
  whitespace separated transmissions in [0, 1], row-major. A single row
  gives a 1D mask; rectangular masks are centered on a square grid.
  '''
  with open(str(path), 'r') as f:
    header = f.readline().split()
    if len(header) != 3:
      raise cpisim.ParseError('mask header must be "rows cols pitch_mm"',
                              line = 1)
    try:
      rows, cols, pitch = int(header[0]), int(header[1]), float(header[2])
    except ValueError as e:
      raise cpisim.ParseError('invalid mask header: %s' % e, line = 1)
    try:
      values = numpy.array(f.read().split(), dtype = float)
    except ValueError as e:
      raise cpisim.ParseError('invalid mask value: %s' % e)
  if values.size != rows * cols:
    raise cpisim.ParseError('expected %s mask values, found %s' % (
      rows * cols, values.size))
  if numpy.any((values < 0) | (values > 1)):
    raise cpisim.ValidationError('mask transmission',
                                 'values must lie in [0, 1]')
  values = values.reshape(rows, cols)
  if rows == 1:
    grid = SampledGrid(1, pitch, cols)
    values = values[0]
    runs = _runs(values[None, :] > 0)
  else:
    size = max(rows, cols)
    square = numpy.zeros((size, size))
    top = (size - rows) // 2
    left = (size - cols) // 2
    # Row 0 of the file is the top of the picture.
    square[top:top + rows, left:left + cols] = values[::-1]
    values = square
    grid = SampledGrid(2, pitch, size)
    runs = numpy.concatenate([_runs(values > 0), _runs(values.T > 0)])
  feature = pitch * (runs.min() if runs.size else grid.count)
  logger.log('cpisim.scene', LogLevel.trace,
             'loaded %s mask from %s, d = %g mm', grid.dim, path, feature)
  return ApertureMask(grid, values, feature, label = 'file')


class PumpKind(cpisim.enumeration.Enumerated,
               values = ['gaussian', 'top_hat']):
  pass


class PumpProfile:

  '''Transverse pump amplitude F(ρ_s) and its Fourier transform h_tr.

  The Gaussian amplitude is exp(-|ρ - center|² / (2σ²)), with effective
  diameter D'_s = 2√2 σ. The top hat is a square of side D'_s.
  '''

  def __init__(self, sigma, kind = PumpKind.gaussian, center = 0.0):
    sigma = float(sigma)
    if not math.isfinite(sigma) or sigma <= 0:
      raise cpisim.ValidationError('pump width',
                                   'sigma must be positive, got %r' % sigma)
    if isinstance(kind, str):
      kind = PumpKind[kind]
    self.__sigma = sigma
    self.__kind = kind
    self.__center = center

  sigma = property(lambda self: self.__sigma)
  kind = property(lambda self: self.__kind)
  center = property(lambda self: self.__center)

  @property
  def effective_diameter(self):
    return 2 * math.sqrt(2) * self.__sigma

  def center_along(self, axis):
    if isinstance(self.__center, tuple):
      return self.__center[axis]
    return self.__center

  def axis_amplitude(self, x, axis = 0):
    '''The pump amplitude factor along one axis.'''
    u = numpy.asarray(x, dtype = float) - self.center_along(axis)
    if self.__kind is PumpKind.gaussian:
      return numpy.exp(-u ** 2 / (2 * self.__sigma ** 2))
    return (numpy.abs(u) <= self.effective_diameter / 2).astype(float)

  def axis_fourier(self, kappa, axis = 0):
    kappa = numpy.asarray(kappa, dtype = float)
    shift = numpy.exp(-1j * kappa * self.center_along(axis))
    if self.__kind is PumpKind.gaussian:
      return numpy.exp(-self.__sigma ** 2 * kappa ** 2 / 2) * shift
    half = self.effective_diameter / 2
    return numpy.sinc(kappa * half / math.pi) * shift

  def __repr__(self):
    return 'PumpProfile(%s, sigma = %g mm, center = %s)' % (
      self.__kind, self.__sigma, self.__center)


def _components(rho):
  return rho if isinstance(rho, tuple) else (rho,)


def pump_amplitude(rho, pump):
  '''F(ρ); real and positive for the Gaussian pump.'''
  result = 1.0
  for axis, component in enumerate(_components(rho)):
    result = result * pump.axis_amplitude(component, axis)
  return result


def pump_fourier(kappa, pump):
  '''h_tr(κ), normalized so that h_tr(0) = 1 for a centered pump.'''
  result = 1.0
  for axis, component in enumerate(_components(kappa)):
    result = result * pump.axis_fourier(component, axis)
  return result


def sampled_pump_fourier(pump, grid):
  '''Discrete Fourier transform of F sampled on a 1D grid.

  Returns the angular frequencies and h_tr normalized by its value at
  zero frequency, for comparison with pump_fourier.
  '''
  if grid.dim != 1:
    raise cpisim.ValidationError('grid dimension',
                                 'the pump self-check runs on 1D grids')
  x = grid.axis()
  samples = pump.axis_amplitude(x)
  kappa = 2 * math.pi * scipy.fft.fftfreq(grid.count, d = grid.pitch)
  spectrum = scipy.fft.fft(samples) * numpy.exp(-1j * kappa * x[0])
  spectrum = spectrum / spectrum[0]
  order = numpy.argsort(kappa)
  return kappa[order], spectrum[order]
