# Copyright (C) 2026, the cpisim authors
#
# This software is provided "as is" without warranty of any kind,
# either expressed or implied, including but not limited to the
# implied warranties of fitness for a particular purpose.
#
# See the LICENSE file for more information.

'''The plenoptic correlation function Γ(ρ_a, ρ_b) and its limits.

Γ is the squared modulus of

  ∫dρ_o A(ρ_o) ∫dρ_s F(ρ_s) exp(i k φ(ρ_o, ρ_s, ρ_a, ρ_b)).

Every factor of the integrand is separable in x and y once the mask is
split into (column, row) products, so amplitudes over a product grid of
ρ_a are sums of outer products of 1D quadratures, one per axis and per
mask factor.
'''

import math
import threading

import numpy

import cpisim
import cpisim.enumeration
import cpisim.geometry
from cpisim.image import Image
from cpisim.log import logger, LogLevel
from cpisim.scene import SampledGrid, PumpKind, dot, squared_norm, \
  pump_amplitude
from cpisim.threadpool import ThreadPool
from cpisim.utils import Accumulator, chunks

ENVELOPE_TOLERANCE = 1e-3
'''Largest Γ on the border of the S_b grid, relative to the peak, that
goes without a truncation warning.'''

CHUNK = 16
'''ρ_b samples per unit of parallel work.'''

class EvaluationPath(cpisim.enumeration.Enumerated,
                     values = ['oracle', 'fast']):
  pass


class Provenance(cpisim.enumeration.Enumerated,
                 values = ['oracle_quadrature', 'gaussian_fast',
                           'geometric']):
  pass


def _provenance(path):
  if path is EvaluationPath.oracle:
    return Provenance.oracle_quadrature
  return Provenance.gaussian_fast


class TwoPhotonAmplitude:

  def __init__(self, value, provenance):
    value = complex(value)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
      raise cpisim.ValidationError('finite amplitude',
                                   'amplitude %r is not finite' % value)
    self.__value = value
    self.__provenance = provenance

  value = property(lambda self: self.__value)
  provenance = property(lambda self: self.__provenance)

  @property
  def intensity(self):
    return abs(self.__value) ** 2

  def __repr__(self):
    return 'TwoPhotonAmplitude(%r, %s)' % (self.__value, self.__provenance)


class PhaseSpec:

  '''Coefficients of the phase φ: β multiplies |ρ_s|²/2, γ_a the
  ρ_s·ρ_a term and γ_b the ρ_s·ρ_o term.'''

  def __init__(self, beta, gamma_a, gamma_b):
    self.__beta = float(beta)
    self.__gamma_a = float(gamma_a)
    self.__gamma_b = float(gamma_b)

  beta = property(lambda self: self.__beta)
  gamma_a = property(lambda self: self.__gamma_a)
  gamma_b = property(lambda self: self.__gamma_b)

  @staticmethod
  def from_setup(setup):
    zeta = setup.zeta
    if math.isinf(zeta):
      raise cpisim.ValidationError(
        'finite zeta', '1/z_a + 1/z_a\' - 1/f vanishes')
    z_a = setup.z_a
    return PhaseSpec(beta = 1 / setup.z_b + (1 / z_a) * (1 - zeta / z_a),
                     gamma_a = zeta / (z_a * setup.z_a_img),
                     gamma_b = 1 / setup.z_b)

  def __repr__(self):
    return 'PhaseSpec(beta = %g, gamma_a = %g, gamma_b = %g)' % (
      self.__beta, self.__gamma_a, self.__gamma_b)


def _shift(rho_s, rho_b, M):
  if isinstance(rho_s, tuple):
    return tuple(s + b / M for s, b in zip(rho_s, rho_b))
  return rho_s + rho_b / M


def phase_phi(rho_o, rho_s, rho_a, rho_b, spec, M):
  '''The bracket of the two-photon phase, a length.

  >>> spec = PhaseSpec(beta = 0.5, gamma_a = 0.25, gamma_b = 1)
  >>> float(phase_phi(0.0, 0.0, 0.0, 0.0, spec, 0.8))
  0.0
  >>> float(phase_phi(0.5, 0.0, 3.0, 0.4, spec, 0.8))
  -0.25
  '''
  return spec.beta * squared_norm(rho_s) / 2 \
    - spec.gamma_a * dot(rho_s, rho_a) \
    - spec.gamma_b * dot(_shift(rho_s, rho_b, M), rho_o)


class QuadratureSpec:

  '''Sampling of the object and source integrals.

  object_oversample -- samples per mask cell along each axis; None
                       picks the smallest factor keeping the kernel
                       phase step under target_step.
  source_pitch      -- ρ_s pitch of the oracle path; None picks
                       min(σ/8, target_step / phase rate).
  source_extent     -- Gaussian ρ_s integration half width, in σ.
  target_step       -- phase step aimed at by automatic choices.
  max_oversample    -- automatic factors beyond this fail.
  '''

  def __init__(self, object_oversample = None, source_pitch = None,
               source_extent = 6.0, target_step = math.pi / 2,
               max_oversample = 4096):
    if object_oversample is not None and \
       (int(object_oversample) != object_oversample or
        object_oversample < 1):
      raise cpisim.ValidationError(
        'quadrature', 'object oversampling must be a positive integer, '
        'got %r' % object_oversample)
    if source_pitch is not None and not source_pitch > 0:
      raise cpisim.ValidationError(
        'quadrature', 'source pitch must be positive, got %r' %
        source_pitch)
    if not source_extent > 0:
      raise cpisim.ValidationError(
        'quadrature', 'source extent must be positive, got %r' %
        source_extent)
    if not 0 < target_step < math.pi:
      raise cpisim.ValidationError(
        'quadrature', 'target phase step must lie in (0, pi)')
    self.__object_oversample = \
      None if object_oversample is None else int(object_oversample)
    self.__source_pitch = source_pitch
    self.__source_extent = float(source_extent)
    self.__target_step = float(target_step)
    self.__max_oversample = int(max_oversample)

  object_oversample = property(lambda self: self.__object_oversample)
  source_pitch = property(lambda self: self.__source_pitch)
  source_extent = property(lambda self: self.__source_extent)
  target_step = property(lambda self: self.__target_step)
  max_oversample = property(lambda self: self.__max_oversample)

  def __repr__(self):
    return 'QuadratureSpec(object_oversample = %s, source_pitch = %s)' % (
      self.__object_oversample, self.__source_pitch)


def _axes(rho, dim):
  '''Per axis coordinate arrays of a position or product grid.'''
  if dim == 1:
    if isinstance(rho, tuple):
      rho, = rho
    return (numpy.atleast_1d(numpy.asarray(rho, dtype = float)),)
  return tuple(numpy.atleast_1d(numpy.asarray(c, dtype = float))
               for c in rho)


def _reach(values):
  values = numpy.asarray(values, dtype = float)
  return float(numpy.abs(values).max()) if values.size else 0.0


class Correlator:

  '''Lazy evaluation of the two-photon amplitude for one mask, pump
  and setup.

  Amplitudes are requested over product grids of ρ_a for one ρ_b at a
  time. The quadrature grids depend on the reach, the largest |ρ_a| and
  |ρ_b| per axis the caller will ask for: callers evaluating many ρ_b
  pass the same reach to get the same quadrature throughout.
  '''

  def __init__(self, mask, pump, setup, path = EvaluationPath.fast,
               quad = None):
    if isinstance(path, str):
      path = EvaluationPath[path]
    if path is EvaluationPath.fast and pump.kind is not PumpKind.gaussian:
      raise cpisim.NonGaussianPump(pump.kind)
    self.__mask = mask
    self.__pump = pump
    self.__setup = setup
    self.__path = path
    self.__quad = quad or QuadratureSpec()
    self.__spec = PhaseSpec.from_setup(setup)
    self.__k = setup.wavenumber
    self.__M = setup.M
    self.__dim = mask.grid.dim
    self.__objects = {}
    self.__lock = threading.Lock()
    self.__supports = tuple(self.__support(axis)
                            for axis in range(self.__dim))

  mask = property(lambda self: self.__mask)
  pump = property(lambda self: self.__pump)
  setup = property(lambda self: self.__setup)
  path = property(lambda self: self.__path)
  quad = property(lambda self: self.__quad)
  spec = property(lambda self: self.__spec)
  dim = property(lambda self: self.__dim)

  @property
  def provenance(self):
    return _provenance(self.__path)

  def __support(self, axis):
    values = numpy.abs(self.__mask.values) > 0
    if self.__dim == 2:
      values = numpy.any(values, axis = axis)
    indices = numpy.flatnonzero(values)
    if indices.size == 0:
      return (0, 0)
    return (int(indices[0]), int(indices[-1]) + 1)

  def __object_reach(self, axis):
    '''Largest |ρ_o| over the transmitting cells along axis.'''
    low, high = self.__supports[axis]
    if low == high:
      return 0.0
    grid = self.__mask.grid
    coordinates = grid.axis(axis)[[low, high - 1]]
    return float(numpy.abs(coordinates).max()) + grid.pitch / 2

  def __q(self):
    return 1 / (2 * self.__pump.sigma ** 2) \
      - 0.5j * self.__k * self.__spec.beta

  def __source_interval(self, axis):
    pump = self.__pump
    c = pump.center_along(axis)
    if pump.kind is PumpKind.gaussian:
      half = self.__quad.source_extent * pump.sigma
    else:
      half = pump.effective_diameter / 2
    return c - half, c + half

  def __source_reach(self, axis):
    return max(abs(x) for x in self.__source_interval(axis))

  ## Rates: bounds of the kernel variation per unit length over the
  ## evaluation box.

  def __object_rate(self, axis, reach_a, reach_b, transfer = False):
    '''Bound on the kernel variation per unit ρ_o along axis: phase
    derivatives, plus the inverse width of the pump envelope where the
    kernel is a narrow Gaussian.'''
    k = self.__k
    spec = self.__spec
    pump = self.__pump
    c = pump.center_along(axis)
    reach_o = self.__object_reach(axis)
    parallax = k * spec.gamma_b * reach_b / self.__M
    if transfer:
      if pump.kind is PumpKind.gaussian:
        width = pump.sigma
      else:
        width = pump.effective_diameter / 2
      return parallax + k * spec.gamma_b * (abs(c) + width)
    if self.__path is EvaluationPath.fast:
      q = self.__q()
      w = abs((k ** 2 / (2 * q)).imag)
      envelope = math.sqrt(2 * (k ** 2 / (4 * q)).real)
      gamma = abs(spec.gamma_a) * reach_a + spec.gamma_b * reach_o
      return spec.gamma_b * (w * (abs(spec.beta * c) + gamma) + k * abs(c)
                             + envelope) + parallax
    return k * spec.gamma_b * self.__source_reach(axis) + parallax

  def __source_rate(self, axis, reach_a):
    spec = self.__spec
    return self.__k * (abs(spec.beta) * self.__source_reach(axis)
                       + abs(spec.gamma_a) * reach_a
                       + spec.gamma_b * self.__object_reach(axis))

  def oversample(self, axis, reach_a, reach_b, transfer = False):
    '''Samples per mask cell for the ρ_o integral along axis.'''
    pitch = self.__mask.grid.pitch
    rate = self.__object_rate(axis, reach_a, reach_b, transfer)
    factor = self.__quad.object_oversample
    if factor is None:
      factor = max(1, int(math.ceil(rate * pitch
                                    / self.__quad.target_step)))
      if factor > self.__quad.max_oversample:
        factor = self.__quad.max_oversample
        raise cpisim.UndersampledQuadrature('object', rate * pitch / factor,
                                            pitch / factor)
    step = rate * pitch / factor
    if step >= math.pi:
      raise cpisim.UndersampledQuadrature('object', step, pitch / factor)
    return factor

  def object_pitch_limit(self, reach_a, reach_b):
    '''Largest ρ_o pitch passing the phase step check on every axis.'''
    rate = max(self.__object_rate(axis, reach_a, reach_b)
               for axis in range(self.__dim))
    return math.inf if rate == 0 else math.pi / rate

  def __object(self, axis, factor):
    '''Fine ρ_o samples over the support and the weighted factor
    vectors, shaped (R, N_o).'''
    key = (axis, factor)
    with self.__lock:
      cached = self.__objects.get(key)
    if cached is not None:
      return cached
    grid = self.__mask.grid
    low, high = self.__supports[axis]
    pitch = grid.pitch / factor
    offsets = (numpy.arange(factor) - (factor - 1) / 2) * pitch
    coarse = grid.axis(axis)[low:high]
    coordinates = (coarse[:, None] + offsets[None, :]).reshape(-1)
    factors = self.__mask.factors()
    if self.__dim == 1:
      vectors = [row for _, row in factors]
    elif axis == 0:
      vectors = [row for _, row in factors]
    else:
      vectors = [column for column, _ in factors]
    if vectors:
      vectors = numpy.array(vectors)[:, low:high]
    else:
      vectors = numpy.zeros((0, high - low))
    vectors = numpy.repeat(vectors, factor, axis = 1) * pitch
    logger.log('cpisim.correlation', LogLevel.debug,
               'object quadrature along axis %s: %s samples at %g mm',
               axis, coordinates.size, pitch)
    with self.__lock:
      self.__objects[key] = (coordinates, vectors)
    return coordinates, vectors

  def __source(self, axis, reach_a):
    '''ρ_s midpoint samples and their weights F(ρ_s) exp(ikβρ_s²/2) h.'''
    pump = self.__pump
    low, high = self.__source_interval(axis)
    rate = self.__source_rate(axis, reach_a)
    pitch = self.__quad.source_pitch
    if pitch is None:
      pitch = pump.sigma / 8
      if rate > 0:
        pitch = min(pitch, self.__quad.target_step / rate)
    count = max(1, int(math.ceil((high - low) / pitch)))
    pitch = (high - low) / count
    step = rate * pitch
    if step >= math.pi:
      raise cpisim.UndersampledQuadrature('source', step, pitch)
    rho_s = low + (numpy.arange(count) + 0.5) * pitch
    weights = pump.axis_amplitude(rho_s, axis) \
      * numpy.exp(0.5j * self.__k * self.__spec.beta * rho_s ** 2) * pitch
    return rho_s, weights

  ## Kernels: K[j, o], everything of the amplitude but the mask.

  def __source_integral(self, gamma, axis, reach_a):
    '''S(γ) = ∫dρ_s F(ρ_s) exp(ik(βρ_s²/2 - γρ_s)).'''
    k = self.__k
    c = self.__pump.center_along(axis)
    if self.__path is EvaluationPath.fast:
      q = self.__q()
      beta = self.__spec.beta
      return numpy.sqrt(math.pi / q) \
        * numpy.exp(-k ** 2 * (beta * c - gamma) ** 2 / (4 * q)) \
        * numpy.exp(1j * k * (beta * c ** 2 / 2 - gamma * c))
    rho_s, weights = self.__source(axis, reach_a)
    flat = gamma.reshape(-1)
    result = numpy.empty(flat.shape, dtype = complex)
    size = max(1, (1 << 22) // rho_s.size)
    for start, stop in chunks(flat.size, size):
      phases = numpy.exp(-1j * k * flat[start:stop, None] * rho_s[None, :])
      result[start:stop] = phases @ weights
    return result.reshape(gamma.shape)

  def __kernel(self, rho_a, rho_b, axis, reach, transfer):
    reach_a, reach_b = reach
    factor = self.oversample(axis, reach_a, reach_b, transfer)
    coordinates, vectors = self.__object(axis, factor)
    k = self.__k
    spec = self.__spec
    parallax = numpy.exp(-1j * k * spec.gamma_b * (rho_b / self.__M)
                         * coordinates)
    if transfer:
      setup = self.__setup
      kappa = (k / setup.z_bF) * (coordinates[None, :]
                                  + rho_a[:, None] / setup.m)
      inner = self.__pump.axis_fourier(kappa, axis)
    else:
      gamma = spec.gamma_a * rho_a[:, None] \
        + spec.gamma_b * coordinates[None, :]
      inner = self.__source_integral(gamma, axis, reach_a)
    return inner * parallax[None, :], vectors

  def projections(self, rho_a, rho_b, axis, reach = None,
                  transfer = False):
    '''The 1D amplitudes of every mask factor along axis, shaped
    (R, N_a).

    rho_a is an array of coordinates along axis, rho_b a scalar.
    transfer evaluates the focused form through the pump transform
    instead of the source integral.
    '''
    rho_a = numpy.atleast_1d(numpy.asarray(rho_a, dtype = float))
    if reach is None:
      reach = (_reach(rho_a), abs(float(rho_b)))
    kernel, vectors = self.__kernel(rho_a, float(rho_b), axis, reach,
                                    transfer)
    return vectors @ kernel.T

  def amplitudes(self, rho_a, rho_b, reach = None, transfer = False):
    '''Amplitudes over the product grid of the per axis ρ_a
    coordinates, for one ρ_b: shaped (N_a,) in 1D, (N_y, N_x) in 2D.'''
    dim = self.__dim
    rho_a = _axes(rho_a, dim)
    rho_b = tuple(float(b[0]) for b in _axes(rho_b, dim)) if dim == 2 \
      else (float(numpy.asarray(rho_b).reshape(-1)[0]),)
    if reach is None:
      reach = tuple((_reach(a), abs(b)) for a, b in zip(rho_a, rho_b))
    parts = [self.projections(rho_a[axis], rho_b[axis], axis, reach[axis],
                              transfer)
             for axis in range(dim)]
    if dim == 1:
      return parts[0].sum(axis = 0)
    return numpy.einsum('ry,rx->yx', parts[1], parts[0])

  def amplitude(self, rho_a, rho_b):
    '''The amplitude at a single (ρ_a, ρ_b) pair.'''
    value = self.amplitudes(rho_a, rho_b).reshape(-1)[0]
    return TwoPhotonAmplitude(value, self.provenance)

  def __repr__(self):
    return 'Correlator(%r, %r, %s)' % (self.__mask, self.__pump,
                                       self.__path)


def amplitude_oracle(rho_a, rho_b, mask, pump, setup, quad = None):
  '''Ground truth: nested midpoint quadrature over ρ_o and ρ_s.'''
  correlator = Correlator(mask, pump, setup, EvaluationPath.oracle, quad)
  return correlator.amplitude(rho_a, rho_b)


def amplitude_gaussian_fast(rho_a, rho_b, mask, pump, setup, quad = None):
  '''Closed form ρ_s integral of the Gaussian pump, quadrature over ρ_o.'''
  correlator = Correlator(mask, pump, setup, EvaluationPath.fast, quad)
  return correlator.amplitude(rho_a, rho_b)


def object_pitch_limit(mask, pump, setup, reach_a, reach_b,
                       path = EvaluationPath.fast):
  '''Largest ρ_o pitch whose kernel phase steps stay below π for
  |ρ_a| ≤ reach_a and |ρ_b| ≤ reach_b.'''
  return Correlator(mask, pump, setup, path).object_pitch_limit(
    reach_a, reach_b)


class CorrelationMap:

  '''Γ tabulated over grid_a × grid_b.

  values are indexed [i, j] in 1D and [a_y, a_x, b_y, b_x] in 2D.
  '''

  def __init__(self, grid_a, grid_b, values, setup,
               provenance = Provenance.gaussian_fast):
    if grid_a.dim != grid_b.dim:
      raise cpisim.ValidationError(
        'grid dimension', 'S_a grid is %sD but S_b grid is %sD' % (
          grid_a.dim, grid_b.dim))
    values = numpy.array(values, dtype = float)
    if values.shape != grid_a.shape + grid_b.shape:
      raise cpisim.ValidationError(
        'map shape', 'values %s on grids %s x %s' % (
          values.shape, grid_a.shape, grid_b.shape))
    if numpy.any(values < 0) or not numpy.all(numpy.isfinite(values)):
      raise cpisim.ValidationError('nonnegative correlation',
                                   'Γ must be finite and nonnegative')
    if isinstance(provenance, str):
      provenance = Provenance[provenance]
    values.setflags(write = False)
    self.__grid_a = grid_a
    self.__grid_b = grid_b
    self.__values = values
    self.__setup = setup
    self.__provenance = provenance

  grid_a = property(lambda self: self.__grid_a)
  grid_b = property(lambda self: self.__grid_b)
  values = property(lambda self: self.__values)
  setup = property(lambda self: self.__setup)
  provenance = property(lambda self: self.__provenance)

  def envelope(self):
    '''Peak of Γ over ρ_a for every ρ_b sample.'''
    dim = self.__grid_a.dim
    return self.__values.max(axis = tuple(range(dim)))

  def save(self, path):
    '''Archive to a numpy .npz file.'''
    setup = self.__setup.as_dict()
    numpy.savez(
      path, values = self.__values,
      grids = numpy.array([[g.dim, g.pitch, g.count] + list(g.center)
                           + [0.0] * (2 - g.dim)
                           for g in (self.__grid_a, self.__grid_b)]),
      setup = numpy.array([setup[name] for name in setup]),
      provenance = numpy.array(str(self.__provenance)))

  @staticmethod
  def load(path):
    with numpy.load(path) as archive:
      grids = []
      for dim, pitch, count, cx, cy in archive['grids']:
        dim = int(dim)
        grids.append(SampledGrid(dim, pitch, int(count),
                                 (cx, cy)[:dim]))
      setup = cpisim.geometry.OpticalSetup(
        **dict(zip(cpisim.geometry.OpticalSetup.FIELDS,
                   archive['setup'].tolist())))
      return CorrelationMap(grids[0], grids[1], archive['values'], setup,
                            str(archive['provenance']))

  def __repr__(self):
    return 'CorrelationMap(%r x %r, %s)' % (self.__grid_a, self.__grid_b,
                                             self.__provenance)


def _pool(pool):
  return pool if pool is not None else ThreadPool(1)


def grid_reach(grid_a, grid_b, scale = 1.0, shift = 0.0):
  '''Per axis (reach_a, reach_b) of the ρ_a arguments
  scale ρ_a + shift ρ_b over two grids.'''
  reach = []
  for axis in range(grid_a.dim):
    b = _reach(grid_b.axis(axis))
    reach.append((abs(scale) * _reach(grid_a.axis(axis)) + abs(shift) * b,
                  b))
  return tuple(reach)


def gamma_map(mask, pump, setup, grid_a, grid_b,
              path = EvaluationPath.fast, quad = None, pool = None):
  '''Tabulate Γ over grid_a × grid_b; 2D maps grow as N_a² N_b².'''
  correlator = Correlator(mask, pump, setup, path, quad)
  if grid_a.dim != mask.grid.dim or grid_b.dim != mask.grid.dim:
    raise cpisim.ValidationError('grid dimension',
                                 'grids must match the mask dimension')
  reach = grid_reach(grid_a, grid_b)
  pool = _pool(pool)
  a_axes = grid_a.axes
  b_axes = grid_b.axes
  with logger.log('cpisim.correlation', LogLevel.trace,
                  'tabulate Γ on %r x %r', grid_a, grid_b):
    if grid_a.dim == 1:
      def job(bounds):
        return [numpy.abs(correlator.amplitudes(
          a_axes[0], b_axes[0][j], reach)) ** 2 for j in range(*bounds)]
      columns = [c for part in pool.map(job, chunks(grid_b.count, CHUNK))
                 for c in part]
      values = numpy.stack(columns, axis = -1)
    else:
      parts = []
      for axis in range(2):
        def job(bounds, axis = axis):
          return [correlator.projections(a_axes[axis], b_axes[axis][j],
                                         axis, reach[axis])
                  for j in range(*bounds)]
        parts.append(numpy.array(
          [p for part in pool.map(job, chunks(grid_b.count, CHUNK))
           for p in part]))
      x, y = parts
      values = numpy.abs(numpy.einsum('jra,irb->abji', y, x)) ** 2
  return CorrelationMap(grid_a, grid_b, values, setup, correlator.provenance)


def check_envelope(envelope):
  '''Warn when Γ on the border of the S_b grid is not negligible.

  envelope holds the peak of Γ over ρ_a for every ρ_b sample, shaped
  as the S_b grid. Returns the border to peak ratio.
  '''
  envelope = numpy.asarray(envelope, dtype = float)
  peak = float(envelope.max()) if envelope.size else 0.0
  if peak <= 0:
    return 0.0
  border = [envelope[..., 0], envelope[..., -1]]
  if envelope.ndim == 2:
    border += [envelope[0, :], envelope[-1, :]]
  ratio = max(float(b.max()) for b in border) / peak
  if ratio > ENVELOPE_TOLERANCE:
    cpisim.warn(cpisim.TruncatedEnvelope(ratio))
  return ratio


def incoherent_ghost_image(map, label = 'incoherent'):
  '''Σ(ρ_a): Γ summed over the S_b samples times the S_b cell.'''
  grid_a = map.grid_a
  grid_b = map.grid_b
  values = map.values
  check_envelope(map.envelope())
  total = Accumulator()
  for bounds in chunks(grid_b.count, CHUNK):
    partial = Accumulator()
    for j in range(*bounds):
      if grid_a.dim == 1:
        partial.add(values[:, j])
      else:
        partial.add(numpy.sum(numpy.moveaxis(values[:, :, j, :], -1, 0),
                              axis = 0))
    total.merge(partial)
  return Image(grid_a, total.total * grid_b.cell, label = label)


def coherent_ghost_image(mask, pump, setup, grid_a, rho_b = 0.0,
                         quad = None):
  '''The image carried by a single S_b pixel at focus, through the pump
  transform h_tr.'''
  if not setup.at_focus():
    raise cpisim.NotAtFocus(setup.z_b, setup.z_bF)
  path = EvaluationPath.fast if pump.kind is PumpKind.gaussian \
    else EvaluationPath.oracle
  correlator = Correlator(mask, pump, setup, path, quad)
  amplitudes = correlator.amplitudes(grid_a.axes, rho_b, transfer = True)
  return Image(grid_a, numpy.abs(amplitudes) ** 2, label = 'coherent')


def convolution_ghost_image(mask, pump, setup, grid_a, oversample = 1):
  '''|A|² convolved with |h_tr|², the focused incoherent image of a
  mask, on the mask grid split oversample times per cell.

  Σ_F summed over a finite S_b reaches this image only when the S_b
  grid samples Γ finely and far enough. The ρ_b pitch must stay below
  λ M z_bF divided by the width of the object support. Sharp mask
  edges spread Γ along ρ_b well past the pump envelope, and the
  truncation error falls roughly as the inverse S_b half width: for a
  26 μm slit on the z_bF = 10 mm, M = 0.8 bench it is about 5% at ±3Mσ
  and under 1% from ±11.5 mm on, after peak normalization.
  Alternatively N_b pitch_b = λ M z_bF / Δo,
  with Δo the object quadrature pitch and N_b at least the object
  sample count, makes the S_b sum an exact discrete Parseval identity.
  '''
  grid = mask.grid.oversampled(oversample)
  intensity = numpy.abs(mask.values) ** 2
  for axis in range(grid.dim):
    intensity = numpy.repeat(intensity, oversample, axis = axis)
  k = setup.wavenumber
  kernels = []
  for axis in range(grid.dim):
    kappa = (k / setup.z_bF) * (grid.axis(axis)[None, :]
                                + grid_a.axis(axis)[:, None] / setup.m)
    kernels.append(numpy.abs(pump.axis_fourier(kappa, axis)) ** 2
                   * grid.pitch)
  if grid.dim == 1:
    values = kernels[0] @ intensity
  else:
    values = kernels[1] @ intensity @ kernels[0].T
  return Image(grid_a, values, label = 'convolution')


def stationary_object_point(rho_a, rho_b, setup):
  '''The object point ρ_o selected by (ρ_a, ρ_b) in geometrical optics.'''
  ratio = setup.z_b / setup.z_bF
  m = setup.m
  M = setup.M
  if isinstance(rho_a, tuple):
    return tuple(-ratio * a / m - (b / M) * (1 - ratio)
                 for a, b in zip(rho_a, rho_b))
  return -ratio * rho_a / m - (rho_b / M) * (1 - ratio)


def stationary_source_point(rho_b, M):
  '''The source point ρ_s imaged on ρ_b.'''
  if M == 0:
    raise cpisim.ValidationError('source magnification',
                                 'M must be nonzero')
  if isinstance(rho_b, tuple):
    return tuple(-b / M for b in rho_b)
  return -rho_b / M


def geometric_gamma(mask, pump, setup, rho_a, rho_b):
  '''Γ in the geometrical-optics limit:
  |A(stationary object point)|² |F(stationary source point)|².'''
  rho_o = stationary_object_point(rho_a, rho_b, setup)
  rho_s = stationary_source_point(rho_b, setup.M)
  return numpy.abs(mask.evaluate(rho_o)) ** 2 \
    * numpy.abs(pump_amplitude(rho_s, pump)) ** 2
