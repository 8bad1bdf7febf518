# Copyright (C) 2026, the cpisim authors
#
# This software is provided "as is" without warranty of any kind,
# either expressed or implied, including but not limited to the
# implied warranties of fitness for a particular purpose.
#
# See the LICENSE file for more information.

'''Paraxial building blocks: quadratic phases, Fresnel propagation by
direct quadrature, thin lenses and the reduced arm propagators.

Propagation kernels are separable in x and y, so 2D fields are
propagated as K_y · E · K_xᵀ.
'''

import math

import numpy

import cpisim
from cpisim.log import logger, LogLevel
from cpisim.scene import SampledGrid, squared_norm, dot

def quadratic_phase(x, y):
  '''G(x)_[y] = exp(i y |x|² / 2).'''
  return numpy.exp(0.5j * y * squared_norm(x))


class ComplexField:

  '''A complex amplitude sampled on a grid.

  The physical field is constant * values: propagation prefactors are
  accumulated in constant instead of being folded into the samples.
  '''

  def __init__(self, grid, values, wavenumber, constant = 1 + 0j):
    values = numpy.array(values, dtype = complex)
    if values.shape != grid.shape:
      raise cpisim.ValidationError(
        'field shape', 'values %s on a grid of shape %s' % (
          values.shape, grid.shape))
    if not numpy.all(numpy.isfinite(values)):
      raise cpisim.ValidationError('finite field',
                                   'field values must be finite')
    self.__grid = grid
    self.__values = values
    self.__wavenumber = float(wavenumber)
    self.__constant = complex(constant)

  grid = property(lambda self: self.__grid)
  values = property(lambda self: self.__values)
  wavenumber = property(lambda self: self.__wavenumber)
  constant = property(lambda self: self.__constant)

  @property
  def physical(self):
    return self.__constant * self.__values

  @property
  def intensity(self):
    return numpy.abs(self.physical) ** 2

  def __repr__(self):
    return 'ComplexField(%r, k = %g / mm)' % (self.__grid, self.__wavenumber)


def _apply(kernels, values, dim):
  if dim == 1:
    return kernels[0] @ values
  return kernels[1] @ values @ kernels[0].T


def _fresnel_kernel(source, target, wavenumber, distance):
  '''Midpoint quadrature matrix of the Fresnel kernel along one axis.'''
  difference = target[:, None] - source[None, :]
  return quadratic_phase(difference, wavenumber / distance)


def max_kernel_step(source, target, pitch, wavenumber, distance):
  '''Largest phase increment of the Fresnel kernel between adjacent
  source samples.'''
  reach = max(abs(target.max() - source.min()),
              abs(target.min() - source.max()))
  return wavenumber * reach * pitch / abs(distance)


def free_propagate(field, distance, grid = None):
  '''Propagate field over distance (negative distances propagate back,
  with the conjugate kernel) onto grid, the input grid by default.

  E(ρ₂) = ∫dρ₁ E(ρ₁) 𝒢(ρ₂ - ρ₁, distance) by midpoint quadrature.
  '''
  if distance == 0:
    raise cpisim.ValidationError('propagation distance',
                                 'distance must be nonzero')
  source = field.grid
  if grid is None:
    grid = source
  if grid.dim != source.dim:
    raise cpisim.ValidationError(
      'grid dimension', 'cannot propagate a %sD field onto a %sD grid' % (
        source.dim, grid.dim))
  k = field.wavenumber
  kernels = []
  for axis in range(source.dim):
    x1 = source.axis(axis)
    x2 = grid.axis(axis)
    step = max_kernel_step(x1, x2, source.pitch, k, distance)
    if step >= math.pi:
      cpisim.warn('Fresnel kernel undersampled over %g mm: phase step '
                  '%.3g rad along axis %s' % (distance, step, axis))
    kernels.append(_fresnel_kernel(x1, x2, k, distance) * source.pitch)
  values = _apply(kernels, field.values, source.dim)
  if source.dim == 1:
    prefactor = numpy.sqrt(k / (2j * math.pi * distance)) \
      * numpy.exp(1j * k * distance)
  else:
    prefactor = -1j * k * numpy.exp(1j * k * distance) \
      / (2 * math.pi * distance)
  logger.log('cpisim.propagation', LogLevel.debug,
             'propagate %s over %g mm onto %r', field, distance, grid)
  return ComplexField(grid, values, k, field.constant * prefactor)


def lens_phase(field, focal):
  '''Multiply by the thin lens transmission G(ρ)_[-k/focal]; an
  infinite focal length is no lens.'''
  if focal == 0:
    raise cpisim.ZeroFocal()
  if math.isinf(focal):
    return ComplexField(field.grid, field.values, field.wavenumber,
                        field.constant)
  phase = quadratic_phase(field.grid.coordinates(),
                          -field.wavenumber / focal)
  return ComplexField(field.grid, field.values * phase, field.wavenumber,
                      field.constant)


def _finite_zeta(setup):
  zeta = setup.zeta
  if math.isinf(zeta):
    raise cpisim.ValidationError(
      'finite zeta', '1/z_a + 1/z_a\' - 1/f vanishes (collimated '
      'two-photon imaging)')
  return zeta


def green_a_reduced(rho_a, rho_s, setup):
  '''The ρ_s dependent factor of the arm a propagator.

  G(ρ_s)_[(k/z_a)(1 - ζ/z_a)] exp(-i k ζ ρ_s·ρ_a / (z_a z_a')); the
  ρ_a-only phase and constants drop out of |Γ|.
  '''
  zeta = _finite_zeta(setup)
  k = setup.wavenumber
  z_a = setup.z_a
  return quadratic_phase(rho_s, k / z_a * (1 - zeta / z_a)) \
    * numpy.exp(-1j * k * zeta / (z_a * setup.z_a_img) * dot(rho_s, rho_a))


def green_b_reduced(rho_b, rho_s, rho_o, setup):
  '''The ρ_s and ρ_o dependent factor of the arm b propagator.

  G(ρ_s)_[k/z_b] exp(-i (k/z_b)(ρ_s + ρ_b/M)·ρ_o).
  '''
  k = setup.wavenumber
  z_b = setup.z_b
  M = setup.M
  if isinstance(rho_s, tuple):
    shifted = tuple(s + b / M for s, b in zip(rho_s, rho_b))
  else:
    shifted = rho_s + rho_b / M
  return quadratic_phase(rho_s, k / z_b) \
    * numpy.exp(-1j * k / z_b * dot(shifted, rho_o))


def arm_a_chain(field, setup, lens_grid, sensor_grid):
  '''Source field to S_a by explicit propagation: z_a of free space,
  lens L_a, z_a' of free space.'''
  at_lens = free_propagate(field, setup.z_a, lens_grid)
  return free_propagate(lens_phase(at_lens, setup.f), setup.z_a_img,
                        sensor_grid)


def arm_a_reduced(field, setup, sensor_grid):
  '''The same field on S_a from the reduced propagator, up to the ρ_a
  only phase and constants.'''
  source = field.grid
  kernels = []
  for axis in range(source.dim):
    rho_s = source.axis(axis)[None, :]
    rho_a = sensor_grid.axis(axis)[:, None]
    kernels.append(green_a_reduced(rho_a, rho_s, setup) * source.pitch)
  values = _apply(kernels, field.values, source.dim)
  return ComplexField(sensor_grid, values, field.wavenumber)
