# Copyright (C) 2026, the cpisim authors
#
# This software is provided "as is" without warranty of any kind,
# either expressed or implied, including but not limited to the
# implied warranties of fitness for a particular purpose.
#
# See the LICENSE file for more information.

'''Resolution estimates and the depth of field comparison between a
standard plenoptic camera and correlation plenoptic imaging.

>>> sensor = SensorSpec(0.006, 300, 320)
>>> d_s = effective_lens_diameter(PumpProfile(0.6), 10, 3)
>>> round(dof_ratio_cpi(sensor, d_s), 3)
0.261
>>> required_nu_standard(dof_ratio_cpi(sensor, d_s), 0.006, d_s)
18
'''

import math

import cpisim
from cpisim.log import logger, LogLevel
from cpisim.scene import PumpProfile

class SensorSpec:

  '''Pixel pitch δ and pixel counts of S_a and S_b.'''

  def __init__(self, pixel, count_a, count_b):
    pixel = float(pixel)
    if not math.isfinite(pixel) or pixel <= 0:
      raise cpisim.ValidationError('sensor pixel',
                                   'pixel must be positive, got %r' % pixel)
    for name, count in (('count_a', count_a), ('count_b', count_b)):
      if int(count) != count or count < 1:
        raise cpisim.ValidationError(
          'sensor count', '%s must be a positive integer, got %r' % (
            name, count))
    self.__pixel = pixel
    self.__count_a = int(count_a)
    self.__count_b = int(count_b)

  pixel = property(lambda self: self.__pixel)
  count_a = property(lambda self: self.__count_a)
  count_b = property(lambda self: self.__count_b)

  @property
  def total(self):
    return self.__count_a + self.__count_b

  def __repr__(self):
    return 'SensorSpec(%g mm, %s + %s)' % (self.__pixel, self.__count_a,
                                           self.__count_b)


def _positive(**values):
  for name, value in values.items():
    if not value > 0:
      raise cpisim.ValidationError(
        'positive %s' % name, '%s must be positive, got %r' % (name, value))


def effective_lens_diameter(pump, z_a, z_b):
  '''D_s = D'_s (1 + z_a / z_b), the pump seen as the lens of an
  equivalent plenoptic camera.'''
  _positive(z_b = z_b)
  return pump.effective_diameter * (1 + z_a / z_b)


def dof_ratio_cpi(sensor, d_s):
  '''(Δx/Δu) for CPI: (δ / D_s) N_b.'''
  _positive(d_s = d_s)
  return (sensor.pixel / d_s) * sensor.count_b


def dof_ratio_standard(pixel, n_u, d_s):
  '''(Δx/Δu) for a standard plenoptic camera: (δ / D_s) N_u².'''
  _positive(pixel = pixel, n_u = n_u, d_s = d_s)
  return (pixel / d_s) * n_u ** 2


def required_nu_standard(target_ratio, pixel, d_s):
  '''Smallest N_u with (δ / D_s) N_u² ≥ target_ratio.

  >>> required_nu_standard(1.04 * 4 * 0.006 / 7.0, 0.006, 7.0)
  3
  '''
  _positive(target_ratio = target_ratio, pixel = pixel, d_s = d_s)
  ratio = pixel / d_s
  n = max(1, int(math.ceil(math.sqrt(target_ratio / ratio))))
  # The square root may land one off on exact squares.
  while n > 1 and ratio * (n - 1) ** 2 >= target_ratio:
    n -= 1
  while ratio * n ** 2 < target_ratio:
    n += 1
  return n


def refocusable(alpha, dx, du):
  '''Whether an object at misfocus ratio alpha can be refocused
  without loss: |1 - 1/α| < Δx/Δu.'''
  if alpha == 0:
    raise cpisim.AlphaZero()
  _positive(du = du)
  return abs(1 - 1 / alpha) < dx / du


def spot_object(m, z_bF, wavelength, pump_diameter):
  '''Δρ_a ~ m (λ/2π) z_bF / D, the ghost image resolution.'''
  _positive(m = m, z_bF = z_bF, wavelength = wavelength,
            pump_diameter = pump_diameter)
  return m * wavelength / (2 * math.pi) * z_bF / pump_diameter


def spot_source(M, z_b, wavelength, d):
  '''Δρ_b ~ M (λ/2π) z_b / d, the source image resolution on S_b.'''
  _positive(M = M, z_b = z_b, wavelength = wavelength, d = d)
  return M * wavelength / (2 * math.pi) * z_b / d


class DofReport:

  '''Depth of field and resolution figures of one configuration.'''

  FIELDS = (
    ('effective_lens_diameter', 'D_s', 'mm'),
    ('ratio_cpi', '(dx/du) CPI', ''),
    ('ratio_std', '(dx/du) standard', ''),
    ('n_u_required', 'N_u standard', ''),
    ('resolution_loss_factor', 'resolution loss', 'x'),
    ('dx_std_single', 'dx standard, delta N_u', 'mm'),
    ('dx_std_double', 'dx standard, 2 delta N_u', 'mm'),
    ('dx_cpi', 'dx CPI, 2 delta', 'mm'),
    ('du_cpi', 'du CPI, 2 D_s / N_b', 'mm'),
    ('alpha', 'alpha', ''),
    ('refocusable_pixel', 'refocusable at pixel scale', ''),
    ('refocusable_feature', 'refocusable at feature scale', ''),
    ('spot_object', 'spot S_a, D\'_s', 'mm'),
    ('spot_object_2sigma', 'spot S_a, 2 sigma', 'mm'),
    ('spot_source', 'spot S_b', 'mm'),
  )

  def __init__(self, **values):
    missing = [name for name, _, _ in DofReport.FIELDS if name not in values]
    if missing:
      raise cpisim.ValidationError('report fields',
                                   'missing %s' % ', '.join(missing))
    self.__values = values

  def __getattr__(self, name):
    values = self.__dict__.get('_DofReport__values', {})
    if name in values:
      return values[name]
    raise AttributeError(name)

  def rows(self):
    '''(label, value, unit) triples in display order.'''
    return [(label, self.__values[name], unit)
            for name, label, unit in DofReport.FIELDS]

  def __repr__(self):
    return 'DofReport(ratio_cpi = %.4g, n_u = %s)' % (
      self.__values['ratio_cpi'], self.__values['n_u_required'])


def compare_report(setup, pump, sensor, object_feature):
  d_s = effective_lens_diameter(pump, setup.z_a, setup.z_b)
  ratio_cpi = dof_ratio_cpi(sensor, d_s)
  n_u = required_nu_standard(ratio_cpi, sensor.pixel, d_s)
  alpha = setup.alpha
  du = 2 * d_s / sensor.count_b
  report = DofReport(
    effective_lens_diameter = d_s,
    ratio_cpi = ratio_cpi,
    ratio_std = dof_ratio_standard(sensor.pixel, n_u, d_s),
    n_u_required = n_u,
    resolution_loss_factor = n_u,
    dx_std_single = sensor.pixel * n_u,
    dx_std_double = 2 * sensor.pixel * n_u,
    dx_cpi = 2 * sensor.pixel,
    du_cpi = du,
    alpha = alpha,
    refocusable_pixel = refocusable(alpha, 2 * sensor.pixel, du),
    refocusable_feature = refocusable(alpha, setup.m * object_feature, du),
    spot_object = spot_object(setup.m, setup.z_bF, setup.wavelength,
                              pump.effective_diameter),
    spot_object_2sigma = spot_object(setup.m, setup.z_bF, setup.wavelength,
                                     2 * pump.sigma),
    spot_source = spot_source(setup.M, setup.z_b, setup.wavelength,
                              object_feature),
  )
  logger.log('cpisim.analysis', LogLevel.debug, '%s', report)
  return report
