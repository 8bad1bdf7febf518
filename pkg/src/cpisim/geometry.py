# Copyright (C) 2026, the cpisim authors
#
# This software is provided "as is" without warranty of any kind,
# either expressed or implied, including but not limited to the
# implied warranties of fitness for a particular purpose.
#
# See the LICENSE file for more information.

'''Setup parameters and the scalar geometry derived from them.

Arm a: source, free space z_a, lens L_a (focal f), free space z_a',
sensor S_a. Arm b: source, free space z_b, object, free space z_b',
lens L_b (focal F_b), free space z_b'', sensor S_b.

>>> round(zeta(10, 30, 12), 9)
20.0
>>> round(solve_ghost_focus(10, 30, 12), 9)
10.0
>>> ghost_magnification(10, 30, 10)
1.5
'''

import math

import cpisim
from cpisim.log import logger, LogLevel
from cpisim.utils import property_memoize

FOCUS_TOLERANCE = 1e-9

def zeta(z_a, z_a_img, f):
  '''(1/z_a + 1/z_a' - 1/f)^-1, infinite when the sum vanishes.'''
  terms = (1 / z_a, 1 / z_a_img, -1 / f)
  parenthesis = sum(terms)
  if abs(parenthesis) <= 1e-14 * max(abs(t) for t in terms):
    return math.inf
  return 1 / parenthesis


def solve_ghost_focus(z_a, z_a_img, f):
  '''The object distance z_bF satisfying the two-photon thin lens
  equation 1/(z_a + z_bF) + 1/z_a' = 1/f.'''
  power = 1 / f - 1 / z_a_img
  if power <= 0:
    raise cpisim.NoFocusError(
      'sensor at %g mm is not beyond the focal length %g mm, the '
      'conjugate object plane is at infinity' % (z_a_img, f))
  z_bF = 1 / power - z_a
  if z_bF <= 0:
    raise cpisim.NoFocusError(
      'the conjugate object plane lies %g mm behind the source' % -z_bF)
  return z_bF


def ghost_magnification(z_a, z_a_img, z_bF):
  return z_a_img / (z_a + z_bF)


def conjugate_distance(z_a, z_b, f):
  '''Distance behind L_a where the ghost image of an object at z_b
  focuses.'''
  power = 1 / f - 1 / (z_a + z_b)
  if power <= 0:
    raise cpisim.NoFocusError(
      'an object at %g mm has no real ghost image behind L_a' % z_b)
  return 1 / power


def object_distance_for_alpha(setup, alpha):
  '''The object distance whose misfocus ratio is alpha in setup.'''
  if alpha <= 0:
    raise cpisim.NoFocusError('alpha must be positive, got %g' % alpha)
  power = 1 / setup.f - 1 / (alpha * setup.z_a_img)
  if power <= 0:
    raise cpisim.NoFocusError(
      'alpha %g puts the conjugate plane at infinity' % alpha)
  z_b = 1 / power - setup.z_a
  if z_b <= 0:
    raise cpisim.NoFocusError(
      'alpha %g requires the object behind the source' % alpha)
  return z_b


class OpticalSetup:

  '''Distances, focal lengths, wavelength and pump width of both arms.

  z_a           -- source to lens L_a.
  z_a_img       -- lens L_a to sensor S_a.
  f             -- focal length of L_a.
  z_b           -- source to object.
  z_b_obj_lens  -- object to lens L_b.
  z_b_lens_sens -- lens L_b to sensor S_b.
  F_b           -- focal length of L_b; solved from the source-imaging
                   condition 1/(z_b' + z_b'') + 1/z_b = 1/F_b if None.
  wavelength    -- degenerate down-converted wavelength.
  sigma         -- Gaussian pump width parameter.
  '''

  FIELDS = ('z_a', 'z_a_img', 'f', 'z_b', 'z_b_obj_lens',
            'z_b_lens_sens', 'F_b', 'wavelength', 'sigma')

  def __init__(self, z_a, z_a_img, f, z_b, z_b_obj_lens, z_b_lens_sens,
               F_b = None, wavelength = 1e-3, sigma = 0.6):
    values = {
      'z_a': z_a,
      'z_a_img': z_a_img,
      'f': f,
      'z_b': z_b,
      'z_b_obj_lens': z_b_obj_lens,
      'z_b_lens_sens': z_b_lens_sens,
      'wavelength': wavelength,
      'sigma': sigma,
    }
    for name, value in values.items():
      value = float(value)
      if not math.isfinite(value) or value <= 0:
        raise cpisim.ValidationError(
          'positive length', '%s must be positive, got %r' % (name, value))
      values[name] = value
    imaged = 1 / (1 / (values['z_b_obj_lens'] + values['z_b_lens_sens'])
                  + 1 / values['z_b'])
    if F_b is None:
      F_b = imaged
    else:
      F_b = float(F_b)
      if not math.isfinite(F_b) or F_b <= 0:
        raise cpisim.ValidationError(
          'positive length', 'F_b must be positive, got %r' % F_b)
      if abs(F_b - imaged) > FOCUS_TOLERANCE * F_b:
        raise cpisim.ValidationError(
          'source-imaging condition',
          '1/(z_b\' + z_b\'\') + 1/z_b = 1/%.12g mm, but F_b = %.12g mm'
          % (imaged, F_b))
    values['F_b'] = F_b
    for name in OpticalSetup.FIELDS:
      setattr(self, '_OpticalSetup__%s' % name, values[name])

  z_a = property(lambda self: self.__z_a)
  z_a_img = property(lambda self: self.__z_a_img)
  f = property(lambda self: self.__f)
  z_b = property(lambda self: self.__z_b)
  z_b_obj_lens = property(lambda self: self.__z_b_obj_lens)
  z_b_lens_sens = property(lambda self: self.__z_b_lens_sens)
  F_b = property(lambda self: self.__F_b)
  wavelength = property(lambda self: self.__wavelength)
  sigma = property(lambda self: self.__sigma)

  @property
  def wavenumber(self):
    '''Ω/c = 2π/λ, in inverse millimeters.'''
    return 2 * math.pi / self.__wavelength

  def as_dict(self):
    return dict((name, getattr(self, name)) for name in OpticalSetup.FIELDS)

  def replace(self, **changes):
    '''A copy with some fields changed; F_b is re-solved unless given.'''
    values = self.as_dict()
    values['F_b'] = None
    values.update(changes)
    return OpticalSetup(**values)

  def with_object_distance(self, z_b):
    '''Move the object, keeping z_b' and the source magnification M.'''
    z_b_lens_sens = self.M * (z_b + self.__z_b_obj_lens)
    logger.log('cpisim.geometry', LogLevel.debug,
               'move object to %g mm, S_b at %g mm behind L_b',
               z_b, z_b_lens_sens)
    return self.replace(z_b = z_b, z_b_lens_sens = z_b_lens_sens)

  @property_memoize
  def zeta(self):
    return zeta(self.__z_a, self.__z_a_img, self.__f)

  @property_memoize
  def z_bF(self):
    '''Object distance in focus on S_a.'''
    return solve_ghost_focus(self.__z_a, self.__z_a_img, self.__f)

  @property
  def m(self):
    '''Ghost image magnification.'''
    return ghost_magnification(self.__z_a, self.__z_a_img, self.z_bF)

  @property
  def M(self):
    '''Magnification of the source image on S_b.'''
    return source_magnification(self)

  @property
  def alpha(self):
    return misfocus_alpha(self)

  def at_focus(self, tolerance = FOCUS_TOLERANCE):
    return abs(self.__z_b - self.z_bF) <= tolerance * self.z_bF

  @property_memoize
  def derived(self):
    return DerivedGeometry(self)

  def __eq__(self, other):
    return isinstance(other, OpticalSetup) and \
      self.as_dict() == other.as_dict()

  def __hash__(self):
    return hash(tuple(sorted(self.as_dict().items())))

  def __repr__(self):
    return 'OpticalSetup(%s)' % ', '.join(
      '%s = %.12g' % item for item in self.as_dict().items())


class DerivedGeometry:

  '''ζ, z_bF, m, M and α of a setup, computed once.'''

  def __init__(self, setup):
    self.__zeta = setup.zeta
    self.__z_bF = setup.z_bF
    self.__m = setup.m
    self.__M = setup.M
    self.__alpha = setup.alpha

  zeta = property(lambda self: self.__zeta)
  z_bF = property(lambda self: self.__z_bF)
  m = property(lambda self: self.__m)
  M = property(lambda self: self.__M)
  alpha = property(lambda self: self.__alpha)

  def __repr__(self):
    return 'DerivedGeometry(zeta = %g, z_bF = %g, m = %g, M = %g, ' \
      'alpha = %g)' % (self.__zeta, self.__z_bF, self.__m, self.__M,
                       self.__alpha)


def source_magnification(setup):
  return setup.z_b_lens_sens / (setup.z_b + setup.z_b_obj_lens)


def misfocus_alpha(setup):
  '''Ratio of the true ghost-image plane distance to the sensor
  distance; 1 at focus.'''
  if setup.at_focus(tolerance = 0):
    return 1.0
  z_img = conjugate_distance(setup.z_a, setup.z_b, setup.f)
  return z_img / setup.z_a_img
