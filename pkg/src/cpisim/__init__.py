# Copyright (C) 2026, the cpisim authors
#
# This software is provided "as is" without warranty of any kind,
# either expressed or implied, including but not limited to the
# implied warranties of fitness for a particular purpose.
#
# See the LICENSE file for more information.

'''Wave-optics simulation of correlation plenoptic imaging.

Lengths are millimeters throughout, except where a name says otherwise
(`lambda_um`, `pixel_um`).
'''

import builtins
import contextlib
import sys
import threading

__version__ = '1.0.0'

class Exception(builtins.Exception):

  '''Base class of every error raised by cpisim.'''

  pass


class ValidationError(Exception):

  '''An input violates one of the model invariants.'''

  def __init__(self, invariant, detail):
    self.__invariant = invariant
    self.__detail = detail
    super().__init__('%s: %s' % (invariant, detail))

  @property
  def invariant(self):
    '''Short name of the violated invariant.'''
    return self.__invariant

  @property
  def detail(self):
    return self.__detail


class NoFocusError(ValidationError):

  '''The two-photon thin lens equation has no positive finite solution.

  Raised when the object plane conjugate to the sensor would lie behind
  the source or at infinity.
  '''

  def __init__(self, detail):
    super().__init__('two-photon focus', detail)


class UnderresolvedMask(ValidationError):

  '''A mask feature is narrower than two grid samples.'''

  def __init__(self, feature, pitch):
    self.__feature = feature
    self.__pitch = pitch
    super().__init__(
      'mask sampling',
      'feature of %g mm is under two samples of %g mm' % (feature, pitch))

  @property
  def feature(self):
    return self.__feature

  @property
  def pitch(self):
    return self.__pitch


class OverlapError(ValidationError):

  '''The two slits of a double slit touch or intersect.'''

  def __init__(self, width, separation):
    self.__width = width
    self.__separation = separation
    super().__init__(
      'double slit geometry',
      'slits of width %g mm at %g mm center to center overlap' % (
        width, separation))

  @property
  def width(self):
    return self.__width

  @property
  def separation(self):
    return self.__separation


class GridTooSmall(ValidationError):

  '''A shape does not fit in the sampled grid.'''

  def __init__(self, needed, available):
    self.__needed = needed
    self.__available = available
    super().__init__(
      'grid extent',
      'shape spans %g mm but the grid covers %g mm' % (needed, available))

  @property
  def needed(self):
    return self.__needed

  @property
  def available(self):
    return self.__available


class ZeroFocal(ValidationError):

  '''A lens was given a zero focal length.'''

  def __init__(self):
    super().__init__('lens focal length', 'focal length must be nonzero')


class NotAtFocus(ValidationError):

  '''A focused-only operation was applied to a misfocused setup.'''

  def __init__(self, z_b, z_bF):
    self.__z_b = z_b
    self.__z_bF = z_bF
    super().__init__(
      'focused setup',
      'object at %.12g mm, ghost focus at %.12g mm' % (z_b, z_bF))

  @property
  def z_b(self):
    return self.__z_b

  @property
  def z_bF(self):
    return self.__z_bF


class NonGaussianPump(ValidationError):

  '''The closed-form source integral only exists for Gaussian pumps.'''

  def __init__(self, kind):
    self.__kind = kind
    super().__init__('gaussian pump',
                     'the fast path cannot integrate a %s pump' % kind)

  @property
  def kind(self):
    return self.__kind


class ZeroReference(ValidationError):

  '''Normalization reference value is not positive.'''

  def __init__(self, mode, value):
    self.__mode = mode
    self.__value = value
    super().__init__('normalization',
                     '%s reference value is %r' % (mode, value))

  @property
  def mode(self):
    return self.__mode


class AlphaZero(ValidationError):

  '''The misfocus ratio is zero, the refocusing bound is undefined.'''

  def __init__(self):
    super().__init__('misfocus ratio', 'alpha must be nonzero')


class UndersampledQuadrature(Exception):

  '''Adjacent quadrature samples of a kernel differ by π or more in phase.'''

  def __init__(self, integral, step, pitch):
    self.__integral = integral
    self.__step = step
    self.__pitch = pitch
    super().__init__(
      'undersampled %s integral: phase step %.3g rad at pitch %.3g mm '
      '(must stay below pi)' % (integral, step, pitch))

  @property
  def integral(self):
    '''Name of the offending integral, `object` or `source`.'''
    return self.__integral

  @property
  def step(self):
    return self.__step

  @property
  def pitch(self):
    return self.__pitch


class ParseError(Exception):

  '''A scenario document is malformed.'''

  def __init__(self, message, line = None, key = None):
    self.__line = line
    self.__key = key
    where = []
    if line is not None:
      where.append('line %s' % line)
    if key is not None:
      where.append('key %s' % key)
    if where:
      message = '%s: %s' % (', '.join(where), message)
    super().__init__(message)

  @property
  def line(self):
    return self.__line

  @property
  def key(self):
    return self.__key


class TruncatedEnvelope(Exception):

  '''The S_b grid cuts the source envelope off.'''

  def __init__(self, ratio):
    self.__ratio = ratio
    super().__init__(
      'truncated source envelope: boundary values reach %.3g of the peak'
      % ratio)

  @property
  def ratio(self):
    return self.__ratio


_LISTENERS = []
_LISTENERS_LOCK = threading.Lock()

def warn(warning):
  '''Report a non fatal condition on standard error.'''
  print('Warning: %s.' % warning, file = sys.stderr)
  with _LISTENERS_LOCK:
    listeners = list(_LISTENERS)
  for listener in listeners:
    listener.append(warning)


@contextlib.contextmanager
def capture_warnings():
  '''Collect the warnings issued within the block.'''
  caught = []
  with _LISTENERS_LOCK:
    _LISTENERS.append(caught)
  try:
    yield caught
  finally:
    with _LISTENERS_LOCK:
      _LISTENERS[:] = [l for l in _LISTENERS if l is not caught]
