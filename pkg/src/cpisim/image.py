# Copyright (C) 2026, the cpisim authors
#
# This software is provided "as is" without warranty of any kind,
# either expressed or implied, including but not limited to the
# implied warranties of fitness for a particular purpose.
#
# See the LICENSE file for more information.

import numpy

import cpisim
import cpisim.enumeration

class Normalization(cpisim.enumeration.Enumerated,
                    values = ['none', 'peak', 'center']):
  pass


class Image:

  '''Nonnegative intensity sampled on the S_a grid.'''

  def __init__(self, grid, values, normalization = Normalization.none,
               label = ''):
    values = numpy.array(values, dtype = float)
    if values.shape != grid.shape:
      raise cpisim.ValidationError(
        'image shape', 'values %s on a grid of shape %s' % (
          values.shape, grid.shape))
    if not numpy.all(numpy.isfinite(values)):
      raise cpisim.ValidationError('finite image',
                                   'intensities must be finite')
    if numpy.any(values < 0):
      raise cpisim.ValidationError('nonnegative image',
                                   'intensities must be nonnegative')
    if isinstance(normalization, str):
      normalization = Normalization[normalization]
    values.setflags(write = False)
    self.__grid = grid
    self.__values = values
    self.__normalization = normalization
    self.__label = label

  grid = property(lambda self: self.__grid)
  values = property(lambda self: self.__values)
  normalization = property(lambda self: self.__normalization)
  label = property(lambda self: self.__label)

  @property
  def peak(self):
    return float(self.__values.max())

  def center_value(self):
    '''The sample at ρ_a = 0.'''
    grid = self.__grid
    index = tuple(grid.index_of(0.0, axis)
                  for axis in reversed(range(grid.dim)))
    for axis in range(grid.dim):
      position = grid.axis(axis)[grid.index_of(0.0, axis)]
      if abs(position) > grid.pitch / 2:
        raise cpisim.ValidationError(
          'image center', 'the grid does not cover rho_a = 0')
    return float(self.__values[index])

  def relabel(self, label):
    return Image(self.__grid, self.__values, self.__normalization, label)

  def __repr__(self):
    return 'Image(%r, %s, %s)' % (self.__label, self.__normalization,
                                  self.__grid)


def normalize(image, mode = Normalization.peak):
  '''Divide by the maximum (peak) or by the ρ_a = 0 sample (center).'''
  if isinstance(mode, str):
    mode = Normalization[mode]
  if mode is Normalization.peak:
    reference = image.peak
  elif mode is Normalization.center:
    reference = image.center_value()
  else:
    raise cpisim.ValidationError('normalization',
                                 'normalize to peak or center, not %s' % mode)
  if not reference > 0:
    raise cpisim.ZeroReference(mode, reference)
  return Image(image.grid, image.values / reference, mode, image.label)
