# Copyright (C) 2026, the cpisim authors
#
# This software is provided "as is" without warranty of any kind,
# either expressed or implied, including but not limited to the
# implied warranties of fitness for a particular purpose.
#
# See the LICENSE file for more information.

import hashlib

import numpy

def property_memoize(f):
  '''A read-only property computed once per instance.'''
  def result(self):
    prop = '_%s__%s' % (self.__class__.__name__, f.__name__)
    if not hasattr(self, prop):
      setattr(self, prop, f(self))
    return getattr(self, prop)
  result.__doc__ = f.__doc__
  return property(result)


class Accumulator:

  '''Compensated (Neumaier) running sum of equally shaped arrays.

  Terms are added in call order, so the total only depends on that
  order, never on how the terms were produced.

  >>> acc = Accumulator()
  >>> for v in [1e16, 1.0, -1e16]:
  ...   acc.add(v)
  >>> float(acc.total)
  1.0
  '''

  def __init__(self):
    self.__sum = None
    self.__compensation = None
    self.__count = 0

  def add(self, values):
    values = numpy.asarray(values, dtype = float)
    self.__count += 1
    if self.__sum is None:
      self.__sum = values.copy()
      self.__compensation = numpy.zeros_like(values)
      return
    total = self.__sum + values
    self.__compensation += numpy.where(
      numpy.abs(self.__sum) >= numpy.abs(values),
      (self.__sum - total) + values,
      (values - total) + self.__sum)
    self.__sum = total

  def merge(self, other):
    '''Fold another accumulator in, keeping its compensation.'''
    if other.count == 0:
      return
    compensation = other._Accumulator__compensation
    self.add(other._Accumulator__sum)
    self.__compensation += compensation
    self.__count += other.count - 1

  @property
  def count(self):
    return self.__count

  @property
  def total(self):
    if self.__sum is None:
      return None
    return self.__sum + self.__compensation


def chunks(count, size):
  '''Fixed [start, stop) ranges covering count items.

  >>> chunks(5, 2)
  [(0, 2), (2, 4), (4, 5)]
  '''
  return [(start, min(start + size, count))
          for start in range(0, count, size)]


def digest(text):
  '''Short content hash used for provenance in output sidecars.

  >>> digest('abc')
  'ba7816bf8f01cfea'
  '''
  return hashlib.sha256(text.encode('utf-8')).hexdigest()[:16]
