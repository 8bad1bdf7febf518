import os
import shutil
import sys
import tempfile

import numpy

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)),
                                '..', 'src'))

import cpisim
from cpisim.geometry import OpticalSetup
from cpisim.scene import SampledGrid, PumpProfile

class TemporaryDirectory:

  '''Enter a fresh directory, removed on exit.'''

  def __init__(self):
    self.__dir = None
    self.__previous = None

  def __enter__(self):
    self.__dir = tempfile.mkdtemp()
    self.__previous = os.getcwd()
    os.chdir(self.__dir)
    return self.__dir

  def __exit__(self, *args):
    os.chdir(self.__previous)
    shutil.rmtree(self.__dir)


def assertEq(a, b):
  if a != b:
    raise Exception('%r != %r' % (a, b))


def assertClose(a, b, rtol = 1e-9, atol = 0.0):
  a = numpy.asarray(a)
  b = numpy.asarray(b)
  if not numpy.allclose(a, b, rtol = rtol, atol = atol):
    worst = numpy.max(numpy.abs(a - b))
    raise Exception('%r !~ %r (worst difference %g)' % (a, b, worst))


def assertRaises(exception, f, *args, **kwargs):
  try:
    f(*args, **kwargs)
  except exception as e:
    return e
  raise Exception('%s not raised' % exception.__name__)


def run_tests(scope):
  '''Run the test_ functions of a module executed as a script.'''
  for name, f in sorted(scope.items()):
    if name.startswith('test_') and callable(f):
      print(name)
      f()


## Setups

def bench_setup(z_b = 3.0, wavelength = 1e-3, sigma = 0.6):
  '''The letter E bench: z_a = 10, z_a' = 30, f = 12 (so z_bF = 10 and
  m = 1.5), z_b' = 2 and M = 0.8.'''
  return OpticalSetup(10, 30, 12, z_b, 2, 0.8 * (z_b + 2),
                      wavelength = wavelength, sigma = sigma)


def small_setup(z_b = 3.0):
  '''The bench with a long wavelength and a thin pump: quadratures on
  grids of a few dozen samples.'''
  return bench_setup(z_b, wavelength = 0.05, sigma = 0.05)


def small_pump(center = 0.0):
  return PumpProfile(0.05, center = center)


def grid(count, pitch, dim = 1, center = None):
  return SampledGrid(dim, pitch, count, center)
