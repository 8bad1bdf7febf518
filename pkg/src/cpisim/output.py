# Copyright (C) 2026, the cpisim authors
#
# This software is provided "as is" without warranty of any kind,
# either expressed or implied, including but not limited to the
# implied warranties of fitness for a particular purpose.
#
# See the LICENSE file for more information.

'''Image, profile and report files.

Images are 16-bit binary graymaps (P5, maximum 65535, big-endian
samples), each with a text sidecar rendered from
templates/sidecar.txt.mako. Profiles are comma separated
`rho_a_mm,intensity` files.
'''

import io
import os

import mako.lookup
import mako.runtime
import numpy

import cpisim
from cpisim.image import Normalization
from cpisim.log import logger, LogLevel

TEMPLATES = os.path.join(os.path.dirname(__file__), 'templates')

_LOOKUP = mako.lookup.TemplateLookup(directories = [TEMPLATES],
                                     strict_undefined = True)

def render(template, stream = None, **content):
  '''Render a bundled template, to stream or as a string.'''
  tpl = _LOOKUP.get_template(template)
  target = stream if stream is not None else io.StringIO()
  tpl.render_context(mako.runtime.Context(target, **content))
  if stream is None:
    return target.getvalue()


def graymap(image):
  '''The P5 bytes of a normalized image, +y up.'''
  if image.normalization is Normalization.none:
    raise cpisim.ValidationError('normalized image',
                                 'normalize %s before writing it' %
                                 image.label)
  values = numpy.clip(image.values, 0, 1)
  samples = numpy.rint(65535 * values).astype('>u2')
  if image.grid.dim == 1:
    samples = samples[None, :]
  else:
    # Rows ascend with y; the file starts with the top row.
    samples = samples[::-1]
  height, width = samples.shape
  header = b'P5\n%d %d\n65535\n' % (width, height)
  return header + numpy.ascontiguousarray(samples).tobytes()


def write_image(image, path, digest = None):
  '''Write image to path and its sidecar to path.txt; returns both
  paths.'''
  path = str(path)
  with open(path, 'wb') as f:
    f.write(graymap(image))
  sidecar = path + '.txt'
  with open(sidecar, 'w', newline = '\n') as f:
    render('sidecar.txt.mako', f, image = image, grid = image.grid,
           name = os.path.basename(path), digest = digest)
  logger.log('cpisim.output', LogLevel.trace, 'wrote %s', path)
  return [path, sidecar]


def write_profile(image, path):
  '''Write a 1D image as `rho_a_mm,intensity` rows.'''
  if image.grid.dim != 1:
    raise cpisim.ValidationError('profile dimension',
                                 'profiles are written for 1D images only')
  path = str(path)
  with open(path, 'w', newline = '\n') as f:
    print('rho_a_mm,intensity', file = f)
    for x, value in zip(image.grid.axis(0), image.values):
      print('%.9g,%.9g' % (x, value), file = f)
  logger.log('cpisim.output', LogLevel.trace, 'wrote %s', path)
  return path


def read_profile(path):
  '''The (rho_a, intensity) columns of a profile file.'''
  data = numpy.loadtxt(str(path), delimiter = ',', skiprows = 1, ndmin = 2)
  return data[:, 0], data[:, 1]


def render_report(report, title = None):
  return render('report.txt.mako', report = report, title = title)
