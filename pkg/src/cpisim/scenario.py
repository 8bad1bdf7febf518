# Copyright (C) 2026, the cpisim authors
#
# This software is provided "as is" without warranty of any kind,
# either expressed or implied, including but not limited to the
# implied warranties of fitness for a particular purpose.
#
# See the LICENSE file for more information.

'''Scenario documents.

A scenario is an INI document with four sections:

[setup]   za_mm zaimg_mm f_mm zb_mm zbo_mm zbs_mm lambda_um sigma_mm,
          optional Fb_mm (solved when absent) and pump (gaussian).
[object]  type = slit | double_slit | letter_e | file, width_mm
          (stroke_mm for letter_e), separation_mm, path, optional
          center_mm and pitch_um.
[sensor]  pixel_um na nb.
[run]     mode = ghost | misfocus | refocus | viewpoint | dof | sweep,
          optional path, dim, rho_b_mm, alpha_list, grid_a, grid_b,
          span_a_mm, threads and out_prefix.

Unknown sections and keys are errors.
'''

import configparser
import math
import os

import cpisim
import cpisim.enumeration
from cpisim.analysis import SensorSpec
from cpisim.correlation import EvaluationPath
from cpisim.geometry import OpticalSetup
from cpisim.log import logger, LogLevel
from cpisim.scene import SampledGrid, PumpProfile, PumpKind, make_slit, \
  make_double_slit, make_letter_E, load_mask
from cpisim.utils import digest

class Mode(cpisim.enumeration.Enumerated,
           values = ['ghost', 'misfocus', 'refocus', 'viewpoint', 'dof',
                     'sweep']):
  pass


class ObjectKind(cpisim.enumeration.Enumerated,
                 values = ['slit', 'double_slit', 'letter_e', 'file']):
  pass


REDUCED_GRID = 96
'''Samples per axis of 2D sensor grids.'''

ENVELOPE_WIDTH = 3
'''Default S_b half width, in units of Mσ.'''

KEYS = {
  'setup': ('za_mm', 'zaimg_mm', 'f_mm', 'zb_mm', 'zbo_mm', 'zbs_mm',
            'Fb_mm', 'lambda_um', 'sigma_mm', 'pump'),
  'object': ('type', 'width_mm', 'stroke_mm', 'separation_mm', 'path',
             'center_mm', 'pitch_um'),
  'sensor': ('pixel_um', 'na', 'nb'),
  'run': ('mode', 'path', 'dim', 'rho_b_mm', 'alpha_list', 'grid_a',
          'grid_b', 'span_a_mm', 'threads', 'out_prefix'),
}

REQUIRED = {
  'setup': ('za_mm', 'zaimg_mm', 'f_mm', 'zb_mm', 'zbo_mm', 'zbs_mm',
            'lambda_um', 'sigma_mm'),
  'object': ('type',),
  'sensor': ('pixel_um', 'na', 'nb'),
  'run': ('mode',),
}

class _Document:

  '''Typed access to the parsed sections, reporting the line of any
  offending key.'''

  def __init__(self, parser, text):
    self.__parser = parser
    self.__lines = text.splitlines()

  def line(self, section, key = None):
    current = None
    for number, line in enumerate(self.__lines, 1):
      stripped = line.strip()
      if stripped.startswith('[') and stripped.endswith(']'):
        current = stripped[1:-1].strip()
        if key is None and current == section:
          return number
      elif current == section and key is not None:
        name = stripped.split('=', 1)[0].split(':', 1)[0].strip()
        if name.lower() == key.lower():
          return number
    return None

  def error(self, message, section, key = None):
    return cpisim.ParseError(message, line = self.line(section, key),
                             key = key and '%s.%s' % (section, key))

  def has(self, section, key):
    return self.__parser.has_option(section, key)

  def raw(self, section, key, default = None):
    if not self.__parser.has_option(section, key):
      return default
    return self.__parser.get(section, key).strip()

  def number(self, section, key, default = None, kind = float):
    value = self.raw(section, key)
    if value is None:
      return default
    try:
      result = kind(value)
    except ValueError:
      raise self.error('invalid %s value %r' % (kind.__name__, value),
                       section, key)
    if kind is float and not math.isfinite(result):
      raise self.error('non finite value %r' % value, section, key)
    return result

  def numbers(self, section, key, default = None):
    value = self.raw(section, key)
    if value is None:
      return default
    try:
      return [float(v) for v in value.split(',') if v.strip()]
    except ValueError:
      raise self.error('invalid number list %r' % value, section, key)

  def enum(self, section, key, enumeration, default = None):
    value = self.raw(section, key)
    if value is None:
      return default
    if value not in enumeration:
      raise self.error('%r is not one of %s' % (
        value, ', '.join(enumeration.names())), section, key)
    return enumeration[value]


def _parser():
  parser = configparser.ConfigParser(
    strict = True, interpolation = None,
    inline_comment_prefixes = ('#', ';'))
  # Keys are case sensitive: Fb_mm.
  parser.optionxform = str
  return parser


def _read(text):
  parser = _parser()
  try:
    parser.read_string(text)
  except configparser.ParsingError as e:
    line = getattr(e, 'lineno', None)
    if line is None and e.errors:
      line = e.errors[0][0]
    raise cpisim.ParseError('malformed line', line = line)
  except configparser.Error as e:
    raise cpisim.ParseError(getattr(e, 'message', str(e)).split('\n')[0],
                            line = getattr(e, 'lineno', None))
  document = _Document(parser, text)
  for section in parser.sections():
    if section not in KEYS:
      raise cpisim.ParseError('unknown section [%s]' % section,
                              line = document.line(section))
    for key in parser.options(section):
      if key not in KEYS[section]:
        raise document.error('unknown key', section, key)
  for section, keys in REQUIRED.items():
    if not parser.has_section(section):
      raise cpisim.ParseError('missing section [%s]' % section)
    for key in keys:
      if not parser.has_option(section, key):
        raise cpisim.ParseError('missing key', line = document.line(section),
                                key = '%s.%s' % (section, key))
  return parser, document


class ObjectSpec:

  '''What to put on the object plane, and how finely to sample it.'''

  def __init__(self, kind, width = None, separation = None, path = None,
               center = 0.0, pitch = None):
    self.__kind = kind
    self.__width = width
    self.__separation = separation
    self.__path = path
    self.__center = center
    self.__pitch = pitch

  kind = property(lambda self: self.__kind)
  width = property(lambda self: self.__width)
  separation = property(lambda self: self.__separation)
  path = property(lambda self: self.__path)
  center = property(lambda self: self.__center)
  pitch = property(lambda self: self.__pitch)

  @property
  def dim(self):
    if self.__kind is ObjectKind.letter_e:
      return 2
    if self.__kind is ObjectKind.file:
      return None
    return 1

  def default_pitch(self, feature, pixel):
    '''The largest d/(2n), n ≥ 2, not above the sensor pixel: every
    built-in edge falls on a cell boundary.'''
    n = max(2, int(math.ceil(feature / (2 * pixel))))
    return feature / (2 * n)

  def build(self, sensor):
    kind = self.__kind
    if kind is ObjectKind.file:
      return load_mask(self.__path)
    width = self.__width
    pitch = self.__pitch or self.default_pitch(width, sensor.pixel)
    if kind is ObjectKind.slit:
      half = width / 2
    elif kind is ObjectKind.double_slit:
      half = self.__separation / 2 + width / 2
    else:
      half = 2.5 * width
    # An even count puts a cell boundary on the center.
    count = 2 * int(math.ceil(half / pitch - 1e-9)) + 2
    if kind is ObjectKind.letter_e:
      grid = SampledGrid(2, pitch, count, (self.__center, 0.0))
      return make_letter_E(width, grid, (self.__center, 0.0))
    grid = SampledGrid(1, pitch, count, self.__center)
    if kind is ObjectKind.slit:
      return make_slit(width, grid, self.__center)
    return make_double_slit(width, self.__separation, grid, self.__center)


class RunSpec:

  '''Mode, evaluation path, sensor sampling and output options.'''

  def __init__(self, mode, path = EvaluationPath.fast, dim = 1,
               rho_b = (0.0,), alpha_list = (), grid_a = None,
               grid_b = None, span_a = None, threads = None,
               out_prefix = 'cpisim'):
    self.__mode = mode
    self.__path = path
    self.__dim = dim
    self.__rho_b = tuple(rho_b)
    self.__alpha_list = tuple(alpha_list)
    self.__grid_a = grid_a
    self.__grid_b = grid_b
    self.__span_a = span_a
    self.__threads = threads
    self.__out_prefix = out_prefix

  mode = property(lambda self: self.__mode)
  path = property(lambda self: self.__path)
  dim = property(lambda self: self.__dim)
  rho_b = property(lambda self: self.__rho_b)
  alpha_list = property(lambda self: self.__alpha_list)
  grid_a = property(lambda self: self.__grid_a)
  grid_b = property(lambda self: self.__grid_b)
  span_a = property(lambda self: self.__span_a)
  threads = property(lambda self: self.__threads)
  out_prefix = property(lambda self: self.__out_prefix)


class Scenario:

  '''A validated scenario; text is its canonical serialization.'''

  def __init__(self, setup, pump, object, sensor, run, text, name,
               mask = None, directory = None):
    self.__setup = setup
    self.__pump = pump
    self.__object = object
    self.__sensor = sensor
    self.__run = run
    self.__text = text
    self.__name = name
    self.__mask = mask
    self.__directory = directory

  setup = property(lambda self: self.__setup)
  pump = property(lambda self: self.__pump)
  object = property(lambda self: self.__object)
  sensor = property(lambda self: self.__sensor)
  run = property(lambda self: self.__run)
  text = property(lambda self: self.__text)
  name = property(lambda self: self.__name)
  directory = property(lambda self: self.__directory)

  @property
  def digest(self):
    return digest(self.__text)

  @property
  def mask(self):
    if self.__mask is None:
      self.__mask = self.__object.build(self.__sensor)
    return self.__mask

  @property
  def dim(self):
    return self.__run.dim

  def grid_a(self):
    '''The simulated S_a grid.'''
    sensor = self.__sensor
    span = self.__run.span_a or sensor.count_a * sensor.pixel
    count = self.__run.grid_a
    if count is None:
      count = sensor.count_a if self.dim == 1 else REDUCED_GRID
    return SampledGrid(self.dim, span / count, count)

  def grid_b(self, setup = None):
    '''The simulated S_b grid, ±3Mσ by default.'''
    setup = setup or self.__setup
    sensor = self.__sensor
    half = ENVELOPE_WIDTH * setup.M * self.__pump.sigma
    count = self.__run.grid_b
    if count is None and self.dim == 1:
      count = int(math.ceil(2 * half / sensor.pixel - 1e-9)) + 1
      return SampledGrid(1, sensor.pixel, count)
    if count is None:
      count = REDUCED_GRID
    return SampledGrid(self.dim, 2 * half / (count - 1), count)

  def __eq__(self, other):
    return isinstance(other, Scenario) and self.__text == other.text

  def __hash__(self):
    return hash(self.__text)

  def __repr__(self):
    return 'Scenario(%s, %s, %s)' % (self.__name, self.__run.mode,
                                     self.digest)


def _canonical(parser):
  lines = []
  for section in KEYS:
    if not parser.has_section(section):
      continue
    lines.append('[%s]' % section)
    for key in KEYS[section]:
      if parser.has_option(section, key):
        lines.append('%s = %s' % (key, parser.get(section, key).strip()))
    lines.append('')
  return '\n'.join(lines)


def parse_scenario(text, name = 'scenario', directory = None):
  '''Parse and validate a scenario document.

  Relative mask paths are resolved against directory.
  '''
  parser, document = _read(text)
  number = document.number
  pump_kind = document.enum('setup', 'pump', PumpKind, PumpKind.gaussian)
  setup = OpticalSetup(
    z_a = number('setup', 'za_mm'),
    z_a_img = number('setup', 'zaimg_mm'),
    f = number('setup', 'f_mm'),
    z_b = number('setup', 'zb_mm'),
    z_b_obj_lens = number('setup', 'zbo_mm'),
    z_b_lens_sens = number('setup', 'zbs_mm'),
    F_b = number('setup', 'Fb_mm'),
    wavelength = number('setup', 'lambda_um') * 1e-3,
    sigma = number('setup', 'sigma_mm'))
  # Solving the focus validates the lens equation.
  setup.derived
  pump = PumpProfile(setup.sigma, pump_kind)
  sensor = SensorSpec(number('sensor', 'pixel_um') * 1e-3,
                      number('sensor', 'na', kind = int),
                      number('sensor', 'nb', kind = int))
  kind = document.enum('object', 'type', ObjectKind)
  width = number('object', 'width_mm')
  if width is None:
    width = number('object', 'stroke_mm')
  separation = number('object', 'separation_mm')
  path = document.raw('object', 'path')
  if kind is ObjectKind.file:
    if path is None:
      raise document.error('file objects need a path', 'object', 'path')
    if directory is not None and not os.path.isabs(path):
      path = os.path.join(directory, path)
  else:
    if width is None:
      raise document.error('missing object width', 'object', 'width_mm')
    if kind is ObjectKind.double_slit and separation is None:
      raise document.error('missing slit separation', 'object',
                           'separation_mm')
  pitch = number('object', 'pitch_um')
  object = ObjectSpec(kind, width, separation, path,
                      number('object', 'center_mm', 0.0),
                      pitch and pitch * 1e-3)
  mode = document.enum('run', 'mode', Mode)
  dim = number('run', 'dim', kind = int)
  implied = object.dim
  if dim is not None and dim not in (1, 2):
    raise document.error('dim must be 1 or 2', 'run', 'dim')
  if dim is not None and implied is not None and dim != implied:
    raise document.error('a %s object is %sD' % (kind, implied), 'run', 'dim')
  for key in ('grid_a', 'grid_b', 'threads'):
    value = number('run', key, kind = int)
    if value is not None and value < (1 if key == 'threads' else 2):
      raise document.error('%s is too small' % key, 'run', key)
  alpha_list = document.numbers('run', 'alpha_list', [])
  if mode is Mode.sweep and not alpha_list:
    raise document.error('sweeps need an alpha_list', 'run', 'alpha_list')
  span_a = number('run', 'span_a_mm')
  if span_a is not None and span_a <= 0:
    raise document.error('span must be positive', 'run', 'span_a_mm')
  mask = object.build(sensor)
  if dim is None:
    dim = mask.grid.dim
  elif mask.grid.dim != dim:
    raise document.error('the mask file is %sD' % mask.grid.dim, 'run', 'dim')
  run = RunSpec(
    mode = mode,
    path = document.enum('run', 'path', EvaluationPath, EvaluationPath.fast),
    dim = dim,
    rho_b = document.numbers('run', 'rho_b_mm', [0.0]),
    alpha_list = alpha_list,
    grid_a = number('run', 'grid_a', kind = int),
    grid_b = number('run', 'grid_b', kind = int),
    span_a = span_a,
    threads = number('run', 'threads', kind = int),
    out_prefix = document.raw('run', 'out_prefix', name))
  if run.path is EvaluationPath.fast and pump.kind is not PumpKind.gaussian:
    raise cpisim.NonGaussianPump(pump.kind)
  scenario = Scenario(setup, pump, object, sensor, run, _canonical(parser),
                      name, mask, directory)
  logger.log('cpisim.scenario', LogLevel.debug, 'parsed %r', scenario)
  return scenario


def load_scenario(path):
  '''Parse the scenario file at path, named after its stem.'''
  path = str(path)
  with open(path, 'r') as f:
    text = f.read()
  name = os.path.splitext(os.path.basename(path))[0]
  return parse_scenario(text, name, os.path.dirname(os.path.abspath(path)))


def override(scenario, **options):
  '''Re-parse scenario with some options replaced, given as
  section_key = value, e.g. run_mode = 'dof'.'''
  parser = _parser()
  parser.read_string(scenario.text)
  for option, value in options.items():
    section, key = option.split('_', 1)
    if section not in KEYS or key not in KEYS[section]:
      raise cpisim.ParseError('unknown key', key = '%s.%s' % (section, key))
    parser.set(section, key, str(value))
  return parse_scenario(_canonical(parser), scenario.name,
                        scenario.directory)
