# Copyright (C) 2026, the cpisim authors
#
# This software is provided "as is" without warranty of any kind,
# either expressed or implied, including but not limited to the
# implied warranties of fitness for a particular purpose.
#
# See the LICENSE file for more information.

'''Command line front end: run a scenario and write its outputs.'''

import argparse
import os
import sys

from orderedset import OrderedSet

import cpisim
from cpisim.analysis import compare_report
from cpisim.correlation import EvaluationPath
from cpisim.geometry import object_distance_for_alpha
from cpisim.image import Normalization, normalize
from cpisim.log import logger, LogLevel
from cpisim.output import write_image, write_profile, render_report
from cpisim.refocus import FOCUS_TOLERANCE, focus_range, fwhm, \
  refocused_image, unrefocused_image, viewpoint_image
from cpisim.scenario import Mode, load_scenario, override
from cpisim.threadpool import ThreadPool

SCENARIOS = os.path.normpath(
  os.path.join(os.path.dirname(__file__), '..', '..', 'scenarios'))

DEFAULT_SCENARIO = 'letter_e'

ALIASES = {
  'fig3': 'letter_e',
  'fig4': 'slit_sweep',
  'fig5': 'double_slit',
}

def _threads(scenario, threads):
  if threads is not None:
    return threads
  if scenario.run.threads is not None:
    return scenario.run.threads
  return int(os.environ.get('CPISIM_THREADS', '1'))


class Run:

  '''Outputs of one scenario run, in the order they were written.'''

  def __init__(self, scenario, out, pool):
    self.__scenario = scenario
    self.__out = out
    self.__pool = pool
    self.__artifacts = OrderedSet()
    os.makedirs(out, exist_ok = True)

  artifacts = property(lambda self: list(self.__artifacts))

  def path(self, name):
    prefix = self.__scenario.run.out_prefix
    return os.path.join(self.__out, '%s_%s' % (prefix, name))

  def record(self, *paths):
    for path in paths:
      self.__artifacts.add(path)

  def emit(self, image, name):
    '''Write an image peak normalized, plus its 1D profiles.'''
    peak = normalize(image, Normalization.peak)
    self.record(*write_image(peak, self.path('%s.pgm' % name),
                             self.__scenario.digest))
    if image.grid.dim == 1:
      self.record(write_profile(peak, self.path('%s.csv' % name)))
      try:
        center = normalize(image, Normalization.center)
      except cpisim.ZeroReference as e:
        cpisim.warn('no center profile for %s: %s' % (name, e))
      else:
        self.record(write_profile(center,
                                  self.path('%s_center.csv' % name)))

  def integrate(self, setup, refocus = False):
    scenario = self.__scenario
    compute = refocused_image if refocus else unrefocused_image
    return compute(scenario.mask, scenario.pump, setup, scenario.grid_a(),
                   scenario.grid_b(setup), scenario.run.path,
                   pool = self.__pool)

  def focused_setup(self):
    setup = self.__scenario.setup
    if setup.at_focus():
      return setup
    return setup.with_object_distance(setup.z_bF)

  def ghost(self):
    self.emit(self.integrate(self.focused_setup()), 'focused')

  def misfocus(self):
    self.emit(self.integrate(self.__scenario.setup), 'misfocused')

  def refocus(self):
    self.ghost()
    self.misfocus()
    self.emit(self.integrate(self.__scenario.setup, refocus = True),
              'refocused')

  def viewpoint(self):
    scenario = self.__scenario
    for rho_b in scenario.run.rho_b:
      where = rho_b if scenario.dim == 1 else (rho_b, 0.0)
      image = viewpoint_image(scenario.mask, scenario.pump, scenario.setup,
                              scenario.grid_a(), where, scenario.run.path)
      self.emit(image, 'viewpoint_b%g' % rho_b)

  def dof(self):
    scenario = self.__scenario
    report = compare_report(scenario.setup, scenario.pump, scenario.sensor,
                            scenario.mask.smallest_feature)
    text = render_report(report, scenario.name)
    path = self.path('dof.txt')
    with open(path, 'w', newline = '\n') as f:
      f.write(text)
    print(text, end = '')
    self.record(path)

  def sweep(self):
    scenario = self.__scenario
    if scenario.dim != 1:
      raise cpisim.ValidationError('sweep dimension',
                                   'misfocus sweeps run on 1D objects')
    rows = []
    for alpha in scenario.run.alpha_list:
      setup = scenario.setup.with_object_distance(
        object_distance_for_alpha(scenario.setup, alpha))
      with logger.log('cpisim.cli', LogLevel.log,
                      'alpha %g: object at %.6g mm', alpha, setup.z_b):
        coherent = viewpoint_image(scenario.mask, scenario.pump, setup,
                                   scenario.grid_a(), 0.0, scenario.run.path)
        incoherent = self.integrate(setup)
        widths = []
        for kind, image in (('coherent', coherent),
                            ('incoherent', incoherent)):
          widths.append(fwhm(image))
          self.record(write_profile(
            normalize(image, Normalization.center),
            self.path('a%g_%s.csv' % (alpha, kind))))
          self.record(write_profile(
            normalize(image, Normalization.peak),
            self.path('a%g_%s_peak.csv' % (alpha, kind))))
        rows.append((alpha, setup.z_b) + tuple(widths))
    path = self.path('fwhm.csv')
    with open(path, 'w', newline = '\n') as f:
      print('alpha,zb_mm,coherent_fwhm_mm,incoherent_fwhm_mm', file = f)
      for row in rows:
        print('%.9g,%.9g,%.9g,%.9g' % row, file = f)
    self.record(path)
    self.focus_ranges(rows)

  def focus_ranges(self, rows):
    alphas = [row[0] for row in rows]
    if 1 not in alphas:
      cpisim.warn('alpha = 1 not swept, no focus ranges')
      return
    path = self.path('focus_range.csv')
    with open(path, 'w', newline = '\n') as f:
      print('kind,alpha_low,alpha_high,focused_fwhm_mm', file = f)
      for column, kind in ((2, 'coherent'), (3, 'incoherent')):
        widths = [row[column] for row in rows]
        low, high = focus_range(alphas, widths)
        logger.log('cpisim.cli', LogLevel.log,
                   '%s FWHM within %g%% of focus for alpha in [%g, %g]',
                   kind, 100 * FOCUS_TOLERANCE, low, high)
        print('%s,%.9g,%.9g,%.9g' % (kind, low, high,
                                     widths[alphas.index(1)]), file = f)
    self.record(path)


def run(scenario, out = '.', threads = None):
  '''Run scenario, writing into out; returns the written paths.'''
  workers = _threads(scenario, threads)
  with logger.log('cpisim.cli', LogLevel.log, 'run %r with %s workers',
                  scenario, workers):
    with ThreadPool(workers) as pool:
      runner = Run(scenario, out, pool)
      getattr(runner, str(scenario.run.mode))()
  return runner.artifacts


def resolve(target):
  '''Load a scenario from a path, a bundled scenario name or alias, or
  a mode name applied to the default scenario.'''
  if os.path.exists(target):
    return load_scenario(target)
  name = target[:-4] if target.endswith('.scn') else target
  name = ALIASES.get(name, name)
  bundled = os.path.join(SCENARIOS, '%s.scn' % name)
  if os.path.exists(bundled):
    return load_scenario(bundled)
  if target in Mode:
    scenario = load_scenario(os.path.join(SCENARIOS,
                                          '%s.scn' % DEFAULT_SCENARIO))
    return override(scenario, run_mode = target)
  raise cpisim.ParseError('no such scenario or mode: %s' % target)


def main(argv = None):
  parser = argparse.ArgumentParser(
    prog = 'cpisim',
    description = 'Correlation plenoptic imaging simulator.')
  parser.add_argument('target', metavar = 'mode-or-scenario',
                      help = 'scenario file, bundled scenario (%s) or '
                      'mode (%s)' % (
                        ', '.join(sorted(
                          [f[:-4] for f in os.listdir(SCENARIOS)
                           if f.endswith('.scn')] + list(ALIASES)))
                        if os.path.isdir(SCENARIOS) else 'none',
                        ', '.join(Mode.names())))
  parser.add_argument('--out', default = '.',
                      help = 'output directory')
  parser.add_argument('--threads', type = int,
                      help = 'worker threads (CPISIM_THREADS, 1)')
  parser.add_argument('--path', choices = EvaluationPath.names(),
                      help = 'override the evaluation path')
  args = parser.parse_args(argv)
  try:
    scenario = resolve(args.target)
    if args.path is not None:
      scenario = override(scenario, run_path = args.path)
    for path in run(scenario, args.out, args.threads):
      logger.log('cpisim.cli', LogLevel.trace, 'wrote %s', path)
    return 0
  except (cpisim.ValidationError, cpisim.ParseError) as e:
    status = 2
    error = e
  except Exception as e:
    status = 1
    error = e
  print('cpisim: %s' % error, file = sys.stderr)
  if 'CPISIM_DEBUG_BACKTRACE' in os.environ:
    import traceback
    traceback.print_exception(type(error), error, error.__traceback__)
  return status
