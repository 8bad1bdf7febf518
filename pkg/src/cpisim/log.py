# Copyright (C) 2026, the cpisim authors
#
# This software is provided "as is" without warranty of any kind,
# either expressed or implied, including but not limited to the
# implied warranties of fitness for a particular purpose.
#
# See the LICENSE file for more information.

'''Component logger.

The configuration string is a comma separated list of `level` or
`component:level` entries, e.g. `cpisim.correlation:debug,trace`. A
component configured as `cpisim` also covers `cpisim.correlation`; the
most specific entry wins. Without configuration, logging is a no-op.
'''

import os
import sys
import threading

import cpisim.enumeration

class LogLevel(cpisim.enumeration.Enumerated,
               values = ['log', 'trace', 'debug', 'dump'],
               orderable = True):
  pass


class Noop:

  def __enter__(self):
    pass

  def __exit__(self, type, value, traceback):
    pass


NOOP = Noop()


class NoopLogger:

  def log(self, component, level, message, *args):
    return NOOP

  def enabled(self, component, level):
    return False


class LoggerType(type):

  def __call__(self, configuration_string = None, stream = None):
    if not configuration_string:
      return NoopLogger()
    return type.__call__(self,
                         configuration_string = configuration_string,
                         stream = stream)


class Logger(metaclass = LoggerType):

  class Indentation(threading.local):

    '''Per thread nesting depth, so pool workers do not interleave.'''

    def __init__(self):
      self.depth = 0

    def __enter__(self):
      self.depth += 1

    def __exit__(self, type, value, traceback):
      self.depth -= 1

  def __init__(self, configuration_string = None, stream = None):
    self.__indentation = Logger.Indentation()
    self.__lock = threading.Lock()
    self.__stream = stream
    self.__default = LogLevel.log
    self.__components = {}
    for entry in configuration_string.split(','):
      entry = entry.strip()
      if not entry:
        continue
      colons = entry.count(':')
      if colons == 0:
        self.__default = Logger.parse_level(entry)
      elif colons == 1:
        component, level = entry.split(':')
        self.__components[component.strip()] = Logger.parse_level(level)
      else:
        raise Exception('invalid log configuration: %s' % entry)

  @staticmethod
  def parse_level(string):
    string = string.strip().lower()
    if string not in LogLevel:
      raise Exception('invalid log level: %s' % string)
    return LogLevel[string]

  def level(self, component):
    '''The most verbose level enabled for component.'''
    while component:
      if component in self.__components:
        return self.__components[component]
      component = component.rpartition('.')[0]
    return self.__default

  def enabled(self, component, level):
    return level <= self.level(component)

  def log(self, component, level, message, *args):
    if not self.enabled(component, level):
      return NOOP
    stream = self.__stream or sys.stderr
    with self.__lock:
      print('%s[%s] %s' % ('  ' * self.__indentation.depth,
                           component,
                           message % args),
            file = stream)
    return self.__indentation


logger = Logger(configuration_string = os.environ.get('CPISIM_LOG_LEVEL'))
