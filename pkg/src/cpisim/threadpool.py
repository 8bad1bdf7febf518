# Copyright (C) 2026, the cpisim authors
#
# This software is provided "as is" without warranty of any kind,
# either expressed or implied, including but not limited to the
# implied warranties of fitness for a particular purpose.
#
# See the LICENSE file for more information.

import threading

class ThreadPool:

  '''A bounded set of worker threads running submitted callables.

  map keeps the submission order of its results, whatever the number of
  workers, so callers get identical outputs with one or many threads.
  '''

  class Runner(threading.Thread):

    def __init__(self, pool):
      super().__init__(daemon = True)
      self.__cond = threading.Condition()
      self.__f = None
      self.__pool = pool
      self.__stop = False
      self.start()

    def run(self):
      while True:
        with self.__cond:
          while self.__f is None and not self.__stop:
            self.__cond.wait()
          if self.__stop and self.__f is None:
            return
          f = self.__f
        f()
        with self.__cond:
          self.__f = None
        self.__pool._ThreadPool__release(self)

    def wake(self, f):
      with self.__cond:
        self.__f = f
        self.__cond.notify()

    def stop(self):
      with self.__cond:
        self.__stop = True
        self.__cond.notify()
      self.join()

  def __init__(self, workers = 1):
    self.__workers = max(1, int(workers))
    self.__threads = []
    self.__idle = []
    self.__cond = threading.Condition()

  @property
  def workers(self):
    return self.__workers

  def __release(self, runner):
    with self.__cond:
      self.__idle.append(runner)
      self.__cond.notify_all()

  def run(self, f):
    '''Run f on an idle worker, waiting for one if all are busy.'''
    with self.__cond:
      while not self.__idle and len(self.__threads) >= self.__workers:
        self.__cond.wait()
      if self.__idle:
        runner = self.__idle.pop()
      else:
        runner = ThreadPool.Runner(self)
        self.__threads.append(runner)
    runner.wake(f)

  def map(self, f, items):
    items = list(items)
    if self.__workers == 1:
      return [f(item) for item in items]
    results = [None] * len(items)
    errors = [None] * len(items)
    done = threading.Semaphore(0)
    def job(index, item):
      def execute():
        try:
          results[index] = f(item)
        except BaseException as e:
          errors[index] = e
        finally:
          done.release()
      return execute
    for index, item in enumerate(items):
      self.run(job(index, item))
    for _ in items:
      done.acquire()
    for error in errors:
      if error is not None:
        raise error
    return results

  def stop(self):
    # Collect the threads first: Runner.stop joins, and a finishing
    # job needs self.__cond to register as idle.
    with self.__cond:
      threads = list(self.__threads)
      self.__threads = []
      self.__idle = []
    for thread in threads:
      thread.stop()

  def __enter__(self):
    return self

  def __exit__(self, *args):
    self.stop()
