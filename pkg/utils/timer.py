# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)

# stdlib
import time


class Timer(object):
    """ Wall-clock helper for progress logs; never feeds report output. """

    def __init__(self):
        self.start()

    def _now(self):
        return time.time()

    def start(self):
        self.started = self._now()
        return self

    def total(self):
        return self._now() - self.started

    def rate(self, count):
        """ Items per second since start, 0 when no time has elapsed. """
        elapsed = self.total()
        if elapsed <= 0:
            return 0.0
        return count / elapsed
