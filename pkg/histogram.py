# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)

# stdlib
from collections import OrderedDict
import logging
import math

# 3p
import numpy as np

log = logging.getLogger(__name__)

# tolerance added before flooring so that 3 * 0.0001 lands in bin 3, not 2
BIN_EPSILON = 1e-9
BIN_DIGITS = 12


class Histogram(object):
    """
    Fixed-width histogram keyed by bin lower edge.

    Samples accumulate until `counts()`; `normalized()` and `max_normalized()`
    give the two flavours the reports need (unit mass, unit peak).
    """

    def __init__(self, bin_width, origin=0.0):
        if bin_width <= 0:
            raise ValueError("bin_width must be positive")
        self.bin_width = float(bin_width)
        self.origin = float(origin)
        self.count = 0
        self._bins = {}

    def bin_index(self, value):
        return int(math.floor((value - self.origin) / self.bin_width + BIN_EPSILON))

    def bin_lower(self, index):
        return round(self.origin + index * self.bin_width, BIN_DIGITS)

    def sample(self, value):
        idx = self.bin_index(value)
        self._bins[idx] = self._bins.get(idx, 0) + 1
        self.count += 1

    def counts(self):
        return OrderedDict(
            (self.bin_lower(idx), self._bins[idx]) for idx in sorted(self._bins)
        )

    def normalized(self):
        if not self.count:
            return OrderedDict()
        return OrderedDict(
            (lower, c / float(self.count)) for lower, c in self.counts().items()
        )

    def max_normalized(self):
        if not self.count:
            return OrderedDict()
        peak = float(max(self._bins.values()))
        return OrderedDict(
            (lower, c / peak) for lower, c in self.counts().items()
        )


class UnitHistogram(object):
    """ `bins` equal-width bins over [0, 1]; 1.0 falls in the last bin. """

    def __init__(self, bins):
        if bins < 1:
            raise ValueError("bins must be at least 1")
        self.bins = int(bins)
        self.count = 0
        self._counts = [0] * self.bins

    def sample(self, value):
        if not 0.0 <= value <= 1.0:
            raise ValueError("value %r outside [0, 1]" % value)
        idx = min(int(value * self.bins), self.bins - 1)
        self._counts[idx] += 1
        self.count += 1

    def sample_many(self, values):
        values = np.asarray(values, dtype=float)
        if not values.size:
            return
        if not np.all((values >= 0.0) & (values <= 1.0)):
            raise ValueError("values outside [0, 1]")
        idx = np.minimum((values * self.bins).astype(int), self.bins - 1)
        added = np.bincount(idx, minlength=self.bins)
        self._counts = [c + int(a) for c, a in zip(self._counts, added)]
        self.count += int(values.size)

    def masses(self):
        total = float(self.count) if self.count else 1.0
        return [
            (round(idx / float(self.bins), BIN_DIGITS), c / total)
            for idx, c in enumerate(self._counts)
        ]
