# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)

# stdlib
from functools import wraps


def log_exceptions(logger):
    """
    A decorator that catches any exceptions thrown by the decorated function and
    logs them along with a traceback.
    """
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                result = func(*args, **kwargs)
            except Exception:
                logger.exception(
                    u"Uncaught exception while running {0}".format(func.__name__)
                )
                raise
            return result
        return wrapper
    return decorator


class ProgressLogger(object):
    """
    Logs "<label>: n/total" at INFO every `every` items and once at the end.
    """

    def __init__(self, logger, label, total, every=100000):
        self.logger = logger
        self.label = label
        self.total = total
        self.every = max(1, int(every))
        self.done = 0

    def update(self, count=1):
        self.done += count
        if self.done % self.every == 0 or self.done == self.total:
            self.logger.info("%s: %d/%d", self.label, self.done, self.total)
