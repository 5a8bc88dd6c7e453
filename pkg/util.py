# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)


def plural(count):
    if count == 1:
        return ""
    return "s"


def sign(x):
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def format_value(value):
    """ Stable text form for report cells: None -> '', floats via repr. """
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)
