"""Unit conversions between the CLI/file boundary and internal SI values.

Internally every frequency is angular (rad/s) and every time is in seconds.
Files and command-line flags use ordinary frequency in MHz and times in ns/us.
"""

import math

TWO_PI = 2.0 * math.pi
MHZ = 1.0e6
NS = 1.0e-9
US = 1.0e-6


def mhz_to_angular(f_mhz):
    return TWO_PI * MHZ * f_mhz


def angular_to_mhz(w):
    return w / (TWO_PI * MHZ)


def ns_to_s(t_ns):
    return t_ns * NS


def s_to_ns(t):
    return t / NS


def us_to_s(t_us):
    return t_us * US


def s_to_us(t):
    return t / US
