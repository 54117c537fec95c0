"""Published LPPL fits of the Dow Jones Industrial Average (raw price).

Both are quoted as ``A + B tau^alpha + amplitude tau^alpha cos(omega ln tau + phi)``.
"""

from .model import from_expanded

# DJIA, spring 2009 - spring 2016
DJIA_2009_2016 = from_expanded(
    A=10890.6, B=-854.392, amplitude=85.600, alpha=0.950, omega=14.928, phi=0.641, tc=2017.80
)

# DJIA, spring 1933 - spring 2016; divergent exponent
DJIA_1933_2016 = from_expanded(
    A=31.214, B=1.22e7, amplitude=4.74e6, alpha=-2.047, omega=24.202, phi=2.341, tc=2045.853
)
