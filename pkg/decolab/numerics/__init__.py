"""
decolab.numerics
~~~~~~~~~~~~~~~~
Quadrature, band-limited functions and the measurement models.

:copyright: (c) 2024-present decolab contributors
:license: AGPL-3.0, see LICENSE for more details.
"""

from .bandlimited import *
from .paley_wiener import *
from .quadrature import *
from .quantum_core import *
from .special import *
from .tripartite import *
from .vonneumann import *
