"""
decolab
~~~~~~~
Numerical lab for exact decoherence and pointer orthogonality with momentum-limited probes.

:copyright: (c) 2024-present decolab contributors
:license: AGPL-3.0, see LICENSE for more details.
"""

from . import models, numerics
from ._metadata import *
from .errors import *
from .tooling import *
from .utils import *
