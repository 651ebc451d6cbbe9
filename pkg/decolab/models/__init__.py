"""
decolab.models
~~~~~~~~~~~~~~
Value types, configuration and reports of decolab.

:copyright: (c) 2024-present decolab contributors
:license: AGPL-3.0, see LICENSE for more details.
"""

from .config import *
from .encoder import *
from .reports import *
from .spectrum import *
