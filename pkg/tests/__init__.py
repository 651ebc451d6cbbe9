"""
tests
~~~~~
Test suite for decolab.

:copyright: (c) 2024-present decolab contributors
:license: AGPL-3.0, see LICENSE for more details.
"""
