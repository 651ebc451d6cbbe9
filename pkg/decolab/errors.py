"""
This file is part of decolab.
Copyright 2024-present decolab contributors.

decolab is free software: you can redistribute it and/or modify it under the terms of the
Affero GNU General Public License as published by the Free Software Foundation, either
version 3 of the License, or (at your option) any later version.

decolab is distributed in the hope that it will be useful, but WITHOUT ANY WARRANTY;
without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the Affero GNU General Public License for more details.

You should have received a copy of the Affero GNU General Public License along with decolab.
If not, see <https://www.gnu.org/licenses/>.
"""

from __future__ import annotations

from typing import Any

__all__ = (
    "DecolabError",
    "InvalidParameterError",
    "NotIntegrableError",
    "DegeneracyError",
    "InvalidPairError",
    "RangeError",
    "ResolutionError",
    "HypothesisViolationError",
    "GridMismatchError",
    "IndexOutOfRangeError",
    "CoverageError",
    "PreconditionError",
    "ConfigError",
    "UnknownSubcommandError",
    "NumericalContractError",
)


class DecolabError(Exception):
    """Base error for everything raised by decolab"""


class InvalidParameterError(DecolabError, ValueError):
    def __init__(self, name: str, value: Any, reason: str) -> None:
        self.name = name
        self.value = value
        self.reason = reason
        super().__init__(f"Invalid parameter `{name}`={value!r}: {reason}")


class NotIntegrableError(InvalidParameterError):
    """The requested function is not absolutely integrable on the real line."""


class DegeneracyError(InvalidParameterError):
    def __init__(self, eigenvalues: list[float]) -> None:
        super().__init__("eigenvalues", eigenvalues, "observable is degenerate (repeated eigenvalues)")


class InvalidPairError(InvalidParameterError):
    def __init__(self, k: int, l: int) -> None:  # noqa: E741
        self.k = k
        self.l = l
        super().__init__("pair", (k, l), "the orthogonality kernel needs two distinct branches")


class RangeError(DecolabError, OverflowError):
    def __init__(self, quantity: str, value: float, limit: float) -> None:
        self.quantity = quantity
        self.value = value
        self.limit = limit
        super().__init__(f"{quantity} = {value:.6g} exceeds the overflow guard {limit:.6g}")


class ResolutionError(DecolabError):
    def __init__(self, required: int, cap: int, context: str) -> None:
        self.required = required
        self.cap = cap
        self.context = context
        super().__init__(f"{context}: needs {required} quadrature nodes, cap is {cap}")


class HypothesisViolationError(DecolabError):
    def __init__(self, hypothesis: str, detail: str) -> None:
        self.hypothesis = hypothesis
        self.detail = detail
        super().__init__(f"Hypothesis `{hypothesis}` violated: {detail}")


class GridMismatchError(DecolabError):
    def __init__(self, left: int, right: int) -> None:
        self.left = left
        self.right = right
        super().__init__(f"Kernels live on different pointer grids ({left} vs {right} points)")


class IndexOutOfRangeError(DecolabError, IndexError):
    def __init__(self, index: int, dimension: int) -> None:
        self.index = index
        self.dimension = dimension
        super().__init__(f"Branch index {index} is out of range for dimension {dimension}")


class CoverageError(DecolabError):
    def __init__(self, deficit: float, tolerance: float, half_width: float) -> None:
        self.deficit = deficit
        self.tolerance = tolerance
        self.half_width = half_width
        super().__init__(
            f"q-grid covers the probe only to half-width {half_width:.6g}; "
            f"mass deficit {deficit:.3e} is above {tolerance:.1e}"
        )


class PreconditionError(DecolabError):
    def __init__(self, k: int, l: int, overlap: float, tolerance: float) -> None:  # noqa: E741
        self.k = k
        self.l = l
        self.overlap = overlap
        self.tolerance = tolerance
        super().__init__(
            f"Pointer states {k} and {l} are not orthogonal (overlap {overlap:.3e} > {tolerance:.1e}), "
            "no projection valued measure can be extracted"
        )


class ConfigError(DecolabError):
    def __init__(self, messages: list[str]) -> None:
        self.messages = messages
        joined = "; ".join(messages)
        super().__init__(f"Invalid configuration: {joined}")


class UnknownSubcommandError(DecolabError):
    def __init__(self, name: str, known: list[str]) -> None:
        self.name = name
        self.known = known
        super().__init__(f"Unknown subcommand `{name}`, expected one of: {', '.join(known)}")


class NumericalContractError(DecolabError):
    def __init__(self, quantity: str, measured: float, tolerance: float) -> None:
        self.quantity = quantity
        self.measured = measured
        self.tolerance = tolerance
        super().__init__(f"{quantity} = {measured:.3e} violates the tolerance {tolerance:.1e}")
