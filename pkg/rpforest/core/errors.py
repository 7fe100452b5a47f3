# Random planted forest regression
#
# MIT License
# Copyright (c) 2023 Ondrej Sienczak
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.
from __future__ import annotations


class RpfError(Exception):
    """Base of all errors raised by the planted forest library"""


class InvalidData(RpfError, ValueError):
    """Data set violates its invariants (shape, finiteness, malformed input file)"""


class EmptyChild(RpfError, ValueError):
    """Split would leave one of the children without any sample"""


class InvalidSplitPoint(RpfError, ValueError):
    """Split point is outside of the leaf extent (inf I <= c < sup I)"""


class NoValidSplit(RpfError):
    """All split candidates were rejected"""


class DegenerateData(RpfError, ValueError):
    """No coordinate of the data can be split at all"""


class UnsupportedOrder(RpfError, ValueError):
    """Component export requested for interaction order which is not supported"""


class NonConvergence(RpfError, ArithmeticError):
    """Purification sweeps did not converge"""


class GridTooLarge(RpfError, MemoryError):
    """Flattened component grid would exceed configured size"""


class DomainError(RpfError, ValueError):
    """Predictor outside of the unit cube required by the theoretical estimator"""


class LengthMismatch(RpfError, ValueError):
    """Compared vectors have different lengths"""


__all__ = (
    "DegenerateData",
    "DomainError",
    "EmptyChild",
    "GridTooLarge",
    "InvalidData",
    "InvalidSplitPoint",
    "LengthMismatch",
    "NoValidSplit",
    "NonConvergence",
    "RpfError",
    "UnsupportedOrder",
)
