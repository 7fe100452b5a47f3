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

from .config import rpf_global_params

import logging as _logging

_log = _logging.getLogger("rpforest")


class logger:
    @staticmethod
    def info(*args) -> None:
        if not rpf_global_params["silent"]:
            _log.info(" ".join(["rpforest ::", *map(str, args)]))

    @staticmethod
    def debug(*args) -> None:
        if not rpf_global_params["silent"]:
            _log.debug(" ".join(["rpforest ::", *map(str, args)]))

    @staticmethod
    def enable(level: int = _logging.INFO) -> None:
        """Clears silent flag and attaches console handler when none exists"""
        rpf_global_params["silent"] = False
        _log.setLevel(level)
        if not _log.handlers:
            handler = _logging.StreamHandler()
            handler.setFormatter(_logging.Formatter("%(message)s"))
            _log.addHandler(handler)


__all__ = ("logger",)
