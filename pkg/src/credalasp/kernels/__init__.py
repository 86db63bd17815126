"""Hot kernels with two interchangeable backends.

The backend is chosen once at import time from ``CREDALASP_BACKEND``
(``numba``, the default, or ``numpy``). If numba cannot be imported the numpy
backend is used. :func:`get_backend` returns either module explicitly, which
is how the tests and ``benchmarks/bench_kernels.py`` compare the two.
"""

from __future__ import annotations

import importlib
import logging
import os
from types import ModuleType

log = logging.getLogger(__name__)

BACKENDS = ("numba", "numpy")

KERNEL_NAMES = ("least_model", "enumerate_models", "evaluate_batch", "mh_chain", "gibbs_chain")


def get_backend(name: str) -> ModuleType:
    if name not in BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; choose from {BACKENDS}")
    return importlib.import_module(f"{__name__}._{name}")


def _select() -> tuple[str, ModuleType]:
    wanted = os.environ.get("CREDALASP_BACKEND", "numba").strip().lower() or "numba"
    if wanted == "numba":
        try:
            return "numba", get_backend("numba")
        except ImportError:
            log.warning("numba unavailable; falling back to the numpy kernels")
            return "numpy", get_backend("numpy")
    return wanted, get_backend(wanted)


BACKEND, _impl = _select()

least_model = _impl.least_model
enumerate_models = _impl.enumerate_models
evaluate_batch = _impl.evaluate_batch
mh_chain = _impl.mh_chain
gibbs_chain = _impl.gibbs_chain
