"""Select the compiled cycle kernel if it was built, else the pure-Python one.

Set LEVYRATE_PURE_PYTHON=1 to force the fallback.
"""

import os

from . import _pykernel

python_simulate_block = _pykernel.simulate_block

try:
    from ._ckernel import simulate_block as compiled_simulate_block
except ImportError:  # extension not built
    compiled_simulate_block = None

if compiled_simulate_block is not None and os.environ.get("LEVYRATE_PURE_PYTHON", "") in ("", "0"):
    simulate_block = compiled_simulate_block
    BACKEND = "compiled"
else:
    simulate_block = python_simulate_block
    BACKEND = "python"


def get_kernel(name=None):
    """Return (name, function) for 'compiled', 'python' or the import-time default."""
    if name is None:
        return BACKEND, simulate_block
    if name == "python":
        return "python", python_simulate_block
    if name == "compiled":
        if compiled_simulate_block is None:
            raise RuntimeError("compiled kernel is not available; build the extension first")
        return "compiled", compiled_simulate_block
    raise ValueError(f"unknown kernel {name!r}")
