"""Kernel backend selection: compiled extension if available, NumPy otherwise.

Set HSSEIG_BACKEND=python (or =c) to force a choice; the default prefers the
compiled module and silently falls back to the pure-NumPy one.
"""
import os


def load_kernels(name):
    """Import the kernel module for an explicit backend name."""
    if name == "python":
        from . import _kernels_py
        return _kernels_py
    if name == "c":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r} (expected 'c' or 'python')")


def _select():
    forced = os.environ.get("HSSEIG_BACKEND", "").strip().lower()
    if forced:
        return load_kernels(forced), forced
    try:
        return load_kernels("c"), "c"
    except ImportError:
        return load_kernels("python"), "python"


kernels, BACKEND = _select()
