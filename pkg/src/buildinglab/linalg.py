"""Dense symmetric eigensolver shared by the spectra and model-space modules.

The compiled kernel is used when it imports; otherwise the numpy
round-robin fallback. Both converge to the same sorted spectrum.
"""
from __future__ import annotations

import numpy as np

from . import _jacobi_py
from .errors import NoConvergence, NotSymmetric

try:
    from ._jacobi_ext import cyclic_jacobi as _compiled_kernel
except ImportError:  # pragma: no cover - depends on the build
    _compiled_kernel = None

MAX_DIM = 2000
SYMMETRY_TOL = 1e-12
OFF_DIAGONAL_TOL = 1e-13
MAX_SWEEPS = 100

BACKEND = "compiled" if _compiled_kernel is not None else "python"


def available_backends() -> list[str]:
    return (["compiled"] if _compiled_kernel is not None else []) + ["python"]


def _kernel(backend: str):
    if backend == "auto":
        backend = BACKEND
    if backend == "compiled":
        if _compiled_kernel is None:
            raise RuntimeError("compiled Jacobi kernel is not built")
        return _compiled_kernel
    if backend == "python":
        return _jacobi_py.round_robin_jacobi
    raise ValueError(f"unknown backend {backend!r}")


def eigh(m, *, tol: float = OFF_DIAGONAL_TOL, max_sweeps: int = MAX_SWEEPS, backend: str = "auto"):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a real symmetric matrix.

    Raises NotSymmetric when ``|m - m.T|`` exceeds 1e-12 (relative to the
    largest entry once that is above 1) and NoConvergence when the sweep
    cap is hit before the off-diagonal Frobenius norm drops below
    ``tol * ||m||_F``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if n > MAX_DIM:
        raise ValueError(f"dimension {n} exceeds {MAX_DIM}")
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    scale = max(1.0, float(np.max(np.abs(m))))
    asym = float(np.max(np.abs(m - m.T)))
    if asym > SYMMETRY_TOL * scale:
        raise NotSymmetric(f"asymmetry {asym:.3e}")
    a = np.ascontiguousarray(0.5 * (m + m.T))
    v = np.eye(n)
    tol_off = tol * float(np.linalg.norm(a))
    sweeps, off = _kernel(backend)(a, v, tol_off, max_sweeps)
    if sweeps < 0:
        raise NoConvergence(f"off-diagonal norm {off:.3e} after {max_sweeps} sweeps")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], np.ascontiguousarray(v[:, order])


def eigvalsh(m, **kw) -> np.ndarray:
    return eigh(m, **kw)[0]


def sym_funm(m, fn, **kw) -> np.ndarray:
    """``V diag(fn(w)) V^T`` for symmetric ``m``."""
    w, v = eigh(m, **kw)
    out = (v * fn(w)) @ v.T
    return 0.5 * (out + out.T)


def hermitian_to_real(h) -> np.ndarray:
    """Real symmetric embedding ``[[Re, -Im], [Im, Re]]``; each eigenvalue appears twice."""
    h = np.asarray(h)
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])
