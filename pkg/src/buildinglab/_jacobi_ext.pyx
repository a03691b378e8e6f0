# cython: language_level=3
"""Compiled cyclic-by-row Jacobi sweeps for dense symmetric matrices."""
from libc.math cimport sqrt, fabs


cdef double _off_norm(double[:, ::1] a) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j
    cdef double s = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s += a[i, j] * a[i, j]
    return sqrt(s)


cdef void _rotate(double[:, ::1] a, double[:, ::1] v, Py_ssize_t p, Py_ssize_t q) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t k
    cdef double apq = a[p, q]
    cdef double tau, t, c, s, x, y
    tau = (a[q, q] - a[p, p]) / (2.0 * apq)
    if fabs(tau) > 1e150:
        t = 0.5 / tau
    elif tau >= 0.0:
        t = 1.0 / (tau + sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
    c = 1.0 / sqrt(1.0 + t * t)
    s = t * c
    for k in range(n):
        x = a[k, p]
        y = a[k, q]
        a[k, p] = c * x - s * y
        a[k, q] = s * x + c * y
    for k in range(n):
        x = a[p, k]
        y = a[q, k]
        a[p, k] = c * x - s * y
        a[q, k] = s * x + c * y
    a[p, q] = 0.0
    a[q, p] = 0.0
    for k in range(n):
        x = v[k, p]
        y = v[k, q]
        v[k, p] = c * x - s * y
        v[k, q] = s * x + c * y


def cyclic_jacobi(double[:, ::1] a, double[:, ::1] v, double tol_off, int max_sweeps):
    """Diagonalise ``a`` in place, accumulating rotations into ``v``.

    Returns ``(sweeps, off)``; ``sweeps`` is -1 when ``max_sweeps`` ran out.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q
    cdef int sweep
    cdef double off
    with nogil:
        for sweep in range(max_sweeps + 1):
            off = _off_norm(a)
            if off <= tol_off:
                break
            if sweep == max_sweeps:
                sweep = -1
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    if a[p, q] != 0.0:
                        _rotate(a, v, p, q)
    return sweep, off
