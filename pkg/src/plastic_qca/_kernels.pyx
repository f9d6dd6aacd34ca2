# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled gate-application kernel; see _kernels_py for the reference version."""

import numpy as np

from libc.stdint cimport int64_t
from libc.stdlib cimport free, malloc

ctypedef int64_t index_t


def apply_local(const double complex[::1] psi,
                double complex[::1] out,
                const index_t[::1] bases,
                const index_t[::1] offsets,
                const index_t[::1] rows,
                const index_t[::1] cols,
                const double complex[::1] vals):
    cdef Py_ssize_t nb = bases.shape[0]
    cdef Py_ssize_t nt = vals.shape[0]
    cdef Py_ssize_t k = offsets.shape[0]
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t i, b, t
    cdef index_t base
    cdef double complex* local_in
    cdef double complex* local_out
    if psi.shape[0] != n:
        raise ValueError("input and output lengths differ")
    if nb * k != n:
        # supports do not tile the space; fall back to scattered accumulation
        with nogil:
            for i in range(n):
                out[i] = 0
            for b in range(nb):
                base = bases[b]
                for t in range(nt):
                    out[base + offsets[rows[t]]] += vals[t] * psi[base + offsets[cols[t]]]
        return np.asarray(out)

    local_in = <double complex*> malloc(2 * k * sizeof(double complex))
    if local_in == NULL:
        raise MemoryError()
    local_out = local_in + k
    with nogil:
        for b in range(nb):
            base = bases[b]
            for i in range(k):
                local_in[i] = psi[base + offsets[i]]
                local_out[i] = 0
            for t in range(nt):
                local_out[rows[t]] += vals[t] * local_in[cols[t]]
            for i in range(k):
                out[base + offsets[i]] = local_out[i]
    free(local_in)
    return np.asarray(out)
