# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled superoperator kernels.

Superoperators act on the (row bit, column bit) pair of each target qubit.
Index convention for one qubit: ``k = 2*a + b`` (a: row bit, b: column bit).
For two qubits ``k = 4*(2*a0 + a1) + (2*b0 + b1)``, i.e. ``kron(U, conj(U))``
for a unitary. Qubit 0 is the most significant bit of a basis index.

For each row block the kernels gather the strided column vectors of every
(row bit, column bit) combination into scratch buffers, mix them with the
superoperator and scatter the result back. The buffers span a whole row, so
the innermost loop stays long and vectorisable wherever the targets sit.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline Py_ssize_t _insert_zero(Py_ssize_t x, int p) nogil:
    cdef Py_ssize_t low = x & ((<Py_ssize_t>1 << p) - 1)
    return ((x >> p) << (p + 1)) | low


cdef void _row(double* data, Py_ssize_t dim, Py_ssize_t rb, Py_ssize_t* roff,
               Py_ssize_t* coff, Py_ssize_t* cbs, Py_ssize_t nouter, Py_ssize_t run,
               int d, double* sr, double* si, double* vr, double* vi,
               double* outr, double* outi) nogil:
    # One output row block: gather the k = d*d strided vectors of length
    # nouter*run, mix them with the superoperator, scatter them back.
    cdef int k = d * d
    cdef Py_ssize_t L = nouter * run
    cdef int i, j
    cdef Py_ssize_t co, l, m
    cdef double* row
    cdef double* src
    cdef double* xr
    cdef double* xi
    cdef double a, b
    for j in range(k):
        row = data + 2 * ((rb + roff[j // d]) * dim + coff[j % d])
        xr = vr + j * L
        xi = vi + j * L
        m = 0
        for co in range(nouter):
            src = row + 2 * cbs[co]
            for l in range(run):
                xr[m] = src[2 * l]
                xi[m] = src[2 * l + 1]
                m += 1
    for i in range(k):
        for l in range(L):
            outr[l] = 0.0
            outi[l] = 0.0
        for j in range(k):
            a = sr[k * i + j]
            b = si[k * i + j]
            if a == 0.0 and b == 0.0:
                continue
            xr = vr + j * L
            xi = vi + j * L
            for l in range(L):
                outr[l] = outr[l] + a * xr[l] - b * xi[l]
                outi[l] = outi[l] + a * xi[l] + b * xr[l]
        row = data + 2 * ((rb + roff[i // d]) * dim + coff[i % d])
        m = 0
        for co in range(nouter):
            src = row + 2 * cbs[co]
            for l in range(run):
                src[2 * l] = outr[m]
                src[2 * l + 1] = outi[m]
                m += 1


cdef void _apply(double* data, Py_ssize_t dim, int* pos, int nq,
                 double* sr, double* si) nogil:
    # pos: bit positions (significance) of the targets, in superop order.
    cdef int k = 1 << (2 * nq)
    cdef int plo = pos[0]
    cdef int phi = pos[0]
    cdef int a, t
    cdef Py_ssize_t run, nouter, nrow, ri, co, rb, cb, L
    cdef Py_ssize_t roff[4]
    cdef Py_ssize_t coff[4]
    cdef int d = 1 << nq
    if nq == 2:
        if pos[1] < plo:
            plo = pos[1]
        else:
            phi = pos[1]
    run = <Py_ssize_t>1 << plo
    for a in range(d):
        roff[a] = 0
        for t in range(nq):
            if (a >> (nq - 1 - t)) & 1:
                roff[a] |= <Py_ssize_t>1 << pos[t]
        coff[a] = roff[a]
    nrow = dim >> nq
    nouter = nrow >> plo
    L = nrow
    cdef Py_ssize_t* cbs = <Py_ssize_t*>malloc(nouter * sizeof(Py_ssize_t))
    cdef double* vr = <double*>malloc(k * L * sizeof(double))
    cdef double* vi = <double*>malloc(k * L * sizeof(double))
    cdef double* outr = <double*>malloc(L * sizeof(double))
    cdef double* outi = <double*>malloc(L * sizeof(double))
    for co in range(nouter):
        cb = _insert_zero(co << plo, plo)
        if nq == 2:
            cb = _insert_zero(cb, phi)
        cbs[co] = cb
    for ri in range(nrow):
        rb = _insert_zero(ri, plo)
        if nq == 2:
            rb = _insert_zero(rb, phi)
        _row(data, dim, rb, roff, coff, cbs, nouter, run, d, sr, si, vr, vi, outr, outi)
    free(cbs)
    free(vr)
    free(vi)
    free(outr)
    free(outi)


cdef _run(cnp.ndarray rho, cnp.ndarray sop, int* pos, int nq, int n):
    cdef Py_ssize_t dim = <Py_ssize_t>1 << n
    cdef int k = 1 << (2 * nq)
    cdef double sr[256]
    cdef double si[256]
    cdef int i, j
    cdef double complex[:, ::1] s
    if rho.ndim != 2 or rho.shape[0] != dim or rho.shape[1] != dim:
        raise ValueError("density matrix shape does not match qubit count")
    if rho.dtype != np.complex128 or not rho.flags.c_contiguous:
        raise ValueError("density matrix must be C-contiguous complex128")
    if sop.shape[0] != k or sop.shape[1] != k:
        raise ValueError(f"superoperator must be {k}x{k}")
    s = np.ascontiguousarray(sop, dtype=np.complex128)
    for i in range(k):
        for j in range(k):
            sr[k * i + j] = s[i, j].real
            si[k * i + j] = s[i, j].imag
    cdef double* data = <double*>cnp.PyArray_DATA(rho)
    with nogil:
        _apply(data, dim, pos, nq, sr, si)


def apply_superop_1q(cnp.ndarray rho, cnp.ndarray sop, int qubit, int n):
    cdef int pos[2]
    if not 0 <= qubit < n:
        raise ValueError("qubit index out of range")
    pos[0] = n - 1 - qubit
    _run(rho, sop, pos, 1, n)


def apply_superop_2q(cnp.ndarray rho, cnp.ndarray sop, int q0, int q1, int n):
    cdef int pos[2]
    if q0 == q1:
        raise ValueError("two-qubit superoperator needs distinct qubits")
    if not (0 <= q0 < n and 0 <= q1 < n):
        raise ValueError("qubit index out of range")
    pos[0] = n - 1 - q0
    pos[1] = n - 1 - q1
    _run(rho, sop, pos, 2, n)
