# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``_search_py.search_invocation``.

Draws doubles straight from the numpy BitGenerator, in the exact order the
pure-Python kernel consumes Generator.random(), so both backends advance the
stream identically and produce identical results.
"""
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport asin, sin, sqrt
from numpy.random cimport bitgen_t

BACKEND = "compiled"


def search_invocation(long n_range, long n_marked, long budget, long reps, gen):
    cdef bitgen_t *rng
    cdef object capsule = gen.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("expected a numpy Generator")
    rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    cdef double theta = 0.0
    cdef double cap, m, u, s
    cdef long calls = 0, rem, k, idx, rep, isq
    if n_marked > 0:
        theta = asin(sqrt(<double> n_marked / <double> n_range))
    # ceil(sqrt(n_range)) without float round-off
    isq = <long> sqrt(<double> (n_range - 1)) if n_range > 1 else 0
    while (isq + 1) * (isq + 1) <= n_range - 1:
        isq += 1
    while isq * isq > n_range - 1:
        isq -= 1
    cap = <double> (isq + 1)

    for rep in range(reps):
        m = 1.0
        while True:
            rem = budget - calls
            if rem <= 0:
                return -1, calls
            k = <long> (rng.next_double(rng.state) * m)
            if k > rem - 1:
                k = rem - 1
            calls += k + 1
            u = rng.next_double(rng.state)
            s = sin((2 * k + 1) * theta)
            if n_marked > 0 and u < s * s:
                idx = <long> (rng.next_double(rng.state) * n_marked)
                if idx == n_marked:
                    idx = n_marked - 1
                return idx, calls
            if m >= cap:
                break
            m = m * 1.2
            if m > cap:
                m = cap
    return -1, calls
