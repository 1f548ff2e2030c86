# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Monte Carlo sweep kernels.

Random numbers come from an inlined SplitMix64 stream; ghzmc._mc_fallback
implements the same stream, so both backends advance a chain identically.
"""

import numpy as np

ctypedef unsigned long long u64

BACKEND = "cython"

cdef inline u64 _mix(u64 z) noexcept nogil:
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EB
    return z ^ (z >> 31)

cdef inline u64 _next(u64* state) noexcept nogil:
    state[0] = state[0] + <u64>0x9E3779B97F4A7C15
    return _mix(state[0])

cdef inline double _uniform(u64* state) noexcept nogil:
    return <double>(_next(state) >> 11) * (1.0 / 9007199254740992.0)


def metropolis_sweeps(signed char[::1] spins, const int[:, ::1] nbrs,
                      const double[::1] accept, u64 state,
                      long n_sweeps, long steps_per_sweep):
    """Random-site single-spin Metropolis; mutates spins, returns rng state.

    accept[k + n_nbr] must hold min(1, exp(-2*beta*J*k)) for the local field
    product k = sigma_i * sum(neighbors), k in [-n_nbr, n_nbr].
    """
    cdef Py_ssize_t n = spins.shape[0]
    cdef int n_nbr = nbrs.shape[1]
    cdef long sweep, step
    cdef Py_ssize_t k
    cdef int m, h, j
    cdef double u
    with nogil:
        for sweep in range(n_sweeps):
            for step in range(steps_per_sweep):
                k = <Py_ssize_t>(_next(&state) % <u64>n)
                h = 0
                for m in range(n_nbr):
                    j = nbrs[k, m]
                    if j >= 0:
                        h += spins[j]
                u = _uniform(&state)
                if u < accept[spins[k] * h + n_nbr]:
                    spins[k] = -spins[k]
    return state


def wolff_updates(signed char[::1] spins, const int[:, ::1] nbrs,
                  double p_add, u64 state, long n_updates):
    """Wolff single-cluster updates; mutates spins, returns rng state.

    One uniform is drawn per unvisited same-spin neighbor, in the neighbor
    table's column order, so random-number consumption is reproducible.
    """
    cdef Py_ssize_t n = spins.shape[0]
    cdef int n_nbr = nbrs.shape[1]
    stack_arr = np.empty(n, dtype=np.int32)
    cluster_arr = np.empty(n, dtype=np.int32)
    visited_arr = np.zeros(n, dtype=np.uint8)
    cdef int[::1] stack = stack_arr
    cdef int[::1] cluster = cluster_arr
    cdef unsigned char[::1] visited = visited_arr
    cdef long upd
    cdef Py_ssize_t seed_site, k, top, csize, i
    cdef int m, j
    cdef signed char s0
    with nogil:
        for upd in range(n_updates):
            seed_site = <Py_ssize_t>(_next(&state) % <u64>n)
            s0 = spins[seed_site]
            visited[seed_site] = 1
            stack[0] = <int>seed_site
            cluster[0] = <int>seed_site
            top = 1
            csize = 1
            while top > 0:
                top -= 1
                k = stack[top]
                for m in range(n_nbr):
                    j = nbrs[k, m]
                    if j >= 0 and visited[j] == 0 and spins[j] == s0:
                        if _uniform(&state) < p_add:
                            visited[j] = 1
                            stack[top] = j
                            top += 1
                            cluster[csize] = j
                            csize += 1
            for i in range(csize):
                spins[cluster[i]] = -spins[cluster[i]]
                visited[cluster[i]] = 0
    return state
