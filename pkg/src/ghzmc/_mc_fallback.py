"""Pure-Python Monte Carlo kernels, bit-compatible with the compiled core.

Mirrors ghzmc._mc_kernels step for step (same SplitMix64 draws in the same
order), so a chain produces identical spin trajectories on either backend.
Orders of magnitude slower; see benchmarks/bench_kernels.py.
"""

from .rng import _GAMMA, _MASK64, mix64

BACKEND = "python"

_INV_2_53 = 1.0 / 9007199254740992.0


def metropolis_sweeps(spins, nbrs, accept, state, n_sweeps, steps_per_sweep):
    n = spins.shape[0]
    n_nbr = nbrs.shape[1]
    state = int(state)
    for _ in range(n_sweeps):
        for _ in range(steps_per_sweep):
            state = (state + _GAMMA) & _MASK64
            k = mix64(state) % n
            h = 0
            for m in range(n_nbr):
                j = nbrs[k, m]
                if j >= 0:
                    h += spins[j]
            state = (state + _GAMMA) & _MASK64
            u = (mix64(state) >> 11) * _INV_2_53
            if u < accept[spins[k] * h + n_nbr]:
                spins[k] = -spins[k]
    return state


def wolff_updates(spins, nbrs, p_add, state, n_updates):
    n = spins.shape[0]
    n_nbr = nbrs.shape[1]
    state = int(state)
    for _ in range(n_updates):
        state = (state + _GAMMA) & _MASK64
        seed_site = mix64(state) % n
        s0 = spins[seed_site]
        visited = bytearray(n)
        visited[seed_site] = 1
        stack = [seed_site]
        cluster = [seed_site]
        while stack:
            k = stack.pop()
            for m in range(n_nbr):
                j = int(nbrs[k, m])
                if j >= 0 and not visited[j] and spins[j] == s0:
                    state = (state + _GAMMA) & _MASK64
                    u = (mix64(state) >> 11) * _INV_2_53
                    if u < p_add:
                        visited[j] = 1
                        stack.append(j)
                        cluster.append(j)
        for j in cluster:
            spins[j] = -spins[j]
    return state
