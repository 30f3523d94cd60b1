# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Bellman and policy-evaluation sweeps over a flat CSR kernel."""


def vi_sweep(double[::1] v_in, double[::1] v_out, long long[::1] pol_out,
             long long[::1] row_ptr, long long[::1] succ,
             double[::1] wmass, double[::1] wsum,
             double[::1] rnext, double[::1] act_cost,
             double mu, double gamma, Py_ssize_t n_states, Py_ssize_t n_actions):
    cdef Py_ssize_t s, a, k, r
    cdef double q, best
    cdef Py_ssize_t best_a
    for s in range(n_states):
        best = -1e300
        best_a = 0
        for a in range(n_actions):
            r = s * n_actions + a
            q = 0.0
            for k in range(row_ptr[r], row_ptr[r + 1]):
                q += wmass[k] * (rnext[succ[k]] + gamma * v_in[succ[k]])
            q -= mu * act_cost[a] * wsum[r]
            if q > best:
                best = q
                best_a = a
        v_out[s] = best
        pol_out[s] = best_a


def policy_sweep(double[::1] x_in, double[::1] x_out,
                 long long[::1] row_ptr, long long[::1] succ,
                 double[::1] wmass, double[::1] wsum,
                 double[::1] addend, double[::1] stage,
                 double gamma, Py_ssize_t n_rows):
    cdef Py_ssize_t s, k
    cdef double acc
    for s in range(n_rows):
        acc = 0.0
        for k in range(row_ptr[s], row_ptr[s + 1]):
            acc += wmass[k] * (addend[succ[k]] + gamma * x_in[succ[k]])
        x_out[s] = acc + stage[s] * wsum[s]
