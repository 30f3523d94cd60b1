"""Pure-numpy fallback for the compiled sweep kernels (same signatures)."""

import numpy as np


def vi_sweep(v_in, v_out, pol_out, row_ptr, succ, wmass, wsum, rnext, act_cost,
             mu, gamma, n_states, n_actions):
    z = rnext + gamma * v_in
    seg = np.add.reduceat(wmass * z[succ], row_ptr[:-1])
    q = seg - mu * np.tile(act_cost, n_states) * wsum
    q = q.reshape(n_states, n_actions)
    np.max(q, axis=1, out=v_out)
    pol_out[:] = np.argmax(q, axis=1)


def policy_sweep(x_in, x_out, row_ptr, succ, wmass, wsum, addend, stage,
                 gamma, n_rows):
    z = addend + gamma * x_in
    x_out[:] = np.add.reduceat(wmass * z[succ], row_ptr[:-1]) + stage * wsum
