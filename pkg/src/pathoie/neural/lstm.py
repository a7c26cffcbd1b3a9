"""One-directional peephole LSTM: forward evaluation and exact backprop.

Gate order per step: forget, input, candidate, cell, output, hidden.  The
forget and input gates peek at the previous cell state, the output gate at
the current one; the candidate gate has no peephole.  The backward-reading
direction of the network is this same recurrence run over the reversed
input sequence, so a single implementation serves both directions.
"""

from __future__ import annotations

import numpy as np

GATES = ("f", "i", "g", "o")
PEEPHOLE_GATES = ("f", "i", "o")


def sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def direction_param_names(prefix: str) -> list:
    names = []
    for gate in GATES:
        names.append("%s.W_%s" % (prefix, gate))
        names.append("%s.U_%s" % (prefix, gate))
        if gate in PEEPHOLE_GATES:
            names.append("%s.V_%s" % (prefix, gate))
        names.append("%s.b_%s" % (prefix, gate))
    return names


def init_direction_params(prefix, dim_l, dim_in, rng, scale=0.05, forget_bias=1.0) -> dict:
    """Uniform +-scale matrices; forget bias starts at ``forget_bias``,
    the other biases at zero."""
    params = {}
    for gate in GATES:
        params["%s.W_%s" % (prefix, gate)] = rng.uniform(-scale, scale, size=(dim_l, dim_in))
        params["%s.U_%s" % (prefix, gate)] = rng.uniform(-scale, scale, size=(dim_l, dim_l))
        if gate in PEEPHOLE_GATES:
            params["%s.V_%s" % (prefix, gate)] = rng.uniform(-scale, scale, size=(dim_l, dim_l))
        bias = np.zeros(dim_l)
        if gate == "f":
            bias[:] = forget_bias
        params["%s.b_%s" % (prefix, gate)] = bias
    return params


def lstm_forward_direction(params: dict, prefix: str, xs: np.ndarray):
    """Evaluate the recurrence over ``xs`` of shape (T, dim_in).

    Initial hidden and cell states are zero.  Returns (hs, cache) where
    ``hs`` has shape (T, dim_l) and ``cache`` holds every intermediate
    needed by :func:`lstm_backward_direction`.
    """
    p = {k[len(prefix) + 1 :]: v for k, v in params.items() if k.startswith(prefix + ".")}
    T = xs.shape[0]
    dim_l = p["b_f"].shape[0]
    h = np.zeros(dim_l)
    c = np.zeros(dim_l)
    store = {k: np.empty((T, dim_l)) for k in ("f", "i", "g", "o", "c", "tanh_c", "h", "h_prev", "c_prev")}
    for t in range(T):
        x = xs[t]
        store["h_prev"][t] = h
        store["c_prev"][t] = c
        f = sigmoid(p["W_f"] @ x + p["U_f"] @ h + p["V_f"] @ c + p["b_f"])
        i = sigmoid(p["W_i"] @ x + p["U_i"] @ h + p["V_i"] @ c + p["b_i"])
        g = np.tanh(p["W_g"] @ x + p["U_g"] @ h + p["b_g"])
        c = i * g + f * c
        o = sigmoid(p["W_o"] @ x + p["U_o"] @ h + p["V_o"] @ c + p["b_o"])
        tc = np.tanh(c)
        h = o * tc
        store["f"][t] = f
        store["i"][t] = i
        store["g"][t] = g
        store["o"][t] = o
        store["c"][t] = c
        store["tanh_c"][t] = tc
        store["h"][t] = h
    cache = {"xs": xs, "prefix": prefix, **store}
    return store["h"].copy(), cache


def lstm_backward_direction(params: dict, cache: dict, dhs: np.ndarray, grads: dict):
    """Backprop through one direction.

    ``dhs`` (T, dim_l) are the upstream gradients on each hidden vector.
    Parameter gradients accumulate into ``grads`` (keys created on
    demand); the return value is the gradient on the inputs, shape
    (T, dim_in).
    """
    prefix = cache["prefix"]
    p = {k[len(prefix) + 1 :]: v for k, v in params.items() if k.startswith(prefix + ".")}
    xs = cache["xs"]
    T, dim_l = dhs.shape

    for gate in GATES:
        for kind in ("W", "U", "b") + (("V",) if gate in PEEPHOLE_GATES else ()):
            key = "%s.%s_%s" % (prefix, kind, gate)
            if key not in grads:
                grads[key] = np.zeros_like(params[key])

    dxs = np.zeros_like(xs)
    # Gate pre-activation gradients from step t+1 and the cell carry.
    daf = dai = dag = dao = np.zeros(dim_l)
    dc_next = np.zeros(dim_l)
    f_next = np.zeros(dim_l)

    for t in range(T - 1, -1, -1):
        f, i, g, o = cache["f"][t], cache["i"][t], cache["g"][t], cache["o"][t]
        tc = cache["tanh_c"][t]
        c_prev = cache["c_prev"][t]
        h_prev = cache["h_prev"][t]

        dh = dhs[t] + p["U_f"].T @ daf + p["U_i"].T @ dai + p["U_g"].T @ dag + p["U_o"].T @ dao
        dao_t = (dh * tc) * o * (1.0 - o)
        dc = dh * o * (1.0 - tc * tc) + p["V_o"].T @ dao_t
        dc += dc_next * f_next + p["V_f"].T @ daf + p["V_i"].T @ dai
        daf_t = (dc * c_prev) * f * (1.0 - f)
        dai_t = (dc * g) * i * (1.0 - i)
        dag_t = (dc * i) * (1.0 - g * g)

        x = xs[t]
        for gate, da in (("f", daf_t), ("i", dai_t), ("g", dag_t), ("o", dao_t)):
            grads["%s.W_%s" % (prefix, gate)] += np.outer(da, x)
            grads["%s.U_%s" % (prefix, gate)] += np.outer(da, h_prev)
            grads["%s.b_%s" % (prefix, gate)] += da
        grads["%s.V_f" % prefix] += np.outer(daf_t, c_prev)
        grads["%s.V_i" % prefix] += np.outer(dai_t, c_prev)
        grads["%s.V_o" % prefix] += np.outer(dao_t, cache["c"][t])

        dxs[t] = (
            p["W_f"].T @ daf_t + p["W_i"].T @ dai_t + p["W_g"].T @ dag_t + p["W_o"].T @ dao_t
        )

        daf, dai, dag, dao = daf_t, dai_t, dag_t, dao_t
        dc_next = dc
        f_next = f
    return dxs
