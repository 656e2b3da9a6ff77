"""Pure-NumPy implementations of the message-passing hot kernels.

All functions take a batch of frames: message arrays are (B, E), LLR arrays
are (B, n). Semantics must match arbp.kernels._fast exactly (up to floating
point roundoff); the test suite cross-checks the two backends.
"""
import numpy as np

EPS_CLIP = 1e-7           # arctanh-domain clipping
_TAYLOR_EXACT_CUTOFF = 0.95


def _taylor_cutoff(q):
    """Largest |t| at which the truncated series still equals 2*arctanh(t)
    to double precision: tail <= 2 t^(q+2)/((q+2)(1-t^2)), so t^(q+2) ~ 1e-17
    keeps it below roundoff for every q."""
    return min(_TAYLOR_EXACT_CUTOFF, float(np.exp(-39.1 / (q + 2))))


def variable_step(llr, x_prev, vv, var_edges, var_ptr):
    """x[e=(c,v)] = tanh(0.5*(llr_v + sum of x_prev over N(v) minus e))."""
    tot = np.add.reduceat(x_prev[:, var_edges], var_ptr[:-1], axis=1)
    x = np.tanh(0.5 * (llr[:, vv] + tot[:, vv] - x_prev))
    lim = 1.0 - EPS_CLIP
    return np.clip(x, -lim, lim)


def check_exclusion(x_prev, check_pad, check_mask, flat_mask):
    """Leave-one-out products per check: t[e=(c,v)] = prod over N(c) minus e.

    Division-free prefix/suffix products so exact zeros are handled.
    """
    B = x_prev.shape[0]
    m, dc = check_pad.shape
    M = np.where(check_mask, x_prev[:, check_pad], 1.0)  # (B, m, dc)
    pre = np.ones_like(M)
    suf = np.ones_like(M)
    np.cumprod(M[:, :, :-1], axis=2, out=pre[:, :, 1:])
    np.cumprod(M[:, :, :0:-1], axis=2, out=suf[:, :, -2::-1])
    t = (pre * suf).reshape(B, m * dc)[:, flat_mask]
    return t


def check_exclusion_backward(g_t, x_prev, check_pad, check_mask, flat_mask):
    """Gradient of sum(g_t * t) w.r.t. x_prev, via the prefix/suffix
    recurrences (division-free, so zero messages are safe)."""
    B = x_prev.shape[0]
    m, dc = check_pad.shape
    M = np.where(check_mask, x_prev[:, check_pad], 1.0)
    pre = np.ones_like(M)
    suf = np.ones_like(M)
    np.cumprod(M[:, :, :-1], axis=2, out=pre[:, :, 1:])
    np.cumprod(M[:, :, :0:-1], axis=2, out=suf[:, :, -2::-1])
    g_pad = np.zeros((B, m * dc))
    g_pad[:, flat_mask] = g_t
    g_pad = g_pad.reshape(B, m, dc)
    g_pre = g_pad * suf
    g_suf = g_pad * pre
    # pre[i] = pre[i-1] * M[i-1]; run the recurrences in reverse.
    g_M = np.zeros_like(M)
    acc = np.zeros((B, m))
    for i in range(dc - 1, 0, -1):
        acc += g_pre[:, :, i]
        g_M[:, :, i - 1] += acc * pre[:, :, i - 1]
        acc *= M[:, :, i - 1]
    acc = np.zeros((B, m))
    for i in range(dc - 1):
        acc += g_suf[:, :, i]
        g_M[:, :, i + 1] += acc * suf[:, :, i + 1]
        acc *= M[:, :, i + 1]
    g_x = np.zeros_like(x_prev)
    flat_idx = check_pad.reshape(-1)[flat_mask]
    np.add.at(g_x.T, flat_idx, g_M.reshape(B, m * dc)[:, flat_mask].T)
    return g_x


def check_step_exact(x_prev, check_pad, check_mask, flat_mask):
    """x[e=(c,v)] = 2*arctanh of the leave-one-out product, clipped."""
    t = check_exclusion(x_prev, check_pad, check_mask, flat_mask)
    lim = 1.0 - EPS_CLIP
    return 2.0 * np.arctanh(np.clip(t, -lim, lim))


def taylor_sum(t, q):
    """Truncated odd series of 2*arctanh: 2*sum_{m=0}^{(q-1)/2} t^(2m+1)/(2m+1).

    Evaluated by Horner-style accumulation in t^2 on the entries where the
    series tail is above double precision; elsewhere 2*arctanh(t) is exact.
    """
    t = np.asarray(t)
    cutoff = _taylor_cutoff(q)
    out = 2.0 * np.arctanh(np.clip(t, -cutoff, cutoff))
    hot = np.abs(t) >= cutoff
    if hot.any():
        th = t[hot]
        t2 = th * th
        acc = np.full_like(th, 1.0 / q)
        for mm in range((q - 1) // 2 - 1, -1, -1):
            acc = acc * t2 + 1.0 / (2 * mm + 1)
        out[hot] = 2.0 * th * acc
    return out


def taylor_deriv(t, q):
    """Derivative of taylor_sum in t: 2*(1 - t^(q+1))/(1 - t^2), with the
    exact limit q+1 at t^2 == 1."""
    t = np.asarray(t)
    t2 = t * t
    denom = 1.0 - t2
    singular = np.abs(denom) < 1e-12
    safe = np.where(singular, 1.0, denom)
    val = 2.0 * (1.0 - t2 ** ((q + 1) // 2)) / safe
    return np.where(singular, float(q + 1), val)


def check_step_taylor(x_prev, check_pad, check_mask, flat_mask, q):
    t = check_exclusion(x_prev, check_pad, check_mask, flat_mask)
    return taylor_sum(t, q)
