"""Pure numpy implementation of the per-node best-split search.

horserule._splitc is the compiled twin. Both walk candidate columns in
ascending index order, scan node members in presorted-x order, and use the
same arithmetic expressions so results are bit-identical across backends.
"""

import numpy as np

# Relative improvement a split must clear; absorbs rounding noise in the
# prefix sums when y is (nearly) constant inside a node.
GAIN_TOL = 1e-12

BACKEND_NAME = "python"


def node_best_split(orderT, XT, y, w, memb, cols, n_min):
    """Best axis-aligned split of one node.

    orderT : (p, n) int32, row indices sorted ascending per column.
    XT     : (p, n) float64, covariates transposed.
    y, w   : (n,) float64 response and nonnegative row weights.
    memb   : (n,) bool, rows belonging to the node (implies w > 0).
    cols   : (m,) int64 ascending candidate column indices.
    n_min  : minimum weighted row count required on each side.

    Returns (col, threshold, improvement); col is -1 when no candidate
    clears the improvement test. Ties resolve to the lowest column index,
    then the smallest threshold.
    """
    k = int(memb.sum())
    if k < 2:
        return -1, 0.0, -np.inf

    cols = np.asarray(cols)
    sub = orderT[cols]  # (m, n)
    sel = memb[sub]
    idx = sub[sel].reshape(len(cols), k)  # member rows, x-ascending per column
    xs = XT[cols[:, None], idx]
    ws = w[idx]
    cw = np.cumsum(ws, axis=1)
    cs = np.cumsum(ws * y[idx], axis=1)
    W = cw[:, -1]
    S = cs[:, -1]
    base = S * S / W

    cwl = cw[:, :-1]
    csl = cs[:, :-1]
    rw = W[:, None] - cwl  # exact for integer-valued weights
    rs = S[:, None] - csl
    gains = csl * csl / cwl + rs * rs / rw
    valid = (xs[:, 1:] != xs[:, :-1]) & (cwl >= n_min) & (rw >= n_min)
    gains = np.where(valid, gains, -np.inf)

    best_col = -1
    best_thr = 0.0
    best_gain = -np.inf
    best_imp = -np.inf
    for c in range(len(cols)):
        t = int(np.argmax(gains[c]))  # first maximum, matching a strict > scan
        g = float(gains[c, t])
        if g == -np.inf:
            continue
        if not (g - base[c] > GAIN_TOL * base[c]):
            continue
        if g > best_gain:
            a = float(xs[c, t])
            b = float(xs[c, t + 1])
            thr = 0.5 * (a + b)
            if thr >= b:  # midpoint rounded up to the right value
                thr = a
            best_gain = g
            best_col = int(cols[c])
            best_thr = thr
            best_imp = g - float(base[c])
    return best_col, best_thr, best_imp
