"""Pure-numpy kernels, used when the compiled extension is unavailable.

Must stay numerically interchangeable with ``_native``: identical sweep
schedules for the coordinate descent, identical integer pair counts for the
rank statistics.
"""

import numpy as np


def lasso_cd(X, y, alpha, tol, max_iter, w0=None):
    """Coordinate descent for min ||y - Xw||^2 + alpha*||w||_1.

    X is expected standardized and y centered by the caller; w0 is the
    starting iterate (zeros when omitted). Sweeps run over all coordinates,
    then iterate on the active (nonzero) set until stable, then re-check with
    a full sweep. Converged when a full sweep improves the objective by less
    than tol * max(1, |objective|); the coordinate updates themselves are
    exact minimizers, so the objective never increases.

    Returns (w, objectives, converged); objectives[0] is the starting value
    and one entry follows per sweep.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    w = np.zeros(d) if w0 is None else np.array(w0, dtype=np.float64)
    r = y - X @ w if w0 is not None else y.copy()
    xx = np.einsum("ij,ij->j", X, X)
    thresh = 0.5 * alpha

    def objective():
        return float(r @ r + alpha * np.abs(w).sum())

    def improved(prev, curr):
        return prev - curr > tol * max(1.0, abs(curr))

    objectives = [objective()]
    sweeps = 0
    converged = False

    def sweep(indices):
        nonlocal r
        for j in indices:
            if xx[j] == 0.0:
                continue
            rho = X[:, j] @ r + xx[j] * w[j]
            if rho > thresh:
                w_new = (rho - thresh) / xx[j]
            elif rho < -thresh:
                w_new = (rho + thresh) / xx[j]
            else:
                w_new = 0.0
            delta = w_new - w[j]
            if delta != 0.0:
                r -= delta * X[:, j]
                w[j] = w_new

    all_idx = range(d)
    while sweeps < max_iter:
        sweep(all_idx)
        sweeps += 1
        objectives.append(objective())
        if not improved(objectives[-2], objectives[-1]):
            converged = True
            break
        # iterate on the active set before paying for another full sweep
        while sweeps < max_iter:
            active = np.nonzero(w)[0]
            if active.size == 0 or active.size == d:
                break
            sweep(active)
            sweeps += 1
            objectives.append(objective())
            if not improved(objectives[-2], objectives[-1]):
                break
    return w, np.asarray(objectives), converged


def kendall_stats(x, y):
    """Pairwise concordance stats for Kendall's tau-b.

    Returns (s, tx, ty): s = sum over pairs i<j of sign(x_i-x_j)*sign(y_i-y_j),
    tx/ty = number of pairs tied in x / in y.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    m = x.shape[0]
    s = int(round(float((dx * dy).sum()))) // 2
    tx = (int((dx == 0).sum()) - m) // 2
    ty = (int((dy == 0).sum()) - m) // 2
    return s, tx, ty


def perm_concordance(matrix, perms, rows, cols, sign_a):
    """Concordance numerators for label-permuted RSM comparisons.

    For each permutation p, gathers the upper triangle of matrix[p][:, p]
    (entry q is matrix[p[rows[q]], p[cols[q]]]) and computes the pairwise
    sign-product sum against the fixed sign matrix of the reference triangle.
    Returns an int64 array of numerators, one per permutation.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    perms = np.asarray(perms, dtype=np.intp)
    sign_a = np.asarray(sign_a, dtype=np.int8)
    m = rows.shape[0]
    n_perm = perms.shape[0]
    out = np.empty(n_perm, dtype=np.int64)
    # Cell values only matter through their tie-preserving order, so gather
    # dense integer ranks (cheap int16 compares) instead of float64 values.
    # sign_a is antisymmetric, hence sum(sign_b * sign_a) over the full
    # matrix = 2 * sum((b_q > b_r) * sign_a), i.e. the > comparison alone
    # recovers the triangle sum S exactly, ties contributing zero.
    _, inverse = np.unique(matrix.ravel(), return_inverse=True)
    rank_dtype = np.int16 if inverse.max() < np.iinfo(np.int16).max else np.int32
    cell_rank = inverse.reshape(matrix.shape).astype(rank_dtype)
    chunk = max(1, int(1.6e7 // (m * m + 1)))
    for start in range(0, n_perm, chunk):
        p = perms[start:start + chunk]
        bt = cell_rank[p[:, rows], p[:, cols]]
        gt = bt[:, :, None] > bt[:, None, :]
        out[start:start + chunk] = np.einsum("kqr,qr->k", gt, sign_a,
                                             dtype=np.int32)
    return out
