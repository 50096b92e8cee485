"""Pure-Python fallback for the compiled kernels in ``_ckernels.pyx``.

Loop order and accumulation order match the compiled version exactly.
"""
import numpy as np

BACKEND = "python"


def score_rows(indptr, indices, weights, denom, mode, lo, hi):
    indptr = indptr.tolist()
    indices = indices.tolist()
    weights = weights.tolist()
    denom = denom.tolist()
    rows, cols, vals = [], [], []
    for x in range(lo, hi):
        a0, a1 = indptr[x], indptr[x + 1]
        adj = set(indices[a0:a1])
        adj.add(x)
        acc = {}
        for a in range(a0, a1):
            z = indices[a]
            wxz = weights[a]
            dz = denom[z]
            for b in range(indptr[z], indptr[z + 1]):
                y = indices[b]
                if y <= x or y in adj:
                    continue
                if mode == 0:
                    c = 1.0 / dz
                elif mode == 1:
                    c = (wxz + weights[b]) / dz
                else:
                    c = wxz * weights[b] / dz
                acc[y] = acc.get(y, 0.0) + c
        for y in sorted(acc):
            s = acc[y]
            if s > 0.0:
                rows.append(x)
                cols.append(y)
                vals.append(s)
    return (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
            np.array(vals, dtype=np.float64))


def triangle_sums(indptr, indices, weights):
    indptr = indptr.tolist()
    indices = indices.tolist()
    weights = weights.tolist()
    n = len(indptr) - 1
    tri_u = [0.0] * n
    tri_w = [0.0] * n
    for i in range(n):
        a0, a1 = indptr[i], indptr[i + 1]
        wi = dict(zip(indices[a0:a1], weights[a0:a1]))
        cu = 0.0
        cw = 0.0
        for a in range(a0, a1):
            j = indices[a]
            w_ij = weights[a]
            for b in range(indptr[j], indptr[j + 1]):
                w_ki = wi.get(indices[b])
                if w_ki is not None:
                    cu += 1.0
                    cw += w_ij * weights[b] * w_ki
        tri_u[i] = cu
        tri_w[i] = cw
    return np.array(tri_u), np.array(tri_w)
