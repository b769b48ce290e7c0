"""Pure numpy versions of the transfer kernels."""
import numpy as np


def _move_blocks(n, src, dst, w, mv, nmoves):
    """Dense weight matrix per move class."""
    blocks = np.zeros((nmoves, n, n))
    np.add.at(blocks, (mv, src, dst), w)
    return blocks


def pull_step(inp, src, dst, w, mv, movemap):
    """out[src, j] = sum_t w_t * inp[dst_t, movemap[mv_t, j]] (terms with index -1 dropped)."""
    n, nb = inp.shape
    out = np.zeros_like(inp)
    pad = np.concatenate([inp, np.zeros((n, 1))], axis=1)   # column nb reads as zero
    blocks = _move_blocks(n, src, dst, w, mv, movemap.shape[0])
    for m in range(movemap.shape[0]):
        if not blocks[m].any():
            continue
        cols = np.where(movemap[m] >= 0, movemap[m], nb)
        out += blocks[m] @ pad[:, cols]
    return out


def push_step(inp, src, dst, w, mv, movemap):
    """out[dst_t, movemap[mv_t, j]] += w_t * inp[src_t, j] (targets outside the ball dropped)."""
    n, nb = inp.shape
    out = np.zeros_like(inp)
    blocks = _move_blocks(n, src, dst, w, mv, movemap.shape[0])
    for m in range(movemap.shape[0]):
        if not blocks[m].any():
            continue
        # left multiplication is injective, so the targets are distinct
        ok = movemap[m] >= 0
        out[:, movemap[m][ok]] += (blocks[m].T @ inp)[:, ok]
    return out


def bfs_levels(n, nb, src, dst, mv, movemap, start_state, start_index, max_depth):
    """Shortest admissible path lengths from one extended state, -1 when unreached."""
    dist = np.full((n, nb), -1, dtype=np.int32)
    dist[start_state, start_index] = 0
    frontier = np.zeros((n, nb), dtype=bool)
    frontier[start_state, start_index] = True
    for d in range(1, max_depth + 1):
        nxt = np.zeros((n, nb), dtype=bool)
        for t in range(len(src)):
            row = frontier[src[t]]
            if not row.any():
                continue
            js = np.flatnonzero(row)
            tgt = movemap[mv[t], js]
            tgt = tgt[tgt >= 0]
            nxt[dst[t], tgt] = True
        nxt &= dist < 0
        if not nxt.any():
            break
        dist[nxt] = d
        frontier = nxt
    return dist
