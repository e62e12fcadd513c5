#!/usr/bin/env python3
"""Generate the bundled (3,6)-regular rate-1/2 LDPC code, n = 648, as an alist file.

Random socket matching, then edge swaps until the Tanner graph has no
parallel edges and no 4-cycles. Seeds are tried in order until H has full
rank; columns are then permuted so the last m columns are invertible, which
makes the codeword layout [message | parity].

Usage: make_ldpc.py <out.alist>
"""
import sys

import numpy as np

N, WC, WR = 648, 3, 6
M = N * WC // WR


def has_4cycle(rows):
    seen = set()
    for r in rows:
        cols = sorted(r)
        for a in range(len(cols)):
            for b in range(a + 1, len(cols)):
                if (cols[a], cols[b]) in seen:
                    return True
                seen.add((cols[a], cols[b]))
    return False


def bad_rows(rows):
    pairs = {}
    bad = set()
    for i, r in enumerate(rows):
        if len(set(r)) != len(r):
            bad.add(i)
        cols = sorted(set(r))
        for a in range(len(cols)):
            for b in range(a + 1, len(cols)):
                key = (cols[a], cols[b])
                if key in pairs:
                    bad.add(i)
                    bad.add(pairs[key])
                else:
                    pairs[key] = i
    return sorted(bad)


def build(seed):
    rng = np.random.default_rng(seed)
    sockets = np.repeat(np.arange(N), WC)
    rng.shuffle(sockets)
    rows = [list(sockets[i * WR:(i + 1) * WR]) for i in range(M)]
    for _ in range(200_000):
        bad = bad_rows(rows)
        if not bad:
            return rows
        i = bad[rng.integers(len(bad))]
        j = int(rng.integers(M))
        a, b = int(rng.integers(WR)), int(rng.integers(WR))
        rows[i][a], rows[j][b] = rows[j][b], rows[i][a]
    return None


def gf2_pivots(h):
    h = h.copy()
    pivots, r = [], 0
    for c in range(h.shape[1]):
        hits = np.nonzero(h[r:, c])[0]
        if len(hits) == 0:
            continue
        p = r + hits[0]
        h[[r, p]] = h[[p, r]]
        for rr in np.nonzero(h[:, c])[0]:
            if rr != r:
                h[rr] ^= h[r]
        pivots.append(c)
        r += 1
        if r == h.shape[0]:
            break
    return pivots


def main():
    out = sys.argv[1]
    for seed in range(1000):
        rows = build(seed)
        if rows is None:
            continue
        h = np.zeros((M, N), dtype=np.uint8)
        for i, r in enumerate(rows):
            h[i, r] = 1
        # pivot search from the right so parity lands in the last M columns
        piv = gf2_pivots(h[:, ::-1])
        if len(piv) < M:
            continue
        parity = sorted(N - 1 - c for c in piv)
        info = [c for c in range(N) if c not in set(parity)]
        h = h[:, info + parity]
        assert not has_4cycle([list(np.nonzero(row)[0]) for row in h])
        break
    write_alist(out, h)
    print("seed", seed)


def write_alist(path, h):
    m, n = h.shape
    col = [list(np.nonzero(h[:, j])[0] + 1) for j in range(n)]
    row = [list(np.nonzero(h[i])[0] + 1) for i in range(m)]
    with open(path, "w") as f:
        f.write(f"{n} {m}\n")
        f.write(f"{max(map(len, col))} {max(map(len, row))}\n")
        f.write(" ".join(str(len(c)) for c in col) + "\n")
        f.write(" ".join(str(len(r)) for r in row) + "\n")
        for c in col:
            f.write(" ".join(map(str, c)) + "\n")
        for r in row:
            f.write(" ".join(map(str, r)) + "\n")


if __name__ == "__main__":
    main()
