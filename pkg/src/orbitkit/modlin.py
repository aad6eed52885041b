"""Linear algebra over Z/p^K.

Subgroups of a finite module (Z/p^K)^d are handled through a Howell-style
normal form: an echelon generating set closed under the annihilator rows
p^t * row that a non-field modulus demands, so membership reduces to forward
row reduction.  Mixed-moduli groups Z/p^{k_1} x ... x Z/p^{k_d} embed into
(Z/p^K)^d, K = max k_i, by scaling coordinate i with p^(K - k_i).
"""

from __future__ import annotations


def _val(x: int, p: int, cap: int) -> int:
    if x == 0:
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def howell_form(rows, p: int, big: int) -> list[list[int]]:
    """Echelon generating rows of the span of ``rows`` in (Z/big)^d, big = p^K.

    Each returned row leads with a power of p, pivot columns strictly
    increase, and the annihilator closure property holds, so ``member`` is a
    complete test.
    """
    cap = _val(big, p, 10 ** 9)
    basis: list[list[int]] = []      # kept sorted by (pivot col, pivot valuation)
    work = [[x % big for x in r] for r in rows]

    def leading(row):
        for j, x in enumerate(row):
            if x:
                return j
        return None

    while work:
        row = work.pop()
        # forward-reduce against the basis wherever divisibility allows
        for b in basis:
            c = leading(b)
            if row[c]:
                vb = _val(b[c], p, cap)
                if _val(row[c], p, cap) >= vb:
                    f = row[c] // p ** vb
                    row = [(a - f * x) % big for a, x in zip(row, b)]
        c = leading(row)
        if c is None:
            continue
        v = _val(row[c], p, cap)
        inv = pow(row[c] // p ** v, -1, big)
        row = [(x * inv) % big for x in row]           # pivot becomes p^v
        clash = next((i for i, b in enumerate(basis)
                      if leading(b) == c and _val(b[c], p, cap) > v), None)
        if clash is not None:
            work.append(basis.pop(clash))
        basis.append(row)
        basis.sort(key=lambda b: (leading(b), _val(b[leading(b)], p, cap)))
        if v > 0:
            ann = [(x * p ** (cap - v)) % big for x in row]
            ann[c] = 0
            if any(ann):
                work.append(ann)
    # clear entries above each pivot where divisibility allows (determinism)
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            c = leading(basis[j])
            vj = _val(basis[j][c], p, cap)
            if basis[i][c] and _val(basis[i][c], p, cap) >= vj:
                f = basis[i][c] // p ** vj
                basis[i] = [(a - f * x) % big
                            for a, x in zip(basis[i], basis[j])]
    return basis


def member(vector, rows, p: int, big: int) -> bool:
    """Is the vector in the row span (rows must come from howell_form)?"""
    cap = _val(big, p, 10 ** 9)
    rem = [x % big for x in vector]
    for row in rows:
        c = next(j for j, x in enumerate(row) if x)
        if rem[c]:
            v = _val(row[c], p, cap)
            if _val(rem[c], p, cap) < v:
                return False
            f = rem[c] // p ** v
            rem = [(a - f * x) % big for a, x in zip(rem, row)]
    return not any(rem)


def span_equal(rows_a, rows_b, p: int, big: int) -> bool:
    ha = howell_form(rows_a, p, big)
    hb = howell_form(rows_b, p, big)
    return (all(member(r, hb, p, big) for r in ha)
            and all(member(r, ha, p, big) for r in hb))


def cyclic_basis(rows, p: int, big: int) -> list[list[int]]:
    """Basis rows realizing the cyclic decomposition of the span of ``rows``.

    Every pivot is chosen with globally minimal valuation over the rows not
    yet used, so each basis row consists entirely of entries with valuation
    >= its pivot's valuation v: its additive order is exactly p^(K-v), its
    p^(K-v)-fold multiple vanishes identically (no annihilator rows arise),
    and the span is the internal direct sum of the cyclic groups the rows
    generate.  Howell pivots do not give this (the span of (2,1) in (Z/4)^2
    is Z/4, not Z/2 x Z/2).  Rows come back sorted by pivot column.
    """
    cap = _val(big, p, 10 ** 9)
    work = [[x % big for x in r] for r in rows]
    n = len(work[0]) if work else 0
    free = set(range(len(work)))
    used_cols: set[int] = set()
    basis: list[tuple[int, list[int]]] = []   # (pivot col, row)
    while True:
        best = None
        for i in sorted(free):
            for c in range(n):
                if c not in used_cols and work[i][c]:
                    v = _val(work[i][c], p, cap)
                    if best is None or v < best[0]:
                        best = (v, i, c)
        if best is None:
            break
        v, i, c = best
        inv = pow(work[i][c] // p ** v, -1, big)
        work[i] = [(x * inv) % big for x in work[i]]    # pivot becomes p^v
        for i2 in free:
            if i2 != i and work[i2][c]:
                f = work[i2][c] // p ** v               # valuation >= v
                work[i2] = [(a - f * b) % big
                            for a, b in zip(work[i2], work[i])]
        free.remove(i)
        used_cols.add(c)
        basis.append((c, work[i]))
    return [row for _, row in sorted(basis, key=lambda t: t[0])]


def solve_mod(columns, target, p: int, big: int):
    """One solution c of sum_j c_j * columns[j] = target over Z/big, or None.

    Pivots are chosen globally by minimal valuation over the remaining
    submatrix (Smith style), after which back-substitution with free
    variables at zero is complete: whenever the system is solvable at all,
    every divisibility it needs goes through.  The result is verified by
    substitution before being returned.
    """
    n = len(target)
    m = len(columns)
    if m == 0:
        return [] if not any(x % big for x in target) else None
    cap = _val(big, p, 10 ** 9)
    aug = [[columns[j][i] % big for j in range(m)] + [target[i] % big]
           for i in range(n)]
    free_rows = set(range(n))
    free_cols = set(range(m))
    pivots: list[tuple[int, int, int]] = []   # (row, col, valuation), in order
    while True:
        best = None
        for i in sorted(free_rows):
            for c in sorted(free_cols):
                if aug[i][c]:
                    v = _val(aug[i][c], p, cap)
                    if best is None or v < best[0]:
                        best = (v, i, c)
        if best is None:
            break
        v, i, c = best
        inv = pow(aug[i][c] // p ** v, -1, big)
        aug[i] = [(x * inv) % big for x in aug[i]]      # pivot becomes p^v
        for i2 in free_rows:
            if i2 != i and aug[i2][c]:
                f = aug[i2][c] // p ** v                # valuation >= v
                aug[i2] = [(a - f * b) % big for a, b in zip(aug[i2], aug[i])]
        free_rows.remove(i)
        free_cols.remove(c)
        pivots.append((i, c, v))
    for i in free_rows:
        if aug[i][m] % big:
            return None
    sol = [0] * m
    for i, c, v in reversed(pivots):
        acc = aug[i][m] - sum(aug[i][c2] * sol[c2] for c2 in range(m) if c2 != c)
        if acc % p ** v:
            return None
        sol[c] = (acc // p ** v) % big
    for i in range(n):
        acc = sum(sol[j] * columns[j][i] for j in range(m))
        if (acc - target[i]) % big:
            return None
    return sol
