"""Finite nilpotent Lie rings and the groups they carry under CH multiplication.

A ring lives on ⊕ᵢ Z/p^{kᵢ} with bracket structure constants given for basis
pairs i < j and extended antisymmetrically.  Validation covers primality,
well-definedness of the constants against the mixed moduli, the Jacobi
identity on basis triples, nilpotence, and membership in one of the two
regimes where CH multiplication makes the underlying set a group:

  * class < p: every CH coefficient that survives truncation has a p-unit
    denominator, so evaluation stays in canonical residues;
  * uniform: [g, g] ⊆ p·g (⊆ 4·g when p = 2) with structure constants that
    lift to an exact Lie ring over Z_(p).  Evaluation then runs at working
    precision p^(K+s) and divides each term's p-denominator out exactly.

Groups are the same coordinate vectors with CH as multiplication; exp and
log are identity maps on coordinates.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import numpy as np

from .errors import (AutomorphismCheckFailed, EvaluationNotIntegral,
                     JacobiViolation, PropertyFailed, RegimeViolation,
                     SubringNotClosed, WellDefinednessViolation)
from .freelie import DEGREE_CAP, _is_lyndon, bch, lyndon_words, vp
from .modlin import cyclic_basis, howell_form, solve_mod, span_equal


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _std_split(word):
    """Standard factorization of a Lyndon word of length >= 2."""
    for i in range(1, len(word)):
        if _is_lyndon(word[i:]):
            return word[:i], word[i:]
    raise ValueError(f"{word} is not a Lyndon word")


def _plan_steps(words):
    """Bracketing steps (word, left, right) for evaluating the given Lyndon
    words, children before parents."""
    steps = []
    seen = set()

    def visit(w):
        if len(w) == 1 or w in seen:
            return
        seen.add(w)
        left, right = _std_split(w)
        visit(left)
        visit(right)
        steps.append((w, left, right))

    for w in sorted(words, key=len):
        visit(w)
    return steps


def _poly_terms(poly):
    """LiePoly -> list of (lyndon word, Fraction coefficient)."""
    out = []
    for (degree, index), c in sorted(poly.terms.items()):
        if c.surd:
            raise ValueError("coefficient off Q(1): surd part in ring evaluation")
        out.append((lyndon_words(degree)[index], c.rat))
    return out


def _series_terms(series):
    out = []
    for n in sorted(series.components):
        out.extend(_poly_terms(series.components[n]))
    return out


def _fraction_constant(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"structure constant {c!r} is not an integer or Fraction")


class FiniteLieRing:
    """Validated finite nilpotent Lie ring; construct through make_ring."""

    __slots__ = ("p", "moduli", "rank", "label", "sizes", "big", "cap",
                 "constants", "class_", "uniform_depth", "ch_truncation",
                 "uniform", "_mods", "_tensor", "_lift_tensor", "_precision",
                 "_shift", "_ch_terms", "_plan_cache")

    def __init__(self, p, moduli, constants, tensor, class_, uniform_depth,
                 uniform, ch_truncation, lift_tensor, precision, shift, label):
        self.p = p
        self.moduli = tuple(moduli)
        self.rank = len(self.moduli)
        self.label = label
        self.sizes = tuple(p ** k for k in self.moduli)
        self.cap = max(self.moduli, default=0)
        self.big = p ** self.cap
        self.constants = constants
        self.class_ = class_
        self.uniform_depth = uniform_depth
        self.uniform = uniform
        self.ch_truncation = ch_truncation
        self._mods = np.array(self.sizes, dtype=np.int64)
        self._tensor = tensor
        self._lift_tensor = lift_tensor
        self._precision = precision
        self._shift = shift
        self._ch_terms = None
        self._plan_cache = {}

    # -- elements ------------------------------------------------------------

    def order(self) -> int:
        return math.prod(self.sizes)

    def element(self, coords):
        arr = np.asarray(coords, dtype=np.int64)
        if arr.shape != (self.rank,):
            raise ValueError(f"expected {self.rank} coordinates")
        return tuple(int(x) for x in arr % self._mods)

    def zero(self):
        return (0,) * self.rank

    def basis(self, i: int):
        e = [0] * self.rank
        e[i] = 1
        return tuple(e)

    def negate(self, u):
        return self.element([-x for x in u])

    def add(self, u, v):
        return self.element([a + b for a, b in zip(u, v)])

    def scale(self, u, t: int):
        return self.element([t * x for x in u])

    # -- bracket -------------------------------------------------------------

    def bracket_batch(self, U, V):
        U = np.asarray(U, dtype=np.int64)
        V = np.asarray(V, dtype=np.int64)
        out = np.einsum("...i,...j,ijm->...m", U, V, self._tensor)
        return np.mod(out, self._mods)

    def bracket(self, u, v):
        return tuple(int(x) for x in self.bracket_batch(u, v))

    def _lift_bracket_batch(self, U, V):
        out = np.einsum("...i,...j,ijm->...m", U, V, self._lift_tensor)
        return np.mod(out, self._precision)

    # -- CH multiplication ---------------------------------------------------

    def _ch_plan(self):
        if self._ch_terms is None:
            series = bch(self.ch_truncation)
            terms = []
            for n in range(1, self.ch_truncation + 1):
                terms.extend(_poly_terms(series.component(n)))
            self._ch_terms = terms
        return self._ch_terms

    def _steps_for(self, terms):
        key = tuple(w for w, _ in terms)
        if key not in self._plan_cache:
            self._plan_cache[key] = _plan_steps({w for w in key if len(w) > 1})
        return self._plan_cache[key]

    def _apply_fraction(self, vals, q: Fraction, lifted: bool):
        """vals * q with the p-part of the denominator divided out exactly."""
        p = self.p
        den = q.denominator
        a = 0
        while den % p == 0:
            den //= p
            a += 1
        if a:
            if lifted and a > self._shift:
                raise EvaluationNotIntegral(
                    f"coefficient {q} needs p^{a} beyond working precision")
            if np.any(vals % p ** a):
                raise EvaluationNotIntegral(
                    f"value not divisible by p^{a} for coefficient {q}")
            vals = vals // p ** a
        num = q.numerator
        if lifted:
            mult = num * pow(den, -1, self._precision) % self._precision
            return vals * mult % self._precision
        mults = np.array([num * pow(den, -1, m) % m for m in self.sizes],
                         dtype=np.int64)
        return vals * mults % self._mods

    def _eval_terms(self, terms, U, V):
        """Σ coeff · (bracketing word)(U, V) reduced to canonical coordinates.

        U, V: (..., rank) arrays.  Uses the lift tensor at working precision
        in the uniform regime, canonical per-coordinate residues otherwise.
        """
        U = np.asarray(U, dtype=np.int64)
        V = np.asarray(V, dtype=np.int64)
        lifted = self.uniform
        if lifted:
            red = lambda A: np.mod(A, self._precision)
            brk = self._lift_bracket_batch
        else:
            red = lambda A: np.mod(A, self._mods)
            brk = self.bracket_batch
        values = {(0,): red(U), (1,): red(V)}
        for w, left, right in self._steps_for(terms):
            values[w] = brk(values[left], values[right])
        out = np.zeros(np.broadcast(U, V).shape, dtype=np.int64)
        for w, q in terms:
            out = red(out + self._apply_fraction(values[w], q, lifted))
        return np.mod(out, self._mods)

    def ch_batch(self, U, V):
        if self.rank == 0:
            return np.zeros(np.broadcast(np.asarray(U), np.asarray(V)).shape,
                            dtype=np.int64)
        return self._eval_terms(self._ch_plan(), U, V)

    def ch_multiply(self, u, v):
        """Group product exp(u)·exp(v) in coordinates, Σ_n CH_n(u, v)."""
        return tuple(int(x) for x in self.ch_batch(u, v))

    def evaluate_poly_batch(self, poly, U, V):
        """A LiePoly in the free generators, evaluated at ring elements."""
        if self.rank == 0:
            return np.zeros(np.broadcast(np.asarray(U), np.asarray(V)).shape,
                            dtype=np.int64)
        return self._eval_terms(_poly_terms(poly), U, V)

    def evaluate_series_batch(self, series, U, V):
        if self.rank == 0:
            return np.zeros(np.broadcast(np.asarray(U), np.asarray(V)).shape,
                            dtype=np.int64)
        return self._eval_terms(_series_terms(series), U, V)

    # -- adjoint machinery ---------------------------------------------------

    def _exp_ad_limit(self) -> int:
        if self.uniform:
            return self.ch_truncation - 1
        return max(self.class_ - 1, 0)

    def exp_ad_batch(self, W, X):
        """e^(ad W) applied to X, both (..., rank) arrays."""
        W = np.asarray(W, dtype=np.int64)
        X = np.asarray(X, dtype=np.int64)
        if self.rank == 0:
            return X.copy()
        lifted = self.uniform
        if lifted:
            red = lambda A: np.mod(A, self._precision)
            brk = self._lift_bracket_batch
        else:
            red = lambda A: np.mod(A, self._mods)
            brk = self.bracket_batch
        cur = red(X)
        out = red(X)
        for k in range(1, self._exp_ad_limit() + 1):
            cur = brk(red(W), cur)
            out = red(out + self._apply_fraction(
                cur, Fraction(1, math.factorial(k)), lifted))
        return np.mod(out, self._mods)

    def ad_matrix(self, w):
        """Matrix of x ↦ [w, x]; row m is taken mod p^{k_m}."""
        w = np.asarray(w, dtype=np.int64)
        out = np.einsum("i,ijm->mj", w, self._tensor)
        return np.mod(out, self._mods[:, None])

    def exp_ad_matrix(self, w):
        """Matrix of the truncated exponential Σ (ad w)^k / k!."""
        d = self.rank
        if d == 0:
            return np.zeros((0, 0), dtype=np.int64)
        lifted = self.uniform
        if lifted:
            adm = np.mod(np.einsum("i,ijm->mj", np.asarray(w, dtype=np.int64),
                                   self._lift_tensor), self._precision)
            red = lambda A: np.mod(A, self._precision)
        else:
            adm = self.ad_matrix(w)
            red = lambda A: np.mod(A, self._mods[:, None])
        out = red(np.eye(d, dtype=np.int64))
        cur = red(np.eye(d, dtype=np.int64))
        for k in range(1, self._exp_ad_limit() + 1):
            cur = red(adm @ cur)
            q = Fraction(1, math.factorial(k))
            if lifted:
                term = self._apply_fraction(cur, q, True)
            else:
                term = self._apply_fraction(cur.T, q, False).T
            out = red(out + term)
        return np.mod(out, self._mods[:, None])

    # -- misc ----------------------------------------------------------------

    def embed(self, coords):
        """Image of an element in (Z/p^cap)^rank, coordinate i scaled by
        p^(cap - k_i); subgroup computations happen there."""
        return [int(c) * self.p ** (self.cap - k) % self.big
                for c, k in zip(coords, self.moduli)]

    def unembed(self, row):
        return tuple(int(x) // self.p ** (self.cap - k)
                     for x, k in zip(row, self.moduli))

    def describe(self) -> dict:
        return {"p": self.p, "moduli": list(self.moduli),
                "order": self.order(), "class": self.class_,
                "uniform_depth": self.uniform_depth,
                "regime": "uniform" if self.uniform else "class<p",
                "label": self.label}

    def __repr__(self):
        tag = self.label or f"p={self.p},moduli={list(self.moduli)}"
        return f"FiniteLieRing({tag}, class={self.class_})"


def _signed_tensor(rank, sizes, constants, dtype=np.int64):
    T = np.zeros((rank, rank, rank), dtype=dtype)
    for (i, j), row in constants.items():
        for m, c in row.items():
            T[i, j, m] = c
            T[j, i, m] = -c
    return T


def _jacobi_defects(rank, tensor, reduce_fn):
    """Yield (triple, defect vector) for basis triples violating Jacobi."""
    for i, j, l in itertools.combinations(range(rank), 3):
        total = None
        for a, b, c in ((i, j, l), (j, l, i), (l, i, j)):
            inner = tensor[a, b]                        # [e_a, e_b]
            outer = inner @ tensor[:, c, :]             # [[e_a, e_b], e_c]
            total = outer if total is None else total + outer
        defect = reduce_fn(total)
        if np.any(defect):
            yield (i, j, l), defect


def _lower_central_class(ring_rank, p, big, moduli, tensor, mods):
    """Nilpotence class from the lower central series, via Howell spans of the
    embedded subgroups.  Returns math.inf when the series stalls above zero."""
    if ring_rank == 0:
        return 0
    scale = np.array([p ** (max(moduli) - k) for k in moduli], dtype=np.int64)

    def emb(rows):
        return [[int(x) for x in (np.asarray(r) * scale) % big] for r in rows]

    def brackets_with_basis(rows):
        out = []
        for r in rows:
            vals = np.einsum("i,ijm->jm", np.asarray(r, dtype=np.int64), tensor)
            for j in range(ring_rank):
                out.append([int(x) for x in np.mod(vals[j], mods)])
        return out

    basis_rows = [list(r) for r in np.eye(ring_rank, dtype=np.int64)]
    gamma = howell_form(emb(brackets_with_basis(basis_rows)), p, big)
    cls = 1
    while gamma:
        unembedded = [[int(x) // int(s) for x, s in zip(row, scale)]
                      for row in gamma]
        nxt = howell_form(emb(brackets_with_basis(unembedded)), p, big)
        if nxt and span_equal(nxt, gamma, p, big):
            return math.inf
        gamma = nxt
        cls += 1
    return cls


def make_ring(p, moduli, brackets, *, lifts=None, label=None) -> FiniteLieRing:
    """Build and fully validate a finite nilpotent Lie ring.

    brackets: {(i, j): {m: int}} with 0-based i < j; constants are read mod
    p^{k_m}.  lifts optionally gives exact p-integral rational representatives
    of the same constants; the uniform evaluation path needs them whenever the
    canonical integers do not already satisfy Jacobi exactly over Z.
    """
    if not _is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    moduli = tuple(int(k) for k in moduli)
    if any(k < 1 for k in moduli):
        raise ValueError("moduli must be positive exponents")
    rank = len(moduli)
    sizes = [p ** k for k in moduli]

    constants: dict = {}
    for key, row in brackets.items():
        i, j = key
        if not (0 <= i < j < rank):
            raise ValueError(f"bracket key {key} is not 0 <= i < j < rank")
        clean = {}
        for m, c in row.items():
            if not 0 <= m < rank:
                raise ValueError(f"bracket target index {m} out of range")
            c = int(c) % sizes[m]
            if c:
                clean[m] = c
        if clean:
            constants[(i, j)] = clean

    for (i, j), row in constants.items():
        for m, c in row.items():
            if c * p ** min(moduli[i], moduli[j]) % sizes[m]:
                raise WellDefinednessViolation(
                    f"p^min(k{i},k{j}) * c[{i},{j}]^{m} = "
                    f"{c * p ** min(moduli[i], moduli[j])} != 0 mod p^{moduli[m]}")

    mods = np.array(sizes, dtype=np.int64)
    tensor = _signed_tensor(rank, sizes, constants)
    for triple, defect in _jacobi_defects(rank, tensor,
                                          lambda t: np.mod(t, mods)):
        raise JacobiViolation(
            f"basis triple {triple}: Jacobi sum {list(defect)} != 0")

    big = p ** max(moduli, default=0)
    class_ = _lower_central_class(rank, p, big, moduli, tensor, mods)

    if constants:
        depth = int(min(vp(int(c), p) for row in constants.values()
                        for c in row.values()))
    else:
        depth = max(moduli, default=0)

    need_depth = 1 if p >= 3 else 2
    uniform = False
    if not class_ < p:
        if depth < need_depth:
            raise RegimeViolation(
                f"class {class_} >= p = {p} and uniform depth {depth} < "
                f"{need_depth}: not an admissible ring")
        uniform = True

    lift_tensor = precision = None
    shift = 0
    if uniform:
        lift_frac = {}
        for key, row in constants.items():
            given = (lifts or {}).get(key, {})
            lift_row = {}
            for m, c in row.items():
                q = _fraction_constant(given.get(m, c))
                if q.denominator % p == 0:
                    raise RegimeViolation(f"lift {q} for {key}->{m} is not p-integral")
                if vp(q - c, p) < moduli[m]:
                    raise RegimeViolation(
                        f"lift {q} for {key}->{m} is not congruent to {c}")
                lift_row[m] = q
            lift_frac[key] = lift_row
        nonzero = [q for row in lift_frac.values() for q in row.values() if q]
        depth_eval = min((vp(q, p) for q in nonzero), default=max(moduli))
        if depth_eval < need_depth:
            raise RegimeViolation(
                f"lifted constants have p-valuation {depth_eval} < {need_depth}")
        frac_tensor = [[[Fraction(0)] * rank for _ in range(rank)]
                       for _ in range(rank)]
        for (i, j), row in lift_frac.items():
            for m, q in row.items():
                frac_tensor[i][j][m] = q
                frac_tensor[j][i][m] = -q
        for i, j, l in itertools.combinations(range(rank), 3):
            for m in range(rank):
                total = Fraction(0)
                for a, b, c in ((i, j, l), (j, l, i), (l, i, j)):
                    for t in range(rank):
                        total += frac_tensor[a][b][t] * frac_tensor[t][c][m]
                if total:
                    raise RegimeViolation(
                        f"constants do not lift to an exact Lie ring: Jacobi "
                        f"defect {total} at triple {(i, j, l)} coordinate {m}")
        cap = max(moduli)
        gap = Fraction(depth_eval) - Fraction(1, p - 1)
        n_trunc = max(1, -(-cap // gap))        # ceil(cap / gap)
        if n_trunc > DEGREE_CAP:
            raise RegimeViolation(
                f"uniform truncation degree {n_trunc} exceeds cap {DEGREE_CAP}")
        series = bch(int(n_trunc))
        shift = 0
        for n in range(2, int(n_trunc) + 1):
            for c in series.component(n).terms.values():
                shift = max(shift, -min(0, int(c.valuation(p))))
        for k in range(2, int(n_trunc)):
            shift = max(shift, int(vp(math.factorial(k), p)))
        precision = p ** (cap + shift)
        lift_tensor = np.zeros((rank, rank, rank), dtype=np.int64)
        for (i, j), row in lift_frac.items():
            for m, q in row.items():
                rep = q.numerator * pow(q.denominator, -1, precision) % precision
                lift_tensor[i, j, m] = rep
                lift_tensor[j, i, m] = -rep
        truncation = int(n_trunc)
    else:
        truncation = max(int(class_), 1) if rank else 1

    return FiniteLieRing(p, moduli, constants, tensor, class_, depth, uniform,
                         truncation, lift_tensor, precision, shift, label)


def uniform_quotient(p, rank, constants, r, *, label=None) -> FiniteLieRing:
    """g/p^r·g for a uniform Z_p Lie algebra given by exact rational constants.

    Uniformity demands every constant divisible by p (by 4 when p = 2); the
    constants must satisfy Jacobi exactly.  The result has all moduli equal
    to r and carries the exact constants as its evaluation lifts.
    """
    if not _is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    if r < 1:
        raise ValueError("r must be >= 1")
    need = 1 if p >= 3 else 2
    lift = {}
    for key, row in constants.items():
        i, j = key
        if not (0 <= i < j < rank):
            raise ValueError(f"bracket key {key} is not 0 <= i < j < rank")
        clean = {}
        for m, c in row.items():
            q = _fraction_constant(c)
            if not q:
                continue
            if q.denominator % p == 0:
                raise RegimeViolation(f"constant {q} for {key}->{m} is not p-integral")
            if vp(q, p) < need:
                raise RegimeViolation(
                    f"constant {q} for {key}->{m} has p-valuation < {need}: "
                    f"[g,g] is not inside {p ** need}·g")
            clean[m] = q
        if clean:
            lift[key] = clean

    frac_tensor = [[[Fraction(0)] * rank for _ in range(rank)]
                   for _ in range(rank)]
    for (i, j), row in lift.items():
        for m, q in row.items():
            frac_tensor[i][j][m] = q
            frac_tensor[j][i][m] = -q
    for i, j, l in itertools.combinations(range(rank), 3):
        for m in range(rank):
            total = Fraction(0)
            for a, b, c in ((i, j, l), (j, l, i), (l, i, j)):
                for t in range(rank):
                    total += frac_tensor[a][b][t] * frac_tensor[t][c][m]
            if total:
                raise JacobiViolation(
                    f"Jacobi defect {total} at triple {(i, j, l)} coordinate {m}")

    big = p ** r
    residues = {key: {m: q.numerator * pow(q.denominator, -1, big) % big
                      for m, q in row.items()}
                for key, row in lift.items()}
    ring = make_ring(p, (r,) * rank, residues, lifts=lift, label=label)
    assert ring.uniform_depth >= need or ring.class_ < p
    return ring


# -- the group -----------------------------------------------------------------

class LazardGroup:
    """exp(g) as coordinate vectors with CH multiplication; dense lexicographic
    element enumeration for function storage."""

    __slots__ = ("ring", "size", "elements", "_strides")

    def __init__(self, ring: FiniteLieRing):
        self.ring = ring
        self.size = ring.order()
        if ring.rank:
            grids = np.meshgrid(*[np.arange(s, dtype=np.int64)
                                  for s in ring.sizes], indexing="ij")
            self.elements = np.stack([g.reshape(-1) for g in grids], axis=1)
        else:
            self.elements = np.zeros((1, 0), dtype=np.int64)
        strides = [1] * ring.rank
        for i in range(ring.rank - 2, -1, -1):
            strides[i] = strides[i + 1] * ring.sizes[i + 1]
        self._strides = np.array(strides, dtype=np.int64)

    def index_of(self, coords) -> int:
        arr = np.asarray(coords, dtype=np.int64) % self.ring._mods
        return int(arr @ self._strides) if self.ring.rank else 0

    def index_batch(self, X):
        X = np.mod(np.asarray(X, dtype=np.int64), self.ring._mods)
        if self.ring.rank == 0:
            return np.zeros(X.shape[:-1], dtype=np.int64)
        return X @ self._strides

    def coords_of(self, index: int):
        return tuple(int(x) for x in self.elements[index])

    @property
    def identity(self):
        return self.ring.zero()

    def multiply(self, u, v):
        return self.ring.ch_multiply(u, v)

    def inverse(self, u):
        return self.ring.negate(u)

    def conjugate(self, g, x):
        gx = self.ring.ch_multiply(g, x)
        return self.ring.ch_multiply(gx, self.ring.negate(g))

    def multiply_batch(self, U, V):
        return self.ring.ch_batch(U, V)

    def conjugate_batch(self, g, X):
        g = np.asarray(g, dtype=np.int64)
        GX = self.ring.ch_batch(np.broadcast_to(g, np.shape(X)), X)
        neg = np.mod(-g, self.ring._mods)
        return self.ring.ch_batch(GX, np.broadcast_to(neg, GX.shape))

    def __len__(self):
        return self.size

    def __repr__(self):
        return f"LazardGroup(|G|={self.size}, ring={self.ring!r})"


def check_group_axioms(group: LazardGroup, rng=None, *, assoc_limit=130,
                       trials=10_000) -> dict:
    """Identity and inverses on every element; associativity on all triples
    up to assoc_limit elements, on seeded random triples above."""
    ring = group.ring
    E = group.elements
    n = group.size
    zero = np.zeros_like(E)
    ok_identity = (np.array_equal(ring.ch_batch(E, zero), E)
                   and np.array_equal(ring.ch_batch(zero, E), E))
    neg = np.mod(-E, ring._mods) if ring.rank else E
    ok_inverse = (not ring.rank) or (
        not np.any(ring.ch_batch(E, neg)) and not np.any(ring.ch_batch(neg, E)))
    if n <= assoc_limit:
        idx = np.arange(n)
        ia, ib, ic = np.meshgrid(idx, idx, idx, indexing="ij")
        A, B, C = E[ia.ravel()], E[ib.ravel()], E[ic.ravel()]
        mode, count = "exhaustive", n ** 3
    else:
        rng = rng or random.Random(0)
        pick = np.array([[rng.randrange(n) for _ in range(3)]
                         for _ in range(trials)])
        A, B, C = E[pick[:, 0]], E[pick[:, 1]], E[pick[:, 2]]
        mode, count = "sampled", trials
    left = ring.ch_batch(ring.ch_batch(A, B), C)
    right = ring.ch_batch(A, ring.ch_batch(B, C))
    ok_assoc = np.array_equal(left, right)
    return {"identity": bool(ok_identity), "inverse": bool(ok_inverse),
            "associativity": bool(ok_assoc), "mode": mode, "triples": count}


# -- adjoint action --------------------------------------------------------------

class AdMap:
    """The additive automorphism x ↦ log(e^g · e^x · e^(-g)) as a matrix;
    row m of the matrix is a residue mod p^{k_m}."""

    __slots__ = ("ring", "element", "matrix")

    def __init__(self, ring, element, matrix):
        self.ring = ring
        self.element = tuple(element)
        self.matrix = matrix

    def apply(self, x):
        return tuple(int(v) for v in self.apply_batch(np.asarray(x)))

    def apply_batch(self, X):
        X = np.asarray(X, dtype=np.int64)
        return np.mod(X @ self.matrix.T, self.ring._mods)

    def __repr__(self):
        return f"AdMap(g={self.element})"


def ad_action(ring: FiniteLieRing, g_elt, rng=None) -> AdMap:
    """Ad(e^g) with its certificate: the conjugation columns must agree with
    the truncated e^(ad g), behave additively, invert against Ad(e^-g), and
    respect the bracket on basis pairs."""
    g = ring.element(g_elt)
    d = ring.rank
    neg_g = ring.negate(g)
    cols = np.zeros((d, d), dtype=np.int64)
    for j in range(d):
        gx = ring.ch_multiply(g, ring.basis(j))
        cols[:, j] = ring.ch_multiply(gx, neg_g)
    expm = ring.exp_ad_matrix(g)
    if not np.array_equal(cols, expm):
        raise AutomorphismCheckFailed(
            f"conjugation by e^{g} disagrees with exp(ad {g})")
    inv_cols = np.zeros((d, d), dtype=np.int64)
    for j in range(d):
        gx = ring.ch_multiply(neg_g, ring.basis(j))
        inv_cols[:, j] = ring.ch_multiply(gx, g)
    prod = np.mod(cols @ inv_cols, ring._mods[:, None])
    if not np.array_equal(prod, np.mod(np.eye(d, dtype=np.int64),
                                       ring._mods[:, None])):
        raise AutomorphismCheckFailed(f"Ad(e^{g}) is not inverted by Ad(e^-{g})")
    amap = AdMap(ring, g, cols)
    for i in range(d):
        ei = amap.apply(ring.basis(i))
        for j in range(i + 1, d):
            lhs = amap.apply(ring.bracket(ring.basis(i), ring.basis(j)))
            rhs = ring.bracket(ei, amap.apply(ring.basis(j)))
            if lhs != rhs:
                raise AutomorphismCheckFailed(
                    f"Ad(e^{g}) breaks the bracket on basis pair ({i}, {j})")
    rng = rng or random.Random(0)
    for _ in range(10):
        x = ring.element([rng.randrange(s) for s in ring.sizes])
        y = ring.element([rng.randrange(s) for s in ring.sizes])
        gx = ring.ch_multiply(g, ring.add(x, y))
        conj = ring.ch_multiply(gx, neg_g)
        if conj != ring.add(amap.apply(x), amap.apply(y)):
            raise AutomorphismCheckFailed(
                f"conjugation by e^{g} is not additive at {x}, {y}")
    return amap


# -- the twist certificate --------------------------------------------------------

class TwistReport:
    """Outcome of checking (x,y) ↦ (e^(ad φ)x, e^(ad ψ)y) over a domain."""

    __slots__ = ("sum_identity", "bijective", "conjugate", "pairs_checked",
                 "mode")

    def __init__(self, sum_identity, bijective, conjugate, pairs_checked, mode):
        self.sum_identity = sum_identity
        self.bijective = bijective
        self.conjugate = conjugate
        self.pairs_checked = pairs_checked
        self.mode = mode

    def all_passed(self) -> bool:
        return self.sum_identity and self.bijective and self.conjugate

    def __repr__(self):
        return (f"TwistReport(sum={self.sum_identity}, bij={self.bijective}, "
                f"conj={self.conjugate}, pairs={self.pairs_checked}, "
                f"{self.mode})")


def twist_map(ring: FiniteLieRing, pair, *, rng=None, pair_budget=2_000_000,
              sample=10_000) -> TwistReport:
    """Certify x̃ + ỹ = CH(x, y) with x̃ = e^(ad φ(x,y))x, ỹ = e^(ad ψ(x,y))y,
    that (x,y) ↦ (x̃,ỹ) is injective on the checked domain, and that x̃, ỹ are
    genuine conjugates of x, y.  Exhaustive when |g|² fits the budget."""
    if pair.certified_to < ring.class_:
        raise ValueError(
            f"pair certified to degree {pair.certified_to} < class {ring.class_}")
    phi, psi = pair.back_substituted()
    group = LazardGroup(ring)
    n = group.size
    exhaustive = n * n <= pair_budget
    if exhaustive:
        ia = np.repeat(np.arange(n), n)
        ib = np.tile(np.arange(n), n)
        mode = "exhaustive"
    else:
        rng = rng or random.Random(0)
        seen = {(rng.randrange(n), rng.randrange(n)) for _ in range(sample)}
        pairs = sorted(seen)
        ia = np.array([a for a, _ in pairs])
        ib = np.array([b for _, b in pairs])
        mode = "sampled"
    U, V = group.elements[ia], group.elements[ib]

    phi_vals = ring.evaluate_series_batch(phi, U, V)
    psi_vals = ring.evaluate_series_batch(psi, U, V)
    xt = ring.exp_ad_batch(phi_vals, U)
    yt = ring.exp_ad_batch(psi_vals, V)

    total = ring.ch_batch(U, V)
    bad = np.nonzero(np.any(np.mod(xt + yt, ring._mods) != total, axis=-1))[0]
    if bad.size:
        b = int(bad[0])
        raise PropertyFailed(
            f"x̃ + ỹ != CH(x, y) at x={tuple(U[b])}, y={tuple(V[b])}")

    for W, X, T, tag in ((phi_vals, U, xt, "x"), (psi_vals, V, yt, "y")):
        WX = ring.ch_batch(W, X)
        conj = ring.ch_batch(WX, np.mod(-W, ring._mods))
        bad = np.nonzero(np.any(conj != T, axis=-1))[0]
        if bad.size:
            b = int(bad[0])
            raise PropertyFailed(
                f"{tag}-twist is not the conjugation by exp of its own series "
                f"at x={tuple(U[b])}, y={tuple(V[b])}")

    codes = group.index_batch(xt) * n + group.index_batch(yt)
    distinct = np.unique(codes).size
    if distinct != len(codes):
        raise PropertyFailed(
            f"twist map collides: {len(codes) - distinct} duplicate images")

    return TwistReport(True, True, True, len(codes), mode)


# -- subrings ---------------------------------------------------------------------

class Subring:
    """Bracket-closed additive subgroup with its induced FiniteLieRing.

    The additive span of the generators is kept as a Howell basis of the
    embedded copy inside (Z/p^cap)^rank; each basis row contributes a cyclic
    factor whose order is read off the pivot."""

    __slots__ = ("ring", "basis_coords", "orders", "induced", "_rows", "label")

    def __init__(self, ring: FiniteLieRing, generators, *, label=None):
        self.ring = ring
        self.label = label
        p, big = ring.p, ring.big
        rows = [ring.embed(ring.element(gen)) for gen in generators]
        # basis realizing the cyclic decomposition: coordinates mod the row
        # orders form a group isomorphism, which Howell pivots cannot promise
        self._rows = cyclic_basis(rows, p, big) if rows else []
        self.basis_coords = [ring.unembed(r) for r in self._rows]
        caps = []
        for r in self._rows:
            v = min(int(vp(x, p)) for x in r if x)
            caps.append(ring.cap - v)
        self.orders = tuple(caps)

        consts: dict = {}
        for i in range(len(self.basis_coords)):
            for j in range(i + 1, len(self.basis_coords)):
                val = ring.bracket(self.basis_coords[i], self.basis_coords[j])
                sol = solve_mod(self._rows, ring.embed(val), p, big)
                if sol is None:
                    raise SubringNotClosed(
                        f"[b_{i}, b_{j}] = {val} is outside the span")
                row = {}
                for m, c in enumerate(sol):
                    c = c % p ** self.orders[m]
                    if c:
                        row[m] = c
                if row:
                    consts[(i, j)] = row
        self.induced = make_ring(p, self.orders, consts,
                                 label=f"{label or 'subring'}[induced]")

    def contains(self, x) -> bool:
        if not self._rows:
            return not any(self.ring.element(x))
        return solve_mod(self._rows, self.ring.embed(self.ring.element(x)),
                         self.ring.p, self.ring.big) is not None

    def express(self, x):
        """Coordinates of x in the subring basis (canonical mod the orders)."""
        if not self._rows:
            if any(self.ring.element(x)):
                raise ValueError(f"{x} is not in the trivial subring")
            return ()
        sol = solve_mod(self._rows, self.ring.embed(self.ring.element(x)),
                        self.ring.p, self.ring.big)
        if sol is None:
            raise ValueError(f"{x} is not in the subring")
        return tuple(c % self.ring.p ** k for c, k in zip(sol, self.orders))

    def embed_coords(self, coords):
        """Subring coordinates -> ambient ring element."""
        out = self.ring.zero()
        for c, b in zip(coords, self.basis_coords):
            out = self.ring.add(out, self.ring.scale(b, int(c)))
        return out

    def scaled(self, alpha: int) -> "Subring":
        return Subring(self.ring,
                       [self.ring.scale(b, alpha) for b in self.basis_coords],
                       label=f"{alpha}*({self.label or 'subring'})")

    def restrict_dual(self, exponents):
        """Restriction of a dual character of g (given by its exponent vector)
        to a character of the subring in its own basis."""
        ring = self.ring
        out = []
        for b, kappa in zip(self.basis_coords, self.orders):
            e_val = sum(int(a) * int(c) * ring.p ** (ring.cap - k)
                        for a, c, k in zip(exponents, b, ring.moduli)) % ring.big
            div = ring.p ** (ring.cap - kappa)
            if e_val % div:
                raise ValueError("character does not restrict: order mismatch")
            out.append(e_val // div % ring.p ** kappa)
        return tuple(out)

    def __repr__(self):
        return (f"Subring(rank={len(self.basis_coords)}, "
                f"orders={self.orders}, of={self.ring!r})")
