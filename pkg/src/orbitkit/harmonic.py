"""Pontryagin duality and harmonic analysis on a finite Lie ring.

The additive group of g = prod_i Z/p^{k_i} is self-dual: a character is an
exponent vector a with a_i in Z/p^{k_i}, pairing with x in g as
zeta^{sum_i a_i x_i p^{K-k_i}} where K = max k_i and zeta = exp(2 pi i/p^K).
Pairing exponents are computed exactly in Z/p^K; complex values appear only
at the boundary (transforms, inner products) in double precision, where
desk-scale group orders keep accumulated rounding far below tolerance.

Haar measure is normalized to total mass 1 on every domain.  Two
convolutions share that normalization: the additive law on g replaces
h^{-1} gamma with gamma - h, the group law on exp(g) with CH composition.
Transforms are plain O(n^2), blocked only to bound memory.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainMismatch
from .liering import FiniteLieRing, LazardGroup

ADDITIVE = "additive"
GROUP = "group"

DEFAULT_TOLERANCE = 1e-9

# cells per block in the O(n^2) transforms; bounds peak memory, not cost
_BLOCK_CELLS = 1 << 22
# pair cells per convolution block (CH batches hold several live arrays)
_CONV_CELLS = 1 << 18


def _lex_table(sizes):
    """All coordinate vectors, lexicographic with the leftmost digit slowest.

    Matches the element enumeration of LazardGroup, so ring-side and
    group-side functions index identically.
    """
    if not sizes:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(s, dtype=np.int64) for s in sizes],
                        indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def _ring_of(domain) -> FiniteLieRing:
    return domain.ring if isinstance(domain, LazardGroup) else domain


def _same_domain(a, b) -> bool:
    if isinstance(a, LazardGroup) != isinstance(b, LazardGroup):
        return False
    return _ring_of(a) is _ring_of(b)


def element_table(domain):
    """Lex-ordered coordinate rows of the domain's elements."""
    if isinstance(domain, LazardGroup):
        return domain.elements
    return _lex_table(domain.sizes)


class DualCharacter:
    """A character of (g, +), held as its exact exponent vector.

    The pairing with x is zeta^{sum_i a_i x_i p^{K-k_i}}; the exponent is
    reduced in Z/p^K before any complex value is formed, so products and
    equality of characters are exact.
    """

    __slots__ = ("ring", "exponents", "_weights")

    def __init__(self, ring: FiniteLieRing, exponents):
        exps = tuple(int(a) for a in exponents)
        if len(exps) != ring.rank:
            raise ValueError(f"expected {ring.rank} exponents")
        self.ring = ring
        self.exponents = tuple(a % s for a, s in zip(exps, ring.sizes))
        self._weights = np.array(
            [a * (ring.big // s) for a, s in zip(self.exponents, ring.sizes)],
            dtype=np.int64)

    def phase_on(self, X):
        """Pairing exponent(s) in Z/p^K for coordinate vector(s) X."""
        X = np.asarray(X, dtype=np.int64)
        return (X @ self._weights) % self.ring.big

    def values_on(self, X):
        phase = self.phase_on(X)
        return np.exp(2j * np.pi * phase / self.ring.big)

    def value(self, x) -> complex:
        return complex(self.values_on(x))

    def as_function(self, domain=None) -> "ClassFunction":
        """This character as a dense function on g (or, relabelled, on G)."""
        if domain is None:
            domain = self.ring
        if _ring_of(domain) is not self.ring:
            raise DomainMismatch("character and domain live on different rings")
        return ClassFunction(domain, self.values_on(element_table(domain)))

    def __eq__(self, other):
        return (isinstance(other, DualCharacter) and self.ring is other.ring
                and self.exponents == other.exponents)

    def __hash__(self):
        return hash(self.exponents)

    def __repr__(self):
        return f"DualCharacter{self.exponents}"


class DualSpace:
    """The full dual g* as an indexed exponent table.

    Row i is the exponent vector of the i-th character in lexicographic
    order, mirroring the element enumeration, so functions on g* are plain
    vectors aligned with these rows.  ``weights`` carries the rows
    pre-multiplied by p^{K-k_i}: pairing exponents are weights @ x mod p^K.
    """

    __slots__ = ("ring", "exponents", "weights", "_strides")

    def __init__(self, ring: FiniteLieRing):
        self.ring = ring
        self.exponents = _lex_table(ring.sizes)
        scale = np.array([ring.big // s for s in ring.sizes], dtype=np.int64)
        self.weights = self.exponents * scale
        strides = [1] * ring.rank
        for i in range(ring.rank - 2, -1, -1):
            strides[i] = strides[i + 1] * ring.sizes[i + 1]
        self._strides = np.array(strides, dtype=np.int64)

    def index_of(self, exponents) -> int:
        arr = np.asarray(exponents, dtype=np.int64) % self.ring._mods
        return int(arr @ self._strides) if self.ring.rank else 0

    def index_batch(self, A):
        A = np.mod(np.asarray(A, dtype=np.int64), self.ring._mods)
        if self.ring.rank == 0:
            return np.zeros(A.shape[:-1], dtype=np.int64)
        return A @ self._strides

    def character(self, index: int) -> DualCharacter:
        return DualCharacter(self.ring, tuple(int(a) for a in
                                              self.exponents[index]))

    def __len__(self):
        return len(self.exponents)

    def __repr__(self):
        return f"DualSpace(|g*|={len(self)}, ring={self.ring!r})"


def enumerate_dual(ring: FiniteLieRing):
    """All |g| characters of (g, +), lexicographic in exponents."""
    space = DualSpace(ring)
    return [space.character(i) for i in range(len(space))]


class ClassFunction:
    """Dense complex function on a ring g or a Lazard group G.

    Values are indexed by the shared lexicographic element enumeration.
    ``invariant`` is the caller's promise that the function is constant on
    Ad-orbits (ring domain) or conjugacy classes (group domain) to within
    ``tolerance``; consumers that need central functions check the flag.
    """

    __slots__ = ("domain", "values", "tolerance", "invariant")

    def __init__(self, domain, values, *, tolerance=DEFAULT_TOLERANCE,
                 invariant=False):
        vals = np.asarray(values, dtype=np.complex128)
        n = _ring_of(domain).order()
        if vals.shape != (n,):
            raise ValueError(f"expected {n} values, got shape {vals.shape}")
        self.domain = domain
        self.values = vals
        self.tolerance = float(tolerance)
        self.invariant = bool(invariant)

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        kind = "G" if isinstance(self.domain, LazardGroup) else "g"
        return (f"ClassFunction(|{kind}|={len(self)}, "
                f"invariant={self.invariant})")


class DualFunction:
    """Dense complex function on g*, indexed in DualSpace order."""

    __slots__ = ("ring", "values", "tolerance")

    def __init__(self, ring: FiniteLieRing, values, *,
                 tolerance=DEFAULT_TOLERANCE):
        vals = np.asarray(values, dtype=np.complex128)
        if vals.shape != (ring.order(),):
            raise ValueError(f"expected {ring.order()} values")
        self.ring = ring
        self.values = vals
        self.tolerance = float(tolerance)

    def support(self):
        """Indices where the value is nonzero beyond tolerance."""
        return np.nonzero(np.abs(self.values) > self.tolerance)[0]

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return f"DualFunction(|g*|={len(self)})"


def exp_star(f: ClassFunction, ring=None) -> ClassFunction:
    """Pull a group-side function back to the ring along exp.

    exp is the identity on coordinates, so this is a domain relabel; it is
    the operator that intertwines the two convolutions on invariant
    functions.
    """
    if not isinstance(f.domain, LazardGroup):
        raise DomainMismatch("exp_star expects a group-domain function")
    target = f.domain.ring if ring is None else ring
    if target is not f.domain.ring:
        raise DomainMismatch("ring is not the domain group's ring")
    return ClassFunction(target, f.values, tolerance=f.tolerance,
                         invariant=f.invariant)


def log_star(f: ClassFunction, group: LazardGroup) -> ClassFunction:
    """Push a ring-side function forward to the group along exp."""
    if isinstance(f.domain, LazardGroup):
        raise DomainMismatch("log_star expects a ring-domain function")
    if group.ring is not f.domain:
        raise DomainMismatch("group does not lie over the function's ring")
    return ClassFunction(group, f.values, tolerance=f.tolerance,
                         invariant=f.invariant)


def convolve(f1: ClassFunction, f2: ClassFunction, law: str) -> ClassFunction:
    """(f1 * f2)(c) = (1/n) sum_h f1(h) f2(h^{-1} c), mass-1 Haar.

    ``law`` picks the meaning of h^{-1} c: ``ADDITIVE`` uses c - h on the
    ring, ``GROUP`` uses CH composition and requires a group domain.  Cost
    is one O(n) translation per nonzero value of f1.
    """
    if not _same_domain(f1.domain, f2.domain):
        raise DomainMismatch("convolution needs a shared domain")
    if law not in (ADDITIVE, GROUP):
        raise ValueError(f"unknown law {law!r}")
    if law == GROUP and not isinstance(f1.domain, LazardGroup):
        raise DomainMismatch("GROUP law needs a LazardGroup domain")
    ring = _ring_of(f1.domain)
    elements = element_table(f1.domain)
    n = len(elements)
    d = ring.rank
    strides = [1] * d
    for i in range(d - 2, -1, -1):
        strides[i] = strides[i + 1] * ring.sizes[i + 1]
    strides = np.array(strides, dtype=np.int64)
    neg = np.mod(-elements, ring._mods) if d else elements

    out = np.zeros(n, dtype=np.complex128)
    step = max(1, _CONV_CELLS // n)
    for start in range(0, n, step):
        stop = min(n, start + step)
        coeffs = f1.values[start:stop]
        if not np.any(coeffs):
            continue
        if law == ADDITIVE:
            args = np.mod(elements[None, :, :] - elements[start:stop, None, :],
                          ring._mods)
        else:
            shape = (stop - start, n, d)
            args = ring.ch_batch(
                np.broadcast_to(neg[start:stop, None, :], shape),
                np.broadcast_to(elements[None, :, :], shape))
        if d:
            out += coeffs @ f2.values[args @ strides]
        else:
            out += coeffs * f2.values
    return ClassFunction(f1.domain, out / n,
                         tolerance=max(f1.tolerance, f2.tolerance),
                         invariant=f1.invariant and f2.invariant)


def fourier(f: ClassFunction) -> DualFunction:
    """(F f)(phi) = (1/|g|) sum_x f(x) conj(phi(x)), exact phases."""
    if isinstance(f.domain, LazardGroup):
        raise DomainMismatch("Fourier transform lives on the ring side; "
                             "pull back with exp_star first")
    ring = f.domain
    space = DualSpace(ring)
    X = space.exponents
    n = len(X)
    out = np.empty(n, dtype=np.complex128)
    step = max(1, _BLOCK_CELLS // n)
    for start in range(0, n, step):
        E = (space.weights[start:start + step] @ X.T) % ring.big
        out[start:start + step] = (
            np.exp(-2j * np.pi * E / ring.big) @ f.values) / n
    return DualFunction(ring, out, tolerance=f.tolerance)


def inverse_fourier(F: DualFunction) -> ClassFunction:
    """f(x) = sum_phi (F f)(phi) phi(x); counting measure on g*."""
    ring = F.ring
    space = DualSpace(ring)
    X = space.exponents
    n = len(X)
    out = np.empty(n, dtype=np.complex128)
    step = max(1, _BLOCK_CELLS // n)
    for start in range(0, n, step):
        E = (X[start:start + step] @ space.weights.T) % ring.big
        out[start:start + step] = np.exp(2j * np.pi * E / ring.big) @ F.values
    return ClassFunction(ring, out, tolerance=F.tolerance)


def inner(f1: ClassFunction, f2: ClassFunction) -> complex:
    """(1/n) sum f1 conj(f2) over the shared domain."""
    if not _same_domain(f1.domain, f2.domain):
        raise DomainMismatch("inner product needs a shared domain")
    return complex(np.vdot(f2.values, f1.values) / len(f1.values))


def dual_inner(F1: DualFunction, F2: DualFunction) -> complex:
    """sum F1 conj(F2) with counting measure, the Parseval partner of inner."""
    if F1.ring is not F2.ring:
        raise DomainMismatch("dual inner product needs a shared ring")
    return complex(np.vdot(F2.values, F1.values))
