"""Finite groups, their irreducible representations and Fourier transforms.

Three families are supported: finite Abelian groups written as products of
cyclic groups, dihedral groups D_n of order 2n, and the Heisenberg group over
F_p.  Every group has a dense encoding of its elements as indices
0..|G|-1, and all heavy lifting is done on index arrays.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, ResourceError

MAX_SUBGROUP_ENUM = 10**4
MAX_DENSE = 10**4

Element = Tuple[int, ...]


class FiniteGroup:
    """Common interface.  Subclasses provide the index arithmetic."""

    kind = "abstract"

    def __init__(self, order: int):
        self.order = order

    # encoding
    def index(self, g: Element) -> int:
        raise NotImplementedError

    def element(self, i: int) -> Element:
        raise NotImplementedError

    def mul_idx(self, i, j):
        """Vectorised product on index arrays."""
        raise NotImplementedError

    def inv_idx(self, i):
        raise NotImplementedError

    def generators(self) -> List[Element]:
        raise NotImplementedError

    def _irreps(self) -> List["Irrep"]:
        raise NotImplementedError

    is_abelian = False

    # derived helpers
    @cached_property
    def elements(self) -> List[Element]:
        return [self.element(i) for i in range(self.order)]

    @property
    def identity(self) -> Element:
        return self.element(0)

    def contains(self, g) -> bool:
        try:
            self.index(g)
        except (DomainError, TypeError, ValueError):
            return False
        return True

    def mul(self, g: Element, h: Element) -> Element:
        return self.element(int(self.mul_idx(self.index(g), self.index(h))))

    def inv(self, g: Element) -> Element:
        return self.element(int(self.inv_idx(self.index(g))))

    def power(self, g: Element, k: int) -> Element:
        gi = self.index(g)
        if k < 0:
            gi, k = int(self.inv_idx(gi)), -k
        out, base = 0, gi
        while k:
            if k & 1:
                out = int(self.mul_idx(out, base))
            base = int(self.mul_idx(base, base))
            k >>= 1
        return self.element(out)

    def element_order(self, g: Element) -> int:
        gi = self.index(g)
        cur, k = gi, 1
        while cur != 0:
            cur = int(self.mul_idx(cur, gi))
            k += 1
        return k

    @cached_property
    def cayley_table(self) -> Optional[np.ndarray]:
        """Full product table for small groups, None above 1024 elements."""
        if self.order > 1024:
            return None
        idx = np.arange(self.order, dtype=np.int64)
        return np.asarray(self.mul_idx(idx[:, None], idx[None, :]), dtype=np.int64)

    @cached_property
    def irreps_list(self) -> List["Irrep"]:
        return self._irreps()

    def describe(self) -> str:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.describe() == other.describe()

    def __hash__(self):
        return hash(self.describe())

    def __repr__(self):
        return self.describe()


class AbelianGroup(FiniteGroup):
    """Z_{n_1} x ... x Z_{n_k}; index is the C-order ravel of the coordinates."""

    kind = "abelian"
    is_abelian = True

    def __init__(self, orders: Sequence[int]):
        orders = tuple(int(n) for n in orders)
        if any(n < 1 for n in orders):
            raise DomainError("cyclic factor orders must be positive")
        super().__init__(math.prod(orders))
        self.orders = orders
        self._strides = np.array(
            [math.prod(orders[i + 1:]) for i in range(len(orders))], dtype=np.int64
        )
        self._ords = np.array(orders, dtype=np.int64)

    def describe(self):
        return "Z(" + ",".join(map(str, self.orders)) + ")"

    def coords(self, i) -> np.ndarray:
        i = np.asarray(i, dtype=np.int64)
        return (i[..., None] // self._strides) % self._ords

    def ravel(self, c) -> np.ndarray:
        return (np.asarray(c, dtype=np.int64) % self._ords) @ self._strides

    def index(self, g) -> int:
        g = tuple(g)
        if len(g) != len(self.orders) or any(not 0 <= x < n for x, n in zip(g, self.orders)):
            raise DomainError(f"{g} is not an element of {self.describe()}")
        return int(self.ravel(g))

    def element(self, i: int) -> Element:
        return tuple(int(x) for x in self.coords(int(i)))

    def mul_idx(self, i, j):
        return self.ravel(self.coords(i) + self.coords(j))

    def inv_idx(self, i):
        return self.ravel(-self.coords(i))

    def generators(self):
        k = len(self.orders)
        return [tuple(1 if t == s else 0 for t in range(k)) for s in range(k) if self.orders[s] > 1]

    def _irreps(self):
        out = []
        for i in range(self.order):
            k = self.element(i)
            out.append(Irrep(self, ("chi",) + k, 1, _abelian_matrices(self, k)))
        return out


def _abelian_matrices(G: AbelianGroup, k: Element) -> np.ndarray:
    c = G.coords(np.arange(G.order))
    lcm = math.lcm(*G.orders) if G.orders else 1
    weights = np.array([kk * (lcm // n) for kk, n in zip(k, G.orders)], dtype=np.int64)
    phase = (c @ weights) % lcm if len(k) else np.zeros(G.order, dtype=np.int64)
    return np.exp(2j * np.pi * phase / lcm).reshape(G.order, 1, 1)


class DihedralGroup(FiniteGroup):
    """D_n = Z_n x| Z_2 with (x,a)(y,b) = (x + (-1)^a y, a + b); index x + n a."""

    kind = "dihedral"

    def __init__(self, n: int):
        if n < 1:
            raise DomainError("dihedral parameter must be positive")
        super().__init__(2 * n)
        self.n = n
        self.is_abelian = n <= 2

    def describe(self):
        return f"D{self.n}"

    def index(self, g) -> int:
        x, a = g
        if not (0 <= x < self.n and a in (0, 1)):
            raise DomainError(f"{g} is not an element of D{self.n}")
        return int(x + self.n * a)

    def element(self, i: int) -> Element:
        i = int(i)
        return (i % self.n, i // self.n)

    def _split(self, i):
        i = np.asarray(i, dtype=np.int64)
        return i % self.n, i // self.n

    def mul_idx(self, i, j):
        x, a = self._split(i)
        y, b = self._split(j)
        return (x + (1 - 2 * a) * y) % self.n + self.n * ((a + b) % 2)

    def inv_idx(self, i):
        x, a = self._split(i)
        return (-(1 - 2 * a) * x) % self.n + self.n * a

    def generators(self):
        return [(1 % self.n, 0), (0, 1)]

    def _irreps(self):
        n = self.n
        x, a = self._split(np.arange(self.order))
        sign_a = (-1.0) ** a
        one = [("tt", np.ones(self.order)), ("ts", sign_a)]
        if n % 2 == 0:
            one += [("st", (-1.0) ** x), ("ss", (-1.0) ** (x + a))]
        out = [Irrep(self, (lab,), 1, v.astype(complex).reshape(-1, 1, 1)) for lab, v in one]
        for h in range(1, (n + 1) // 2):
            w = np.exp(2j * np.pi * h * x / n)
            m = np.zeros((self.order, 2, 2), dtype=complex)
            rot = a == 0
            m[rot, 0, 0] = w[rot]
            m[rot, 1, 1] = np.conj(w[rot])
            ref = ~rot
            # Off-diagonal entries are conjugate to each other; equal entries
            # would square to a non-identity matrix on a reflection.
            m[ref, 0, 1] = w[ref]
            m[ref, 1, 0] = np.conj(w[ref])
            out.append(Irrep(self, ("rho", h), 2, m))
        return out


class HeisenbergGroup(FiniteGroup):
    """Triples over F_p with (a,b,c)(a',b',c') = (a + a' + b'c, b + b', c + c')."""

    kind = "heisenberg"

    def __init__(self, p: int):
        from .numtheory import is_prime

        if not is_prime(p):
            raise DomainError("Heisenberg group needs a prime p")
        super().__init__(p**3)
        self.p = p

    def describe(self):
        return f"Heis({self.p})"

    def index(self, g) -> int:
        a, b, c = g
        p = self.p
        if not all(0 <= v < p for v in (a, b, c)):
            raise DomainError(f"{g} is not an element of {self.describe()}")
        return int((a * p + b) * p + c)

    def element(self, i: int) -> Element:
        p = self.p
        i = int(i)
        return (i // (p * p), (i // p) % p, i % p)

    def _split(self, i):
        i = np.asarray(i, dtype=np.int64)
        p = self.p
        return i // (p * p), (i // p) % p, i % p

    def _join(self, a, b, c):
        p = self.p
        return ((a % p) * p + (b % p)) * p + (c % p)

    def mul_idx(self, i, j):
        a, b, c = self._split(i)
        a2, b2, c2 = self._split(j)
        return self._join(a + a2 + b2 * c, b + b2, c + c2)

    def inv_idx(self, i):
        a, b, c = self._split(i)
        return self._join(-a + b * c, -b, -c)

    def generators(self):
        return [(1, 0, 0), (0, 1, 0), (0, 0, 1)]

    def _irreps(self):
        p = self.p
        a, b, c = self._split(np.arange(self.order))
        out = []
        for u in range(p):
            for v in range(p):
                vals = np.exp(2j * np.pi * ((u * b + v * c) % p) / p)
                out.append(Irrep(self, ("lin", u, v), 1, vals.reshape(-1, 1, 1)))
        rows = np.arange(p)
        for z in range(1, p):
            m = np.zeros((self.order, p, p), dtype=complex)
            for g in range(self.order):
                # omega^{z a} X^b Z^{z c}: column x maps to row x + b
                phase = np.exp(2j * np.pi * ((z * a[g] + z * c[g] * rows) % p) / p)
                m[g, (rows + b[g]) % p, rows] = phase
            out.append(Irrep(self, ("heis", z), p, m))
        return out


@dataclass
class Irrep:
    group: FiniteGroup
    label: Tuple
    dim: int
    matrices: np.ndarray = field(repr=False)

    def matrix_of(self, g: Element) -> np.ndarray:
        return self.matrices[self.group.index(g)]

    @cached_property
    def character(self) -> np.ndarray:
        return np.trace(self.matrices, axis1=1, axis2=2)

    @cached_property
    def kernel_mask(self) -> np.ndarray:
        return np.abs(self.character - self.dim) < 1e-9

    @property
    def label_str(self) -> str:
        head, *rest = self.label
        return head if not rest else f"{head}(" + ",".join(map(str, rest)) + ")"


def irreps(G: FiniteGroup) -> List[Irrep]:
    if not isinstance(G, (AbelianGroup, DihedralGroup, HeisenbergGroup)):
        raise DomainError("irreps are available for Abelian, dihedral and Heisenberg groups")
    return G.irreps_list


def _check_member(G: FiniteGroup, *gs) -> None:
    for g in gs:
        if not G.contains(g):
            raise DomainError(f"{g} is not an element of {G}")


def group_mul(G: FiniteGroup, g: Element, h: Element) -> Element:
    _check_member(G, g, h)
    return G.mul(g, h)


def group_inv(G: FiniteGroup, g: Element) -> Element:
    _check_member(G, g)
    return G.inv(g)


def enumerate_group(G: FiniteGroup) -> List[Element]:
    return list(G.elements)


def character_inner(chi, chi2, G: FiniteGroup) -> complex:
    """(1/|G|) sum_x conj(chi(x)) chi2(x); characters as arrays over indices or callables."""
    a = _as_array(chi, G)
    b = _as_array(chi2, G)
    return complex(np.vdot(a, b) / G.order)


def _as_array(chi, G: FiniteGroup) -> np.ndarray:
    if isinstance(chi, Irrep):
        return chi.character
    if callable(chi):
        return np.array([chi(g) for g in G.elements], dtype=complex)
    arr = np.asarray(chi, dtype=complex)
    if arr.shape != (G.order,):
        raise DomainError("character must have one value per group element")
    return arr


def regular_representation(G: FiniteGroup, side: str = "right") -> np.ndarray:
    """Permutation matrices; right: R(x)|y> = |y x^-1>, left: L(x)|y> = |x y>."""
    n = G.order
    if n > 1024:
        raise ResourceError("dense regular representation limited to |G| <= 1024")
    ys = np.arange(n)
    mats = np.zeros((n, n, n))
    for x in range(n):
        if side == "right":
            target = G.mul_idx(ys, G.inv_idx(x))
        else:
            target = G.mul_idx(x, ys)
        mats[x, target, ys] = 1.0
    return mats


def fourier_matrix(G: FiniteGroup) -> np.ndarray:
    """Rows (sigma, j, k) in irrep order, entries sqrt(d/|G|) sigma(x)_{jk}."""
    if G.order > MAX_DENSE:
        raise ResourceError("dense Fourier matrix limited to |G| <= 10^4")
    rows = []
    for rep in irreps(G):
        block = rep.matrices.reshape(G.order, rep.dim * rep.dim).T
        rows.append(math.sqrt(rep.dim / G.order) * block)
    return np.vstack(rows)


def irrep_row_slices(G: FiniteGroup) -> List[slice]:
    out, start = [], 0
    for rep in irreps(G):
        out.append(slice(start, start + rep.dim * rep.dim))
        start += rep.dim * rep.dim
    return out


# --- subgroups ----------------------------------------------------------------

@dataclass
class Subgroup:
    group: FiniteGroup
    generators: List[Element]
    mask: np.ndarray = field(repr=False)
    is_normal: bool = False

    @property
    def order(self) -> int:
        return int(self.mask.sum())

    @cached_property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @cached_property
    def elements(self) -> frozenset:
        return frozenset(self.group.element(i) for i in self.indices)

    def __contains__(self, g) -> bool:
        return bool(self.mask[self.group.index(g)])

    def same_as(self, other: "Subgroup") -> bool:
        return self.group == other.group and bool(np.array_equal(self.mask, other.mask))

    def key(self) -> bytes:
        return np.packbits(self.mask).tobytes()

    def to_json(self) -> dict:
        return {
            "generators": [list(g) for g in self.generators],
            "order": self.order,
            "is_normal": self.is_normal,
        }


def _closure_mask(G: FiniteGroup, gens: Sequence[int]) -> np.ndarray:
    mask = np.zeros(G.order, dtype=bool)
    mask[0] = True
    gens = np.asarray(sorted(set(int(g) for g in gens)), dtype=np.int64)
    if gens.size == 0:
        return mask
    table = G.cayley_table
    frontier = np.array([0], dtype=np.int64)
    while frontier.size:
        if table is None:
            prods = G.mul_idx(frontier[:, None], gens[None, :]).ravel()
        else:
            prods = table[np.ix_(frontier, gens)].ravel()
        new = np.unique(prods[~mask[prods]])
        mask[new] = True
        frontier = new
    return mask


def _is_normal_mask(G: FiniteGroup, mask: np.ndarray, gen_idx: Sequence[int]) -> bool:
    if G.is_abelian:
        return True
    hs = np.flatnonzero(mask) if not gen_idx else np.asarray(gen_idx, dtype=np.int64)
    for g in G.generators():
        gi = G.index(g)
        conj = G.mul_idx(G.mul_idx(gi, hs), G.inv_idx(gi))
        if not mask[conj].all():
            return False
    return True


def make_subgroup(G: FiniteGroup, generators: Iterable[Element]) -> Subgroup:
    gens = list(generators)
    _check_member(G, *gens)
    idx = [G.index(g) for g in gens]
    mask = _closure_mask(G, idx)
    return Subgroup(G, gens, mask, _is_normal_mask(G, mask, idx))


def subgroup_from_elements(G: FiniteGroup, elements: Iterable[Element]) -> Subgroup:
    """Validate a set of elements as a subgroup and pick a small generating set."""
    idx = np.array(sorted({G.index(g) for g in elements}), dtype=np.int64)
    mask = np.zeros(G.order, dtype=bool)
    mask[idx] = True
    if not mask[0]:
        raise DomainError("subset does not contain the identity")
    if idx.size and not mask[G.mul_idx(idx[:, None], idx[None, :])].all():
        raise DomainError("subset is not closed under the group law")
    return subgroup_from_mask(G, mask)


def subgroup_from_mask(G: FiniteGroup, mask: np.ndarray) -> Subgroup:
    gens: List[int] = []
    span = _closure_mask(G, gens)
    for i in np.flatnonzero(mask):
        if not span[i]:
            gens.append(int(i))
            span = _closure_mask(G, gens)
    if not np.array_equal(span, mask):
        raise DomainError("subset is not a subgroup")
    return Subgroup(G, [G.element(i) for i in gens], mask.copy(), _is_normal_mask(G, mask, gens))


_SUBGROUP_CACHE: Dict[str, List[Subgroup]] = {}


def subgroups(G: FiniteGroup) -> List[Subgroup]:
    """All subgroups, built by joining subgroups with cyclic subgroups until nothing new appears."""
    if G.order > MAX_SUBGROUP_ENUM:
        raise ResourceError("subgroup enumeration limited to |G| <= 10^4")
    key = G.describe()
    if key in _SUBGROUP_CACHE:
        return list(_SUBGROUP_CACHE[key])
    found: Dict[bytes, Tuple[List[int], np.ndarray]] = {}
    cyclic: List[Tuple[int, np.ndarray]] = []
    for g in range(G.order):
        m = _closure_mask(G, [g])
        k = np.packbits(m).tobytes()
        if k not in found:
            found[k] = ([g] if g else [], m)
            cyclic.append((g, m))
    queue = [v for v in found.values() if v[0]]
    while queue:
        gens, m = queue.pop()
        members = np.flatnonzero(m)
        # the join only depends on the coset gS, so each coset is tried once
        tried = m.copy()
        for g, cm in cyclic:
            if tried[g]:
                continue
            tried[G.mul_idx(g, members)] = True
            if G.is_abelian:
                joined = np.zeros(G.order, dtype=bool)
                joined[G.mul_idx(members[:, None], np.flatnonzero(cm)[None, :]).ravel()] = True
            else:
                joined = _closure_mask(G, gens + [g])
            k = np.packbits(joined).tobytes()
            if k not in found:
                found[k] = (gens + [g], joined)
                queue.append(found[k])
    out = []
    for gens, m in sorted(found.values(), key=lambda v: (int(v[1].sum()), np.flatnonzero(v[1]).tolist())):
        out.append(Subgroup(G, [G.element(i) for i in gens], m, _is_normal_mask(G, m, gens)))
    _SUBGROUP_CACHE[key] = out
    return list(out)


def normal_subgroups(G: FiniteGroup) -> List[Subgroup]:
    return [H for H in subgroups(G) if H.is_normal]


def normal_core(G: FiniteGroup, H: Subgroup) -> Subgroup:
    mask = H.mask.copy()
    for g in range(G.order):
        conj = G.mul_idx(G.mul_idx(g, H.indices), G.inv_idx(g))
        inner = np.zeros(G.order, dtype=bool)
        inner[conj] = True
        mask &= inner
    return subgroup_from_mask(G, mask)


def _as_subgroup(G: FiniteGroup, H) -> Subgroup:
    if isinstance(H, Subgroup):
        if H.group != G:
            raise DomainError("subgroup belongs to a different group")
        return H
    return subgroup_from_elements(G, H)


def wfs_distribution(G: FiniteGroup, H) -> np.ndarray:
    """Pr(sigma) = (d_sigma/|G|) sum_{h in H} conj(chi_sigma(h)), in irrep order."""
    H = _as_subgroup(G, H)
    probs = []
    for rep in irreps(G):
        s = np.conj(rep.character[H.indices]).sum()
        probs.append(rep.dim * s.real / G.order)
    out = np.array(probs)
    out[np.abs(out) < 1e-13] = 0.0
    return out


def distribution_json(G: FiniteGroup, probs: Sequence[float]) -> List[dict]:
    return [
        {"label": rep.label_str, "dim": rep.dim, "probability": float(pr)}
        for rep, pr in zip(irreps(G), probs)
    ]


def abelian_groups_of_order(n: int) -> List[AbelianGroup]:
    """One representative per isomorphism class, as products of prime-power cyclic groups."""
    from .numtheory import factor_trial

    per_prime = []
    for p, e in factor_trial(n).prime_powers:
        per_prime.append([[p**k for k in part] for part in _partitions(e)])
    groups = []
    for combo in itertools.product(*per_prime):
        orders = [o for part in combo for o in part]
        groups.append(AbelianGroup(orders if orders else [1]))
    return groups


def _partitions(e: int, largest: Optional[int] = None):
    if e == 0:
        yield []
        return
    largest = e if largest is None else largest
    for k in range(min(e, largest), 0, -1):
        for rest in _partitions(e - k, k):
            yield [k] + rest
