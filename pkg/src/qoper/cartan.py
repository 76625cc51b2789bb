"""Finite-type Cartan matrices, Weyl words, Coxeter data, and twists.

Convention: the Cartan matrix entry a[i][j] is the pairing of the j-th
simple root against the i-th coroot, so a[i][i] = 2 and the i-th simple
reflection acts on a coweight vector v (in the coroot basis) by

    s_i : v  ->  v - <alpha_i, v> alpha_i^vee,
    <alpha_i, v> = sum_k a[k][i] v_k.

Nodes are numbered in the Bourbaki order.  Weyl group elements are stored
as reduced words; canonical forms use the (faithful) action on a strictly
dominant integer weight vector, so comparison works uniformly in every
finite type without Matsumoto rewriting.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

#: Weyl group orders by (type, rank-dependent formula handled in weyl_order).
_COXETER_NUMBERS = {"E6": 12, "E7": 18, "E8": 30, "F4": 12, "G2": 6}

DEFAULT_WEYL_GUARD = 10_080


class CartanError(ValueError):
    pass


@dataclass(frozen=True)
class CartanData:
    """Lie type, rank, Cartan matrix and the simple-root ordering.

    ``ordering`` is the permutation (i_1, ..., i_r) of {1..r} fixing the
    Coxeter element c = s_{i_1} ... s_{i_r} used by the q-difference
    machinery; the QQ-system's twist factors depend on it through the
    positions of the nodes, not their labels.
    """

    lie_type: str
    rank: int
    cartan: tuple
    ordering: tuple

    def __post_init__(self):
        a = self.cartan
        r = self.rank
        if len(a) != r or any(len(row) != r for row in a):
            raise CartanError("cartan matrix shape does not match rank")
        for i in range(r):
            if a[i][i] != 2:
                raise CartanError("diagonal Cartan entries must equal 2")
            for j in range(r):
                if i != j and a[i][j] > 0:
                    raise CartanError("off-diagonal Cartan entries must be <= 0")
                if (a[i][j] == 0) != (a[j][i] == 0):
                    raise CartanError("Cartan zero pattern must be symmetric")
        if sorted(self.ordering) != list(range(1, r + 1)):
            raise CartanError("ordering must be a permutation of 1..rank")

    def a(self, i: int, j: int) -> int:
        """Cartan entry a_{ij} with 1-based node labels."""
        return self.cartan[i - 1][j - 1]

    def position(self, i: int) -> int:
        """Position of node i in the ordering (0-based)."""
        return self.ordering.index(i)

    def with_ordering(self, ordering: Sequence[int]) -> "CartanData":
        return CartanData(self.lie_type, self.rank, self.cartan, tuple(ordering))

    @property
    def is_type_a(self) -> bool:
        return self.lie_type == "A"


@dataclass(frozen=True)
class WeylWord:
    """A word in simple reflections; letters in {1..rank}.

    The element is the product s_{letters[0]} s_{letters[1]} ... acting as
    function composition, rightmost letter applied first.
    """

    letters: tuple

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(l) for l in self.letters))

    def __len__(self):
        return len(self.letters)

    @staticmethod
    def identity() -> "WeylWord":
        return WeylWord(())

    def __mul__(self, other: "WeylWord") -> "WeylWord":
        return WeylWord(self.letters + other.letters)


@dataclass(frozen=True)
class TwistZ:
    """Twist parameters zeta_i, all nonzero; exact values allowed."""

    zetas: tuple

    def __post_init__(self):
        zs = tuple(self.zetas)
        for z in zs:
            if complex(z) == 0:
                raise ValueError("twist parameters must be nonzero")
        object.__setattr__(self, "zetas", zs)

    @property
    def rank(self) -> int:
        return len(self.zetas)

    def as_complex(self) -> list[complex]:
        return [complex(z) for z in self.zetas]


def _cartan_entries(lie_type: str, rank: int) -> list[list[int]]:
    r = rank
    a = [[2 if i == j else 0 for j in range(r)] for i in range(r)]

    def link(i, j, aij=-1, aji=-1):
        a[i][j] = aij
        a[j][i] = aji

    if lie_type == "A":
        for i in range(r - 1):
            link(i, i + 1)
    elif lie_type == "B":
        # short root at node r: a_{r-1,r} = -2 under a_{ij} = <alpha_j, a_i^vee>
        for i in range(r - 2):
            link(i, i + 1)
        link(r - 2, r - 1, aij=-2, aji=-1)
    elif lie_type == "C":
        for i in range(r - 2):
            link(i, i + 1)
        link(r - 2, r - 1, aij=-1, aji=-2)
    elif lie_type == "D":
        for i in range(r - 3):
            link(i, i + 1)
        link(r - 3, r - 2)
        link(r - 3, r - 1)
    elif lie_type == "E":
        # Bourbaki: node 2 attaches to node 4; chain 1-3-4-5-...-r
        chain = [(0, 2), (2, 3), (1, 3)] + [(i, i + 1) for i in range(3, r - 1)]
        for i, j in chain:
            link(i, j)
    elif lie_type == "F":
        link(0, 1)
        link(1, 2, aij=-2, aji=-1)
        link(2, 3)
    elif lie_type == "G":
        # a_{12} = -3, a_{21} = -1: alpha_1 long, alpha_2 short
        link(0, 1, aij=-3, aji=-1)
    else:
        raise CartanError(f"unknown Lie type {lie_type!r}")
    return a


def cartan_matrix(lie_type: str, rank: int) -> CartanData:
    """Standard Cartan data for a finite type, Bourbaki numbering.

    Valid pairs: A_r (r>=1), B_r (r>=2), C_r (r>=2), D_r (r>=4),
    E_6/E_7/E_8, F_4, G_2.  The default ordering is (1, ..., r).
    """
    lie_type = str(lie_type).upper()
    valid = (
        (lie_type == "A" and rank >= 1)
        or (lie_type == "B" and rank >= 2)
        or (lie_type == "C" and rank >= 2)
        or (lie_type == "D" and rank >= 4)
        or (lie_type == "E" and rank in (6, 7, 8))
        or (lie_type == "F" and rank == 4)
        or (lie_type == "G" and rank == 2)
    )
    if not valid:
        raise CartanError(f"invalid finite type ({lie_type}, {rank})")
    a = _cartan_entries(lie_type, rank)
    return CartanData(lie_type, rank, tuple(tuple(row) for row in a),
                      tuple(range(1, rank + 1)))


def coxeter_number(data: CartanData) -> int:
    t, r = data.lie_type, data.rank
    if t == "A":
        return r + 1
    if t in ("B", "C"):
        return 2 * r
    if t == "D":
        return 2 * r - 2
    key = f"{t}{r}"
    if key in _COXETER_NUMBERS:
        return _COXETER_NUMBERS[key]
    raise CartanError(f"no Coxeter number for ({t}, {r})")


def weyl_order(data: CartanData) -> int:
    t, r = data.lie_type, data.rank
    fact = 1
    for k in range(2, r + 2):
        fact *= k
    if t == "A":
        return fact
    rfact = fact // (r + 1)
    if t in ("B", "C"):
        return (2**r) * rfact
    if t == "D":
        return (2 ** (r - 1)) * rfact
    return {"E6": 51840, "E7": 2903040, "E8": 696729600,
            "F4": 1152, "G2": 12}[f"{t}{r}"]


def reflect_twist(Z: TwistZ, i: int, data: CartanData) -> TwistZ:
    """Simple reflection s_i acting on the twist.

    zeta_i maps to zeta_i^{-1} prod_{j != i} zeta_j^{-a_{ji}}; the other
    parameters are untouched.  Exact inputs stay exact.
    """
    if not 1 <= i <= data.rank:
        raise ValueError(f"node index {i} out of range")
    zs = list(Z.zetas)
    exact = all(isinstance(z, (int, Fraction)) for z in zs)
    new = (Fraction(1) if exact else 1.0) / zs[i - 1]
    for j in range(1, data.rank + 1):
        if j == i:
            continue
        e = -data.a(j, i)
        if e:
            new = new * zs[j - 1] ** e
    zs[i - 1] = new
    return TwistZ(tuple(zs))


def twist_along_word(Z: TwistZ, word: WeylWord, data: CartanData) -> TwistZ:
    """w(Z) for w given by the word, rightmost letter applied first."""
    for letter in reversed(word.letters):
        Z = reflect_twist(Z, letter, data)
    return Z


# -- Weyl group elements via the weight action --------------------------

def _reflect_vector(v: tuple, i: int, data: CartanData) -> tuple:
    """s_i on a weight in fundamental-weight coordinates (exact ints).

    s_i(lambda) = lambda - lambda_i alpha_i with alpha_i = sum_j a_ji w_j.
    """
    li = v[i - 1]
    if li == 0:
        return v
    return tuple(v[j] - li * data.a(j + 1, i) for j in range(data.rank))


def word_action(word: WeylWord, v: tuple, data: CartanData) -> tuple:
    for letter in reversed(word.letters):
        v = _reflect_vector(v, letter, data)
    return v


def canonical_form(word: WeylWord, data: CartanData) -> tuple:
    """Injective normal form: the image of the strictly dominant weight rho.

    rho = (1, ..., 1) in fundamental-weight coordinates is regular, so
    w -> w(rho) is injective and serves as a type-independent normal form.
    """
    rho = tuple([1] * data.rank)
    return word_action(word, rho, data)


def word_length(word: WeylWord, data: CartanData) -> int:
    """Coxeter length of the element the word represents (via BFS table)."""
    table = _element_table(data)
    return len(table[canonical_form(word, data)])


def enumerate_weyl(data: CartanData, max_order: int = DEFAULT_WEYL_GUARD) -> list[WeylWord]:
    """One reduced word per Weyl group element, BFS by length.

    The identity comes first and the longest element last.  Groups larger
    than ``max_order`` are refused outright rather than truncated.
    """
    order = weyl_order(data)
    if order > max_order:
        raise CartanError(
            f"group too large: |W| = {order} exceeds the bound {max_order}")
    table = _element_table(data)
    words = sorted(table.values(), key=lambda w: (len(w), w))
    return [WeylWord(w) for w in words]


_TABLE_CACHE: dict = {}


def _element_table(data: CartanData) -> dict:
    """Map canonical form -> one reduced word per element (BFS by length)."""
    key = (data.lie_type, data.rank, data.cartan)
    if key in _TABLE_CACHE:
        return _TABLE_CACHE[key]
    rho = tuple([1] * data.rank)
    table = {rho: ()}
    frontier = [(rho, ())]
    while frontier:
        nxt = []
        for vec, word in frontier:
            for i in range(1, data.rank + 1):
                # left multiplication: s_i * w acts by reflecting the image
                v2 = _reflect_vector(vec, i, data)
                if v2 not in table:
                    table[v2] = (i,) + word
                    nxt.append((v2, (i,) + word))
        frontier = nxt
    _TABLE_CACHE[key] = table
    return table


def longest_element(data: CartanData, max_order: int = DEFAULT_WEYL_GUARD) -> WeylWord:
    words = enumerate_weyl(data, max_order)
    return words[-1]


def type_a_permutation(word: WeylWord, data: CartanData) -> tuple:
    """Permutation of {1..r+1} induced by the word (type A only).

    Entry k-1 of the result is the image of k; s_i is the transposition
    (i, i+1); rightmost letter acts first.
    """
    if not data.is_type_a:
        raise CartanError("permutation realization is defined only in type A")
    n = data.rank + 1

    def transpose(i, k):
        if k == i:
            return i + 1
        if k == i + 1:
            return i
        return k

    out = []
    for k in range(1, n + 1):
        x = k
        for letter in reversed(word.letters):
            x = transpose(letter, x)
        out.append(x)
    return tuple(out)


def column_index_set(v: WeylWord, i: int, data: CartanData) -> frozenset:
    """The image v({1, ..., i}) in {1, ..., rank+1} (type A only)."""
    if not data.is_type_a:
        raise CartanError("index sets via minors are defined only in type A")
    if not 1 <= i <= data.rank:
        raise ValueError(f"fundamental index {i} out of range")
    perm = type_a_permutation(v, data)
    return frozenset(perm[k] for k in range(i))


def word_inverse(word: WeylWord) -> WeylWord:
    return WeylWord(tuple(reversed(word.letters)))
