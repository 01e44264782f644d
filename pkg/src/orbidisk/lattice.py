"""Integer and rational linear algebra plus all stacky-fan combinatorics.

Ray indices are 1-based throughout, matching the toric-data conventions of
the input files (rays 1..r', extra vectors r'+1..r).  The ambient lattice is
N = Z^3 (+) Z/m_1 (+) ... (+) Z/m_t, stored as integer tuples with one
torsion coordinate per invariant factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .exactring import lcm


class FanError(ValueError):
    """Invalid stacky-fan data."""


# ---------------------------------------------------------------------------
# integer matrices (lists of lists)
# ---------------------------------------------------------------------------

def _identity(n: int) -> list:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def smith_normal_form(M):
    """Return (U, S, V) with U*M*V = S diagonal, divisibility chain, U,V unimodular."""
    S = [list(row) for row in M]
    m = len(S)
    n = len(S[0]) if m else 0
    U = _identity(m)
    V = _identity(n)

    def row_add(src, dst, c):
        S[dst] = [a + c * b for a, b in zip(S[dst], S[src])]
        U[dst] = [a + c * b for a, b in zip(U[dst], U[src])]

    def col_add(src, dst, c):
        for row in S:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    def row_swap(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def col_swap(i, j):
        for row in S:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def row_neg(i):
        S[i] = [-a for a in S[i]]
        U[i] = [-a for a in U[i]]

    t = 0
    while t < min(m, n):
        pivot = None
        for i in range(t, m):
            for j in range(t, n):
                if S[i][j] != 0 and (pivot is None or abs(S[i][j]) < abs(S[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        if pivot[0] != t:
            row_swap(t, pivot[0])
        if pivot[1] != t:
            col_swap(t, pivot[1])
        while True:
            # clear below and to the right of the pivot with Euclid steps
            cleared = True
            for i in range(t + 1, m):
                if S[i][t] == 0:
                    continue
                q = S[i][t] // S[t][t]
                row_add(t, i, -q)
                if S[i][t] != 0:
                    row_swap(t, i)
                    cleared = False
            for j in range(t + 1, n):
                if S[t][j] == 0:
                    continue
                q = S[t][j] // S[t][t]
                col_add(t, j, -q)
                if S[t][j] != 0:
                    col_swap(t, j)
                    cleared = False
            if not cleared:
                continue
            # force the divisibility chain: the pivot must divide the rest
            offender = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if S[i][j] % S[t][t] != 0:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            row_add(offender, t, 1)
        if S[t][t] < 0:
            row_neg(t)
        t += 1
    return U, S, V


def kernel_basis(M):
    """Basis (as rows) of the integer kernel {x : M x = 0} via SNF."""
    m = len(M)
    n = len(M[0]) if m else 0
    _, S, V = smith_normal_form(M)
    rank = sum(1 for i in range(min(m, n)) if S[i][i] != 0)
    return [[V[i][j] for i in range(n)] for j in range(rank, n)]


def hermite_normal_form(rows):
    """Row-style HNF of the lattice spanned by the given rows.

    Pivots are positive, entries above each pivot lie in [0, pivot), and
    rows are ordered by pivot column.
    """
    mat = [list(r) for r in rows if any(r)]
    if not mat:
        return []
    ncols = len(mat[0])
    out = []
    for col in range(ncols):
        while True:
            nz = [r for r in mat if r[col] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            for r in nz[1:]:
                q = r[col] // piv[col]
                for j in range(ncols):
                    r[j] -= q * piv[j]
            mat = [r for r in mat if any(r)]
        nz = [r for r in mat if r[col] != 0]
        if not nz:
            continue
        piv = nz[0]
        if piv[col] < 0:
            piv[:] = [-a for a in piv]
        out.append(piv)
        mat = [r for r in mat if r is not piv]
    if mat:
        raise AssertionError("rows left over after HNF sweep")
    # reduce entries above each pivot
    for i in reversed(range(len(out))):
        pcol = next(j for j, a in enumerate(out[i]) if a != 0)
        for k in range(i):
            q = out[k][pcol] // out[i][pcol]
            if q:
                out[k] = [a - q * b for a, b in zip(out[k], out[i])]
    return out


def cokernel_invariants(M, ambient_rank: int):
    """Invariant factors of Z^ambient_rank / (column span of M).

    Returns (free_rank, factors) where factors lists the diagonal entries > 1.
    """
    if not M or not M[0]:
        return ambient_rank, []
    _, S, _ = smith_normal_form(M)
    diag = [S[i][i] for i in range(min(len(S), len(S[0])))]
    rank = sum(1 for d in diag if d)
    return ambient_rank - rank, [d for d in diag if d > 1]


def _det3(a, b, c) -> int:
    return (
        a[0] * (b[1] * c[2] - b[2] * c[1])
        - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
    )


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def solve_rational(A, b):
    """Solve A x = b exactly over Q (A square invertible); list of Fractions."""
    n = len(A)
    M = [[Fraction(A[i][j]) for j in range(n)] + [Fraction(b[i])] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise FanError("singular linear system")
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [a * inv for a in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * p for a, p in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


def invert_rational(A):
    n = len(A)
    cols = [solve_rational(A, [1 if i == j else 0 for i in range(n)]) for j in range(n)]
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _prod(values) -> int:
    out = 1
    for v in values:
        out *= v
    return out


def _ceil(x: Fraction) -> int:
    return -((-x).__floor__())


def _grid(k: int, limit: int):
    """All n in Z_{>=0}^k with sum(n) <= limit."""
    if k == 0:
        yield ()
        return
    for head in range(limit + 1):
        for tail in _grid(k - 1, limit - head):
            yield (head,) + tail


# ---------------------------------------------------------------------------
# stacky fan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoxElement:
    """A twisted sector of a cone: v in N with fractional ray weights c_i."""

    v: tuple                      # coordinates in N (3 free + torsion)
    cone: tuple                   # ray indices of the host cone
    c: dict                       # ray index -> Fraction in [0,1)
    age: Fraction

    def c_of(self, i: int) -> Fraction:
        return self.c.get(i, Fraction(0))

    def __repr__(self):
        return f"Box{self.v}"


@dataclass(frozen=True)
class FlagData:
    """A flag (tau, sigma) with a chosen ray ordering (i1, i2, i3)."""

    sigma: tuple
    i1: int
    i2: int
    i3: int
    s1: int
    g_sigma_order: int
    g_tau_order: int
    outer: bool

    @property
    def tau(self) -> tuple:
        return (self.i2, self.i3)

    @property
    def ordering(self) -> tuple:
        return (self.i1, self.i2, self.i3)


class StackyFan:
    """Stacky fan of a 3-dimensional Calabi-Yau toric DM stack.

    rays/extras are integer tuples of length 3 + len(torsion); cones are
    triples of 1-based ray indices (extras never span cones).
    """

    def __init__(self, rays, extras=(), cones=(), torsion=()):
        self.torsion = tuple(int(m) for m in torsion)
        if any(m < 2 for m in self.torsion):
            raise FanError("torsion invariant factors must be >= 2")
        self.dim = 3
        width = self.dim + len(self.torsion)
        self.rays = [tuple(int(x) for x in v) for v in rays]
        self.extras = [tuple(int(x) for x in v) for v in extras]
        for v in self.rays + self.extras:
            if len(v) != width:
                raise FanError(
                    f"vector {v} has {len(v)} coordinates, expected {width} "
                    f"(3 free + {len(self.torsion)} torsion)"
                )
        self.r_prime = len(self.rays)
        self.r = self.r_prime + len(self.extras)
        self.k = self.r - self.dim
        if self.k < 0:
            raise FanError("need at least 3 vectors in total")
        self.cones = []
        seen = set()
        for c in cones:
            c = tuple(sorted(int(i) for i in c))
            if len(c) != 3:
                raise FanError(f"maximal cone {c} is not 3-dimensional")
            if any(i < 1 or i > self.r_prime for i in c):
                raise FanError(f"cone {c} uses indices outside rays 1..{self.r_prime}")
            if c not in seen:
                seen.add(c)
                self.cones.append(c)
        if not self.cones:
            raise FanError("no maximal cones")
        for c in self.cones:
            if self.cone_det(c) == 0:
                raise FanError(f"cone {c} is not simplicial (ray images are dependent)")
        self._check_surjective()
        self._cy_functional = self._find_cy_functional()
        self._charge = None
        self._box_cache = {}
        self._basis_cache = {}

    # -- raw data access ----------------------------------------------------
    def vector(self, i: int) -> tuple:
        """b_i for a 1-based index, rays first then extras."""
        if 1 <= i <= self.r_prime:
            return self.rays[i - 1]
        if self.r_prime < i <= self.r:
            return self.extras[i - self.r_prime - 1]
        raise FanError(f"vector index {i} out of range 1..{self.r}")

    def image(self, i: int) -> tuple:
        """Image of b_i in the free quotient Z^3."""
        return self.vector(i)[: self.dim]

    def reduce_point(self, v) -> tuple:
        """Canonical coordinates of a point of N (torsion reduced mod m_j)."""
        v = list(v)
        for j, m in enumerate(self.torsion):
            v[self.dim + j] %= m
        return tuple(v)

    def cone_det(self, cone) -> int:
        a, b, c = (self.image(i) for i in cone)
        return _det3(a, b, c)

    def anticones(self):
        """Index sets I such that the vectors outside I span a cone of the fan."""
        cone_sets = [set(c) for c in self.cones]
        universe = set(range(1, self.r + 1))
        out = []
        for mask in range(1 << self.r):
            comp = {i + 1 for i in range(self.r) if not mask >> i & 1}
            if any(comp <= cs for cs in cone_sets):
                out.append(frozenset(universe - comp))
        return out

    # -- validation ---------------------------------------------------------
    def _augmented_matrix(self):
        """Columns b_1..b_r plus m_j e_{3+j}, as a matrix over Z."""
        width = self.dim + len(self.torsion)
        cols = [list(self.vector(i)) for i in range(1, self.r + 1)]
        for j, m in enumerate(self.torsion):
            col = [0] * width
            col[self.dim + j] = m
            cols.append(col)
        return [[col[t] for col in cols] for t in range(width)]

    def _check_surjective(self):
        free_rank, factors = cokernel_invariants(
            self._augmented_matrix(), self.dim + len(self.torsion)
        )
        if free_rank or factors:
            raise FanError("b_1..b_r do not generate N (phi is not surjective)")

    def _find_cy_functional(self):
        """u in M_Q with <u, image(b_i)> = 1 for all i, else FanError."""
        A = [list(self.image(i)) for i in self.cones[0]]
        u = solve_rational(A, [1, 1, 1])
        for i in range(1, self.r + 1):
            if sum(Fraction(x) * y for x, y in zip(self.image(i), u)) != 1:
                raise FanError("fan is not Calabi-Yau (no functional with <u,b_i>=1)")
        return tuple(u)

    @property
    def cy_functional(self):
        return self._cy_functional

    # -- charge matrix ------------------------------------------------------
    def charge_matrix(self):
        """Rows l^(a): a Hermite-reduced basis of ker(phi), each of length r."""
        if self._charge is not None:
            return self._charge
        basis = [row[: self.r] for row in kernel_basis(self._augmented_matrix())]
        rows = hermite_normal_form(basis)
        if len(rows) != self.k:
            raise FanError("charge matrix has unexpected rank")
        for row in rows:
            if sum(row) != 0:
                raise FanError("charge row does not sum to zero (not Calabi-Yau)")
            acc = [0] * (self.dim + len(self.torsion))
            for i, coef in enumerate(row, start=1):
                for t, x in enumerate(self.vector(i)):
                    acc[t] += coef * x
            if any(acc[: self.dim]) or any(self.reduce_point(acc)[self.dim:]):
                raise FanError("charge row is not a relation among the b_i")
        self._charge = [tuple(row) for row in rows]
        return self._charge

    def divisor_class(self, i: int):
        """D_i as a vector in L^vee (coordinates dual to the charge-row basis)."""
        return tuple(row[i - 1] for row in self.charge_matrix())

    def picard_cokernel(self):
        """(free_rank, invariant factors > 1) of L^vee / sum_{i>r'} Z D_i."""
        if self.k == 0:
            return 0, []
        cols = [list(self.divisor_class(i)) for i in range(self.r_prime + 1, self.r + 1)]
        if not cols:
            return self.k, []
        M = [[col[t] for col in cols] for t in range(self.k)]
        return cokernel_invariants(M, self.k)

    # -- Box elements -------------------------------------------------------
    def box_elements(self, cone) -> list:
        """All of Box(sigma) with weights c_i and ages, canonically ordered."""
        cone = tuple(sorted(cone))
        if cone in self._box_cache:
            return self._box_cache[cone]
        if cone not in set(self.cones):
            raise FanError(f"{cone} is not a maximal cone of the fan")
        B = [[self.image(i)[t] for i in cone] for t in range(3)]
        det = self.cone_det(cone)
        U, S, _ = smith_normal_form(B)
        Binv = invert_rational(B)
        Uinv = invert_rational(U)
        # representatives of Z^3 / B Z^3: m = U^{-1} y, y in the SNF box
        classes = set()
        for y in product(*[range(S[i][i]) for i in range(3)]):
            m = [sum(Uinv[i][j] * y[j] for j in range(3)) for i in range(3)]
            c = [sum(Binv[i][j] * m[j] for j in range(3)) for i in range(3)]
            classes.add(tuple(x - x.__floor__() for x in c))
        if len(classes) != abs(det):
            raise AssertionError("wrong number of lattice classes")
        out = []
        for c in sorted(classes):
            free = [sum(c[j] * self.image(cone[j])[t] for j in range(3)) for t in range(3)]
            if any(x.denominator != 1 for x in free):
                raise AssertionError("Box element image must be integral")
            # the fiber of N -> N^bar over an integral point is a torsor
            # under N_tor, so every torsion translate is its own sector
            for tor in product(*[range(m) for m in self.torsion]):
                v = tuple(int(x) for x in free) + tuple(tor)
                out.append(BoxElement(
                    v=v,
                    cone=cone,
                    c={cone[j]: c[j] for j in range(3)},
                    age=sum(c, Fraction(0)),
                ))
        expected = abs(det) * _prod(self.torsion)
        if len(out) != expected:
            raise AssertionError(f"|Box| = {len(out)}, expected {expected}")
        out.sort(key=lambda b: b.v)
        self._box_cache[cone] = out
        return out

    def box_by_point(self, cone) -> dict:
        return {b.v: b for b in self.box_elements(cone)}

    def group_order(self, cone) -> int:
        return abs(self.cone_det(cone)) * _prod(self.torsion)

    # -- flags ----------------------------------------------------------------
    def adjacent_cones(self, tau) -> list:
        tau = set(tau)
        return [c for c in self.cones if tau <= set(c)]

    def flag_data(self, tau, sigma, ordering) -> FlagData:
        sigma = tuple(sorted(sigma))
        tau = tuple(sorted(tau))
        if sigma not in set(self.cones):
            raise FanError(f"{sigma} is not a maximal cone")
        if not set(tau) <= set(sigma) or len(tau) != 2:
            raise FanError(f"({tau}, {sigma}) is not a flag")
        i1, i2, i3 = ordering
        if {i1, i2, i3} != set(sigma) or {i2, i3} != set(tau):
            raise FanError(
                f"ordering {ordering} is inconsistent with the flag ({tau}, {sigma})"
            )
        box = self.box_elements(sigma)
        s1 = lcm(*[b.c_of(i1).denominator for b in box])
        g_sigma = self.group_order(sigma)
        g_tau = sum(1 for b in box if b.c_of(i1) == 0)
        if s1 * g_tau != g_sigma:
            raise AssertionError("s1 * |G_tau| != |G_sigma|")
        return FlagData(
            sigma=sigma, i1=i1, i2=i2, i3=i3, s1=s1,
            g_sigma_order=g_sigma, g_tau_order=g_tau,
            outer=len(self.adjacent_cones(tau)) == 1,
        )

    # -- effective classes --------------------------------------------------
    def sigma_basis(self, sigma):
        """Dual-basis data for {p_a} = {D_i}_{i in I_sigma}.

        Returns (i_sigma, pair, E): I_sigma sorted ascending, pair[i][a] =
        <D_i, e^a> as Fractions for i = 1..r, and E the matrix whose columns
        are the e^a in charge-row-basis coordinates.
        """
        sigma = tuple(sorted(sigma))
        if sigma in self._basis_cache:
            return self._basis_cache[sigma]
        charge = self.charge_matrix()
        i_sigma = [i for i in range(1, self.r + 1) if i not in sigma]
        if len(i_sigma) != self.k:
            raise AssertionError("|I_sigma| must equal k")
        if self.k == 0:
            data = (i_sigma, {i: [] for i in range(1, self.r + 1)}, [])
            self._basis_cache[sigma] = data
            return data
        P = [[charge[b][i - 1] for b in range(self.k)] for i in i_sigma]
        try:
            E = invert_rational(P)
        except FanError as exc:
            raise FanError(
                f"divisors D_i for I_sigma={i_sigma} do not form a basis"
            ) from exc
        pair = {}
        for i in range(1, self.r + 1):
            row = [Fraction(charge[b][i - 1]) for b in range(self.k)]
            pair[i] = [
                sum(row[b] * E[b][a] for b in range(self.k)) for a in range(self.k)
            ]
        data = (i_sigma, pair, E)
        self._basis_cache[sigma] = data
        return data

    def beta_pairings(self, sigma, n) -> dict:
        """<D_i, beta> for beta = sum_a n_a e^a, keyed by 1-based i."""
        _, pair, _ = self.sigma_basis(sigma)
        return {
            i: sum(Fraction(n[a]) * pair[i][a] for a in range(self.k))
            for i in range(1, self.r + 1)
        }

    def beta_coords(self, sigma, n) -> tuple:
        """Coordinates of beta = sum_a n_a e^a in the charge-row basis of L_Q."""
        if self.k == 0:
            return ()
        _, _, E = self.sigma_basis(sigma)
        return tuple(
            sum(Fraction(n[a]) * E[b][a] for a in range(self.k)) for b in range(self.k)
        )

    def v_of_beta(self, sigma, pairings) -> BoxElement:
        """The Box(sigma) element v(beta) = sum_i ceil(<D_i, beta>) b_i."""
        width = self.dim + len(self.torsion)
        acc = [0] * width
        for i in range(1, self.r + 1):
            ci = _ceil(pairings[i])
            if ci:
                for t, x in enumerate(self.vector(i)):
                    acc[t] += ci * x
        v = self.reduce_point(acc)
        table = self.box_by_point(tuple(sorted(sigma)))
        if v not in table:
            raise AssertionError(f"v(beta) = {v} is not in Box({sigma})")
        return table[v]

    def k_eff_enumerate(self, sigma, bound) -> list:
        """All beta = sum_a n_a e^a with n_a in Z_{>=0} and sum n_a <= bound.

        Entries are (n, coords, pairings, box), ordered by (sum n, n).
        The list is closed downward: removing 1 from any positive n_a lands
        on another listed element.
        """
        bound = Fraction(bound)
        if bound < 0:
            raise FanError("bound must be >= 0")
        sigma = tuple(sorted(sigma))
        out = []
        for n in _grid(self.k, int(bound)):
            pairings = self.beta_pairings(sigma, n)
            out.append((
                tuple(n),
                self.beta_coords(sigma, n),
                pairings,
                self.v_of_beta(sigma, pairings),
            ))
        out.sort(key=lambda row: (sum(row[0]), row[0]))
        return out

    def leading_degree(self, i: int):
        """D_i^vee for an extra vector: (host cone, q-variable index a, coords).

        The unique class pairing to 1 with D_i, to -c_j(b_i) with D_j for
        j in I'_sigma, and to 0 with the rest of I_sigma.
        """
        if not self.r_prime < i <= self.r:
            raise FanError(f"{i} is not an extra-vector index (r'={self.r_prime})")
        for sigma in self.cones:
            A = [[self.image(j)[t] for j in sigma] for t in range(3)]
            c = solve_rational(A, list(self.image(i)))
            if all(x >= 0 for x in c):
                i_sigma, pair, _ = self.sigma_basis(sigma)
                a = i_sigma.index(i)
                for j_pos, j in enumerate(sigma):
                    if pair[j][a] != -c[j_pos]:
                        raise AssertionError(
                            "leading-degree conditions inconsistent with the fan"
                        )
                n = tuple(1 if b == a else 0 for b in range(self.k))
                return tuple(sigma), a, self.beta_coords(sigma, n)
        raise FanError(f"extra vector b_{i} lies in no cone of the fan")

    # -- semiprojectivity -----------------------------------------------------
    def semiprojectivity_check(self) -> bool:
        """True iff the fan support equals the cone spanned by b_1..b_r.

        Every boundary wall (a facet of exactly one maximal cone, counting
        sides) must be a supporting hyperplane of cone(b_1..b_r).
        """
        for sigma in self.cones:
            for drop in range(3):
                wall = [sigma[t] for t in range(3) if t != drop]
                apex = sigma[drop]
                normal = _cross(self.image(wall[0]), self.image(wall[1]))
                side = _dot(normal, self.image(apex))
                if side < 0:
                    normal = tuple(-x for x in normal)
                elif side == 0:
                    raise AssertionError("degenerate wall")
                shared = False
                for other in self.cones:
                    if other == sigma or not set(wall) <= set(other):
                        continue
                    other_apex = next(j for j in other if j not in wall)
                    if _dot(normal, self.image(other_apex)) < 0:
                        shared = True
                        break
                if shared:
                    continue
                for j in range(1, self.r + 1):
                    if _dot(normal, self.image(j)) < 0:
                        return False
        return True
