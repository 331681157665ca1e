"""Exact covering LPs: min c.x s.t. x(delta(S)) >= f(S), 0 <= x <= 1.

The solver is a bounded-variable primal simplex over Fractions with
Bland's rule.  Because x = 1 is feasible for every covering LP we accept,
the all-ones point with all slacks basic is the starting basis, so no
phase one is needed.  At the optimum the nonbasic variables (edges at a
bound, cut rows with zero slack) form the basis certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .connectivity import all_violated_cuts, exhaustive_violated_cut
from .instances import mask_vertices, vertex_mask
from .requirements import PairwiseMax, Residual, RequirementFn, is_trivial

ZERO = Fraction(0)
ONE = Fraction(1)


class LPError(Exception):
    pass


class Infeasible(LPError):
    pass


class OracleUnavailable(LPError):
    pass


class TrivialRequirement(LPError):
    pass


@dataclass(frozen=True)
class Row:
    edges: frozenset
    rhs: int
    tag: frozenset  # the vertex set S this row came from


@dataclass(frozen=True)
class Tight:
    """One entry of a basis certificate: a tight cut row or a tight bound."""

    kind: str  # "cut" | "lower" | "upper"
    key: object  # row tag for cuts, edge id for bounds


@dataclass(frozen=True)
class CoveringLP:
    variables: tuple
    rows: tuple
    costs: Mapping

    @classmethod
    def build(cls, variables: Iterable[int], costs: Mapping, rows: Iterable[Row]) -> "CoveringLP":
        """Drop vacuous rows (rhs < 1) and deduplicate by edge set, keeping the
        largest right-hand side."""
        variables = tuple(sorted(variables))
        best: dict = {}
        for row in rows:
            if row.rhs < 1:
                continue
            old = best.get(row.edges)
            if old is None or row.rhs > old.rhs:
                best[row.edges] = row
        ordered = sorted(best.values(), key=lambda r: (sorted(r.edges), r.rhs))
        return cls(variables, tuple(ordered), {e: Fraction(costs[e]) for e in variables})

    def row_by_tag(self, tag) -> Row:
        for row in self.rows:
            if row.tag == tag:
                return row
        raise KeyError(tag)


@dataclass
class VertexSolution:
    x: dict
    objective_value: Fraction
    tight_rows: tuple
    basis_certificate: tuple
    lp: Optional[CoveringLP] = field(default=None, repr=False)

    def max_coordinate(self) -> Fraction:
        return max(self.x.values(), default=ZERO)

    def fractional_edges(self) -> list:
        return [e for e, v in sorted(self.x.items()) if 0 < v < 1]


def cut_row(ground, variables, f: RequirementFn, S) -> Row:
    mask = vertex_mask(S)
    edges = frozenset(e for e in variables if _crosses(ground.members(e), mask))
    return Row(edges, f.eval_mask(mask), frozenset(S))


def _crosses(members, mask):
    inside = sum(1 for a in members if mask >> a & 1)
    return 0 < inside < len(members)


# ---------------------------------------------------------------- simplex

DEGENERATE_LIMIT = 50


def solve_to_vertex(lp: CoveringLP) -> VertexSolution:
    m = len(lp.variables)
    R = len(lp.rows)
    col = {e: j for j, e in enumerate(lp.variables)}
    for row in lp.rows:
        if len(row.edges) < row.rhs:
            raise Infeasible(f"x = 1 violates the cut of {sorted(row.tag)}")

    # variable ids: 0..m-1 structural, m..m+R-1 slacks (s_i = a_i.x - b_i)
    basic = list(range(m, m + R))
    nonbasic = list(range(m))
    at_upper = [True] * m
    beta = [Fraction(len(row.edges) - row.rhs) for row in lp.rows]
    T = [[ONE if lp.variables[j] in row.edges else ZERO for j in range(m)] for row in lp.rows]
    d = [lp.costs[e] for e in lp.variables]

    def upper(var):
        return ONE if var < m else None

    # Dantzig pricing; after a run of degenerate pivots fall back to Bland's
    # lowest-index rule for good, which cannot cycle.
    degenerate_run, bland = 0, False
    while True:
        enter = None
        for k, var in enumerate(nonbasic):
            if (d[k] < 0 and not at_upper[k]) or (d[k] > 0 and at_upper[k]):
                if enter is None:
                    enter = k
                elif bland:
                    if var < nonbasic[enter]:
                        enter = k
                elif abs(d[k]) > abs(d[enter]) or (abs(d[k]) == abs(d[enter])
                                                   and var < nonbasic[enter]):
                    enter = k
        if enter is None:
            break
        k = enter
        direction = -1 if at_upper[k] else 1

        theta = upper(nonbasic[k])  # bound flip distance (None = unbounded)
        leave, leave_var = None, nonbasic[k]
        for i in range(R):
            rate = T[i][k] * direction
            if rate < 0:
                lim = beta[i] / -rate
            elif rate > 0 and basic[i] < m:
                lim = (ONE - beta[i]) / rate
            else:
                continue
            if theta is None or lim < theta or (lim == theta and basic[i] < leave_var):
                theta, leave, leave_var = lim, i, basic[i]
        if theta is None:
            raise LPError("unbounded LP (negative cost?)")
        degenerate_run = degenerate_run + 1 if theta == 0 else 0
        if degenerate_run > DEGENERATE_LIMIT:
            bland = True

        for i in range(R):
            if T[i][k]:
                beta[i] += T[i][k] * direction * theta
        if leave is None:
            at_upper[k] = not at_upper[k]
            continue

        r = leave
        leaving_to_upper = T[r][k] * direction > 0
        entering_value = (ONE if at_upper[k] else ZERO) + direction * theta
        piv = T[r][k]
        new_r = [-a / piv for a in T[r]]
        new_r[k] = 1 / piv
        for i in range(R):
            if i == r:
                continue
            coef = T[i][k]
            if coef:
                row = T[i]
                for j in range(m):
                    if new_r[j]:
                        row[j] += coef * new_r[j]
                row[k] = coef / piv
        T[r] = new_r
        dk = d[k]
        if dk:
            for j in range(m):
                if j != k and new_r[j]:
                    d[j] += dk * new_r[j]
            d[k] = dk / piv
        beta[r] = entering_value
        basic[r], nonbasic[k] = nonbasic[k], basic[r]
        at_upper[k] = leaving_to_upper

    values = [ZERO] * m
    for k, var in enumerate(nonbasic):
        if var < m:
            values[var] = ONE if at_upper[k] else ZERO
    for i, var in enumerate(basic):
        if var < m:
            values[var] = beta[i]
    x = {e: values[col[e]] for e in lp.variables}

    certificate = []
    for k, var in enumerate(nonbasic):
        if var < m:
            certificate.append(Tight("upper" if at_upper[k] else "lower", lp.variables[var]))
        else:
            certificate.append(Tight("cut", lp.rows[var - m].tag))
    tight = tuple(row.tag for row in lp.rows if sum(x[e] for e in row.edges) == row.rhs)
    objective = sum((lp.costs[e] * x[e] for e in lp.variables), ZERO)
    return VertexSolution(x, objective, tight, tuple(certificate), lp)


# ---------------------------------------------------------------- linear algebra

class RowSpace:
    """Incrementally maintained row echelon basis over the rationals."""

    def __init__(self, width: int):
        self.width = width
        self.pivots: dict = {}  # pivot column -> normalized row

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, vec) -> list:
        vec = [Fraction(a) for a in vec]
        for p, row in self.pivots.items():
            if vec[p]:
                c = vec[p]
                vec = [a - c * b for a, b in zip(vec, row)]
        return vec

    def add(self, vec) -> bool:
        """Add ``vec`` if independent; return whether it was added."""
        vec = self.reduce(vec)
        p = next((j for j, a in enumerate(vec) if a), None)
        if p is None:
            return False
        vec = [a / vec[p] for a in vec]
        for q, row in self.pivots.items():
            if row[p]:
                c = row[p]
                self.pivots[q] = [a - c * b for a, b in zip(row, vec)]
        self.pivots[p] = vec
        return True


def solve_square(A, b) -> Optional[list]:
    """Unique solution of A x = b, or None if A is singular."""
    if all(_integral(a) for row in A for a in row) and all(_integral(v) for v in b):
        return _solve_bareiss([[int(a) for a in row] + [int(v)] for row, v in zip(A, b)])
    n = len(A)
    M = [[Fraction(a) for a in row] + [Fraction(v)] for row, v in zip(A, b)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c]), None)
        if p is None:
            return None
        M[c], M[p] = M[p], M[c]
        pv = M[c][c]
        M[c] = [a / pv for a in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [a - f * bb for a, bb in zip(M[r], M[c])]
    return [M[r][n] for r in range(n)]


def _integral(v) -> bool:
    return isinstance(v, int) or (isinstance(v, Fraction) and v.denominator == 1)


def _solve_bareiss(M) -> Optional[list]:
    """Fraction-free elimination on an integer augmented matrix; exact."""
    n = len(M)
    prev = 1
    for k in range(n):
        p = next((r for r in range(k, n) if M[r][k]), None)
        if p is None:
            return None
        M[k], M[p] = M[p], M[k]
        pk = M[k]
        for i in range(k + 1, n):
            row = M[i]
            a = row[k]
            row[k] = 0
            for j in range(k + 1, n + 1):
                row[j] = (pk[k] * row[j] - a * pk[j]) // prev
        prev = pk[k]
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(M[i][n]) - sum((M[i][j] * x[j] for j in range(i + 1, n)), Fraction(0))
        x[i] = acc / M[i][i]
    return x


def certificate_system(cert: Iterable[Tight], lp: CoveringLP):
    col = {e: j for j, e in enumerate(lp.variables)}
    A, b = [], []
    for t in cert:
        vec = [ZERO] * len(lp.variables)
        if t.kind == "cut":
            row = lp.row_by_tag(t.key)
            for e in row.edges:
                vec[col[e]] = ONE
            rhs = Fraction(row.rhs)
        else:
            vec[col[t.key]] = ONE
            rhs = ONE if t.kind == "upper" else ZERO
        A.append(vec)
        b.append(rhs)
    return A, b


def certify_vertex(sol: VertexSolution, lp: Optional[CoveringLP] = None) -> Optional[str]:
    """Re-check feasibility and the basis certificate; None means pass."""
    lp = lp if lp is not None else sol.lp
    x = sol.x
    m = len(lp.variables)
    for e in lp.variables:
        if not 0 <= x[e] <= 1:
            return f"bound violated on edge {e}"
    for row in lp.rows:
        if sum((x[e] for e in row.edges), ZERO) < row.rhs:
            return f"infeasible: cut {sorted(row.tag)} below {row.rhs}"
    if len(sol.basis_certificate) != m:
        return f"certificate has {len(sol.basis_certificate)} entries, need {m}"
    try:
        A, b = certificate_system(sol.basis_certificate, lp)
    except KeyError as exc:
        return f"certificate names unknown row {exc}"
    space = RowSpace(m)
    for vec in A:
        space.add(vec)
    if space.rank < m:
        return f"rank {space.rank} < {m}"
    y = solve_square(A, b)
    if y != [x[e] for e in lp.variables]:
        return "not uniquely determined: certificate system has a different solution"
    return None


# ---------------------------------------------------------------- cutting planes

def _oracle(f: RequirementFn):
    if isinstance(f, PairwiseMax):
        return f.reqs, ()
    if isinstance(f, Residual) and isinstance(f.base, PairwiseMax):
        return f.base.reqs, f.fixed
    return None, None


def cutting_plane_solve(ground, f: RequirementFn, costs: Mapping, *,
                        variables: Optional[Iterable[int]] = None,
                        warm_tags: Iterable[frozenset] = (),
                        history: Optional[list] = None):
    """Solve the covering LP over ``variables`` (default: all edges of ground)
    by separation.  Returns ``(VertexSolution, rows_generated)``; the final
    oracle pass certifies that no cut is violated.

    Pairwise requirements (and residuals of them) are separated by per-pair
    max-flow; any other function falls back to enumerating all cuts, which
    is only allowed for n <= 10.
    """
    if is_trivial(f):
        raise TrivialRequirement("requirement function is trivial")
    variables = tuple(sorted(range(ground.num_edges) if variables is None else variables))
    reqs, fixed_members = _oracle(f)
    if reqs is None and ground.n > 10:
        raise OracleUnavailable("exhaustive separation needs n <= 10")

    tags = {frozenset(t) for t in warm_tags}
    generated = 0
    last = None
    while True:
        rows = [cut_row(ground, variables, f, S) for S in sorted(tags, key=sorted)]
        lp = CoveringLP.build(variables, costs, rows)
        sol = solve_to_vertex(lp)
        if last is not None and sol.objective_value < last:
            raise LPError("objective decreased after adding cuts")
        last = sol.objective_value
        if history is not None:
            history.append(sol.objective_value)
        if reqs is not None:
            found = [S for S, _ in all_violated_cuts(ground, sol.x, fixed_members, reqs)]
        else:
            hit = exhaustive_violated_cut(ground, sol.x, (), f)
            found = [] if hit is None else [hit[0]]
        new = [S for S in found if S not in tags]
        if not found:
            return sol, generated
        if not new:
            raise LPError("oracle returned a cut already in the LP")
        tags.update(new)
        generated += len(new)


def full_cut_lp(ground, f: RequirementFn, costs, variables=None) -> CoveringLP:
    """The LP with every cut row written out (small n)."""
    variables = tuple(sorted(range(ground.num_edges) if variables is None else variables))
    rows = [cut_row(ground, variables, f, mask_vertices(m)) for m in range(1, (1 << ground.n) - 1)]
    return CoveringLP.build(variables, costs, rows)
