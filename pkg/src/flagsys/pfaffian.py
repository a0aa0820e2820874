"""Derived flags, characteristic systems, growth vectors and intersections.

Two computation regimes coexist deliberately:

* generic:  rank/kernel over the fraction field (Bareiss), valid off a
  proper algebraic subset.  Used for derived systems, generic characteristic
  systems, annihilator distributions, intersections.
* pointwise: exact evaluation first, then rational linear algebra.  Used for
  everything anchored at a point (classes, growth vectors, the signature of
  a flag at the origin).  Singular loci are precisely where the two regimes
  disagree, so pointwise results are never inferred from generic ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .algebra import (
    QQ,
    Chart,
    DegenerateSystemError,
    DomainError,
    Poly,
    PolyMatrix,
    qq_kernel,
    qq_rank,
    qq_rref,
    qq_spans_equal,
    rank_check_seed,
    sample_rational_points,
)
from .calculus import (
    OneForm,
    VectorField,
    detect_leading,
    exterior_derivative,
    interior_product,
    lie_bracket,
    reduce_mod_system,
)

RANK_CHECK_POINTS = 3


@dataclass(frozen=True)
class PfaffianSystem:
    """An ordered list of polynomial 1-forms, pointwise independent at 0.

    `warnings` carries regularity diagnostics (non-constant generic rank of a
    structure tensor, rank jumps of an intersection, ...) attached by the
    operations that detected them.
    """

    chart: Chart
    generators: tuple[OneForm, ...]
    warnings: tuple[str, ...] = ()

    @classmethod
    def make(
        cls,
        chart: Chart,
        generators: Sequence[OneForm],
        warnings: Sequence[str] = (),
        validate: bool = True,
    ) -> "PfaffianSystem":
        generators = tuple(generators)
        for g in generators:
            if g.chart != chart:
                raise DomainError("generator on wrong chart")
        if validate and generators:
            rows = [g.evaluate(chart.origin()) for g in generators]
            if qq_rank(rows) < len(generators):
                raise DegenerateSystemError(
                    "generators linearly dependent at the origin"
                )
        return cls(chart, generators, tuple(warnings))

    @property
    def rank(self) -> int:
        return len(self.generators)

    def coefficient_matrix(self) -> PolyMatrix:
        return PolyMatrix.from_rows(
            self.chart, [list(g.coeffs) for g in self.generators]
        )

    def evaluate(self, point) -> list[list[QQ]]:
        return [list(g.evaluate(point)) for g in self.generators]

    def with_warnings(self, extra: Sequence[str]) -> "PfaffianSystem":
        return PfaffianSystem(self.chart, self.generators, self.warnings + tuple(extra))


@dataclass(frozen=True)
class DerivedFlag:
    """The derived sequence S = S_0 > S_1 > ... until stationary."""

    systems: tuple[PfaffianSystem, ...]
    ranks: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.systems) - 1

    @property
    def is_flag(self) -> bool:
        """Ranks drop by exactly one each step, terminating at zero."""
        r = self.ranks
        return r[-1] == 0 and all(a - b == 1 for a, b in zip(r, r[1:]))


@dataclass(frozen=True)
class GrowthVector:
    dims: tuple[int, ...]
    truncated: bool = False


@dataclass(frozen=True)
class CharReport:
    char_system: PfaffianSystem
    char_class: int
    cauchy_dim: int


# -- structure tensor and derived systems ------------------------------------


def _leading_substitution(system: PfaffianSystem, leading: tuple[int, ...]):
    """Map each leading differential to its reduction modulo the system:
    dx_{i_nu} == -(w^nu - dx_{i_nu}) as 1-forms, recursively resolved so the
    image involves non-leading differentials only."""
    chart = system.chart
    by_slot = {idx: g for idx, g in zip(leading, system.generators)}
    cache: dict[int, OneForm] = {}

    def resolve(i: int) -> OneForm:
        if i not in by_slot:
            return OneForm.dx(chart, i)
        if i in cache:
            return cache[i]
        g = by_slot[i]
        pivot = g.coeff(i).constant_value()
        rest = OneForm.zero(chart)
        for j in range(1, chart.dim + 1):
            if j == i:
                continue
            c = g.coeff(j)
            if c.is_zero:
                continue
            rest = rest + resolve(j).scale(c * (-1 / pivot))
        cache[i] = rest
        return rest

    return {i: resolve(i) for i in leading}


def martinet_matrix(system: PfaffianSystem):
    """Coefficient matrix of the structure tensor d: S -> Lambda^2(T*/S).

    Row nu holds the reduced 2-form d(w^nu) mod S in the basis of wedge pairs
    of non-leading differentials.  Returns (matrix, pair_basis, leading).
    """
    chart = system.chart
    leading = detect_leading(system.generators)
    subs = _leading_substitution(system, leading)
    non_leading = [i for i in range(1, chart.dim + 1) if i not in leading]
    pairs = [(a, b) for ai, a in enumerate(non_leading) for b in non_leading[ai + 1 :]]
    pair_index = {p: k for k, p in enumerate(pairs)}
    rows = []
    for g in system.generators:
        dg = exterior_derivative(g)
        row = [Poly.zero(chart) for _ in pairs]
        for (i, j), p in dg.coeffs.items():
            left = subs.get(i, OneForm.dx(chart, i))
            right = subs.get(j, OneForm.dx(chart, j))
            for a in non_leading:
                la = left.coeff(a)
                if la.is_zero:
                    continue
                for b in non_leading:
                    if a == b:
                        continue
                    rb = right.coeff(b)
                    if rb.is_zero:
                        continue
                    coeff = p * la * rb
                    key = (a, b) if a < b else (b, a)
                    if a > b:
                        coeff = -coeff
                    k = pair_index[key]
                    row[k] = row[k] + coeff
        rows.append(row)
    return PolyMatrix.from_rows(chart, rows), pairs, leading


def _regularity_warnings(matrix: PolyMatrix, generic_rank: int, what: str) -> list[str]:
    """Compare the generic rank with pointwise ranks at the origin and at
    seeded sample points; report anomalies instead of failing."""
    if not matrix.rows or not matrix.rows[0]:
        return []
    chart_dim = matrix.chart.dim
    warnings = []
    origin_rank = qq_rank(matrix.evaluate((QQ(0),) * chart_dim))
    if origin_rank != generic_rank:
        warnings.append(
            f"{what}: rank {origin_rank} at the origin != generic rank {generic_rank}"
        )
    for pt in sample_rational_points(chart_dim, RANK_CHECK_POINTS, rank_check_seed()):
        if qq_rank(matrix.evaluate(pt)) != generic_rank:
            warnings.append(f"{what}: rank drop at sampled point {pt}")
    return warnings


def derived_system(system: PfaffianSystem) -> PfaffianSystem:
    """Kernel of the structure tensor: the largest subsystem whose exterior
    derivatives stay in the ideal of the system."""
    if system.rank == 0:
        return system
    matrix, _, _ = martinet_matrix(system)
    generic_rank = matrix.rank_generic()
    warnings = _regularity_warnings(matrix, generic_rank, "structure tensor")
    nrows, ncols = matrix.shape
    transpose = PolyMatrix.from_rows(
        system.chart,
        [[matrix.rows[i][j] for i in range(nrows)] for j in range(ncols)],
    )
    kernel = transpose.kernel_generic()
    if not transpose.rows:
        # image lives in a zero-dimensional space: everything is derived
        kernel = [
            tuple(
                Poly.const(system.chart, 1) if j == i else Poly.zero(system.chart)
                for j in range(nrows)
            )
            for i in range(nrows)
        ]
    new_gens = []
    for vec in kernel:
        form = OneForm.zero(system.chart)
        for coeff, g in zip(vec, system.generators):
            if not coeff.is_zero:
                form = form + g.scale(coeff)
        new_gens.append(form)
    return PfaffianSystem.make(
        system.chart, new_gens, warnings=system.warnings + tuple(warnings)
    )


def derived_flag(system: PfaffianSystem) -> DerivedFlag:
    systems = [system]
    while True:
        current = systems[-1]
        if current.rank == 0:
            break
        nxt = derived_system(current)
        if nxt.rank == current.rank:
            break
        if nxt.rank > current.rank:
            raise DomainError("derived system grew; non-constant structure rank")
        systems.append(nxt)
    return DerivedFlag(tuple(systems), tuple(s.rank for s in systems))


def is_integrable(system: PfaffianSystem) -> bool:
    if system.rank == 0:
        return True
    return derived_system(system).rank == system.rank


# -- Cauchy characteristics ---------------------------------------------------


def _contraction_rows(system: PfaffianSystem):
    """Linear conditions (rows of Poly coefficients in the unknown field
    components a_1..a_n) expressing: a annihilates the system, and each
    i(a)dw^nu reduces to zero modulo the system."""
    chart = system.chart
    n = chart.dim
    leading = detect_leading(system.generators) if system.generators else ()
    rows: list[list[Poly]] = []
    for g in system.generators:
        rows.append(list(g.coeffs))
    for g in system.generators:
        dg = exterior_derivative(g)
        residual_rows = [[Poly.zero(chart) for _ in range(n)] for _ in range(n)]
        for m in range(1, n + 1):
            contracted = interior_product(VectorField.d(chart, m), dg)
            if contracted.is_zero:
                continue
            res = reduce_mod_system(contracted, system.generators, leading).residual
            for j in range(1, n + 1):
                residual_rows[j - 1][m - 1] = res.coeff(j)
        for j in range(1, n + 1):
            if any(not p.is_zero for p in residual_rows[j - 1]):
                rows.append(residual_rows[j - 1])
    return rows


def cauchy_system_generic(system: PfaffianSystem) -> list[VectorField]:
    """Polynomial basis of the Cauchy characteristic distribution."""
    if system.rank == 0:
        return [VectorField.d(system.chart, i) for i in range(1, system.chart.dim + 1)]
    rows = _contraction_rows(system)
    matrix = PolyMatrix.from_rows(system.chart, rows)
    return [VectorField(system.chart, vec) for vec in matrix.kernel_generic()]


def char_system_generic(system: PfaffianSystem) -> PfaffianSystem:
    """The characteristic system: annihilator of the Cauchy distribution."""
    fields = cauchy_system_generic(system)
    if not fields:
        gens = [OneForm.dx(system.chart, i) for i in range(1, system.chart.dim + 1)]
        return PfaffianSystem.make(system.chart, gens)
    matrix = PolyMatrix.from_rows(system.chart, [list(f.coeffs) for f in fields])
    gens = [OneForm(system.chart, vec) for vec in matrix.kernel_generic()]
    return PfaffianSystem.make(system.chart, gens)


def cauchy_space_at(system: PfaffianSystem, point) -> list[tuple[QQ, ...]]:
    """Exact basis of the pointwise Cauchy characteristic space at `point`:
    vectors annihilating the system whose contraction with every d(generator)
    falls back into the evaluated span."""
    chart = system.chart
    n = chart.dim
    point = tuple(QQ(v) for v in point)
    if len(point) != n:
        raise DomainError("point dimension != chart dimension")
    if system.rank == 0:
        return [tuple(QQ(1) if j == i else QQ(0) for j in range(n)) for i in range(n)]
    w = system.evaluate(point)
    ann = qq_kernel(w, n)
    if not ann:
        return []
    conditions: list[list[QQ]] = []
    for g in system.generators:
        omega = exterior_derivative(g).evaluate(point)
        # row space test: i(X)dw in span(w)  <=>  (X^T omega) . z = 0 for z in ker(w)
        for z in ann:
            row = []
            for t in ann:
                val = QQ(0)
                for a in range(n):
                    if t[a] == 0:
                        continue
                    inner = QQ(0)
                    for b in range(n):
                        if omega[a][b] != 0 and z[b] != 0:
                            inner += omega[a][b] * z[b]
                    val += t[a] * inner
                row.append(val)
            conditions.append(row)
    sol = qq_kernel(conditions, len(ann)) if conditions else [
        tuple(QQ(1) if j == i else QQ(0) for j in range(len(ann))) for i in range(len(ann))
    ]
    basis = []
    for t in sol:
        vec = [QQ(0)] * n
        for coeff, z in zip(t, ann):
            for a in range(n):
                vec[a] += coeff * z[a]
        basis.append(tuple(vec))
    return basis


def char_space_at(system: PfaffianSystem, point) -> list[tuple[QQ, ...]]:
    """Covector basis of the pointwise characteristic system (annihilator of
    the Cauchy space)."""
    cauchy = cauchy_space_at(system, point)
    if not cauchy:
        n = system.chart.dim
        return [tuple(QQ(1) if j == i else QQ(0) for j in range(n)) for i in range(n)]
    return qq_kernel(cauchy, system.chart.dim)


def characteristic_report(system: PfaffianSystem, point) -> CharReport:
    cauchy = cauchy_space_at(system, point)
    cauchy_dim = len(cauchy)
    return CharReport(
        char_system=char_system_generic(system),
        char_class=system.chart.dim - cauchy_dim,
        cauchy_dim=cauchy_dim,
    )


# -- growth vectors -----------------------------------------------------------


def annihilator_distribution(system: PfaffianSystem) -> list[VectorField]:
    matrix = system.coefficient_matrix()
    return [VectorField(system.chart, v) for v in matrix.kernel_generic()]


def small_growth_vector(
    system: PfaffianSystem, point, depth: int | None = None
) -> GrowthVector:
    """Dimensions at `point` of the bracket-generated filtration of the
    annihilator 2-plane field."""
    chart = system.chart
    n = chart.dim
    point = tuple(QQ(v) for v in point)
    if depth is None:
        depth = n + 2
    generators = annihilator_distribution(system)
    if len(generators) != 2:
        raise DomainError(
            f"annihilator distribution has generic rank {len(generators)}, expected 2"
        )
    layers: list[list[VectorField]] = [generators]
    all_fields: list[VectorField] = list(generators)
    rows = [list(f.evaluate(point)) for f in all_fields]
    dims = [qq_rank(rows)]
    while dims[-1] < n and len(dims) < depth:
        new_layer = []
        for g in generators:
            for h in layers[-1]:
                new_layer.append(lie_bracket(g, h))
        layers.append(new_layer)
        all_fields.extend(new_layer)
        rows.extend(f.evaluate(point) for f in new_layer)
        dims.append(qq_rank(rows))
    return GrowthVector(tuple(dims), truncated=dims[-1] < n and len(dims) >= depth)


# -- intersections and the origin signature -----------------------------------


def intersect(a: PfaffianSystem, b: PfaffianSystem) -> PfaffianSystem:
    """Generators of the generic intersection of two spans."""
    if a.chart != b.chart:
        raise DomainError("systems on different charts")
    chart = a.chart
    if a.rank == 0 or b.rank == 0:
        return PfaffianSystem.make(chart, [])
    ra = a.coefficient_matrix().rank_generic()
    rb = b.coefficient_matrix().rank_generic()
    stacked_rows = [list(g.coeffs) for g in a.generators] + [
        list(g.coeffs) for g in b.generators
    ]
    stacked = PolyMatrix.from_rows(chart, stacked_rows)
    rs = stacked.rank_generic()
    if rs == rb:
        return a  # a is contained in b generically
    if rs == ra:
        return b
    # solve u*A = v*B: right kernel of the transpose of [[A], [-B]]
    signed_rows = [list(g.coeffs) for g in a.generators] + [
        [-p for p in g.coeffs] for g in b.generators
    ]
    transpose = [
        [signed_rows[i][j] for i in range(len(signed_rows))]
        for j in range(chart.dim)
    ]
    lk = PolyMatrix.from_rows(chart, transpose).kernel_generic()
    gens = []
    for vec in lk:
        form = OneForm.zero(chart)
        for coeff, g in zip(vec[: a.rank], a.generators):
            if not coeff.is_zero:
                form = form + g.scale(coeff)
        if not form.is_zero:
            gens.append(form)
    warnings: list[str] = []
    matrix = PolyMatrix.from_rows(chart, [list(g.coeffs) for g in gens])
    generic_rank = matrix.rank_generic() if gens else 0
    if gens:
        warnings = _regularity_warnings(matrix, generic_rank, "intersection")
    try:
        return PfaffianSystem.make(chart, gens, warnings=warnings)
    except DegenerateSystemError:
        return PfaffianSystem.make(
            chart,
            gens,
            warnings=list(warnings) + ["intersection rank drops at the origin"],
            validate=False,
        )


def char_signature(system: PfaffianSystem) -> list[bool]:
    """For a flag of length l >= 3: the sequence, over k = 0..l-3, of the
    origin tests span(S_k) != span(char system of S_{k+2})."""
    flag = derived_flag(system)
    if not flag.is_flag:
        raise DomainError("characteristic signature needs a flag system")
    ell = flag.length
    if ell < 3:
        raise DomainError("characteristic signature needs length >= 3")
    origin = system.chart.origin()
    out = []
    for k in range(0, ell - 2):
        s_k = flag.systems[k].evaluate(origin)
        chi = char_space_at(flag.systems[k + 2], origin)
        out.append(not qq_spans_equal(s_k, chi))
    return out


def json_report(system: PfaffianSystem, point=None) -> dict:
    """Combined machine-readable report for a system at a point (default 0)."""
    point = system.chart.origin() if point is None else tuple(QQ(v) for v in point)
    flag = derived_flag(system)
    report = {
        "ranks": list(flag.ranks),
        "length": flag.length,
        "class": characteristic_report(system, point).char_class,
        "growth_vector": list(small_growth_vector(system, point).dims),
    }
    if flag.is_flag and flag.length >= 3:
        report["signature"] = char_signature(system)
    else:
        report["signature"] = []
    return report
