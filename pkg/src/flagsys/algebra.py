"""Exact rational and sparse multivariate polynomial arithmetic.

Coefficients are `fractions.Fraction` throughout; there is no floating point
anywhere in this package.  A polynomial is a map from exponent tuples to
nonzero rational coefficients, attached to a named coordinate chart:

    x1^2*x3 + 3/2  on Chart(x1, x2, x3)  ->  {(2, 0, 1): 1, (0, 0, 0): 3/2}

Variable indices are 1-based in every public signature, matching the chart
naming x1..xn.  The canonical term order is graded lexicographic (total
degree first, then exponent tuple, x1 most significant).

The module also provides exact linear algebra in two flavours:

* pointwise, over the rationals (`qq_rref`, `qq_kernel`, ...), used whenever
  a computation is anchored at a specific point;
* generic, over the fraction field of the polynomial ring, via Bareiss
  fraction-free elimination (`PolyMatrix.rank_generic`, `kernel_generic`),
  used for constant-rank computations away from singular loci.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator, Mapping, Sequence

QQ = Fraction
Mono = tuple  # exponent tuple, one entry per chart variable

DEFAULT_SEED = 271828


class FlagError(Exception):
    """Base class for all errors raised by this package."""


class ChartMismatchError(FlagError):
    pass


class DegenerateSystemError(FlagError):
    pass


class CodeError(FlagError):
    pass


class DomainError(FlagError):
    pass


class ContractViolation(FlagError):
    pass


class TruncationError(FlagError):
    pass


def rank_check_seed() -> int:
    """Seed for the deterministic random-point rank cross-checks.

    The environment variable FLAG_SEED overrides the built-in default, so a
    report produced with a different sampling seed is reproducible from its
    command line alone.
    """
    raw = os.environ.get("FLAG_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise DomainError(f"FLAG_SEED must be an integer, got {raw!r}") from exc


def sample_rational_points(
    dim: int,
    count: int,
    seed: int | None = None,
    denom_max: int = 100,
    nonzero: bool = False,
) -> list[tuple[QQ, ...]]:
    """Deterministic sample of rational points with bounded denominators."""
    rng = random.Random(rank_check_seed() if seed is None else seed)
    points = []
    for _ in range(count):
        pt = []
        for _ in range(dim):
            num = rng.randint(-denom_max, denom_max)
            if nonzero and num == 0:
                num = rng.randint(1, denom_max)
            pt.append(QQ(num, rng.randint(1, denom_max)))
        points.append(tuple(pt))
    return points


@dataclass(frozen=True)
class Chart:
    """A coordinate chart: an ordered tuple of unique variable names."""

    names: tuple[str, ...]

    def __post_init__(self):
        if len(self.names) < 1:
            raise DomainError("chart needs at least one variable")
        if len(set(self.names)) != len(self.names):
            raise DomainError("chart variable names must be unique")

    @classmethod
    def standard(cls, dim: int, prefix: str = "x") -> "Chart":
        return cls(tuple(f"{prefix}{i}" for i in range(1, dim + 1)))

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        """1-based index of a variable name."""
        try:
            return self.names.index(name) + 1
        except ValueError as exc:
            raise ChartMismatchError(f"no variable {name!r} in chart") from exc

    def origin(self) -> tuple[QQ, ...]:
        return (QQ(0),) * self.dim


def mono_degree(m: Mono) -> int:
    return sum(m)


def grlex_key(m: Mono) -> tuple:
    return (sum(m), m)


def monomials_upto(nvars: int, max_degree: int) -> Iterator[Mono]:
    """All exponent tuples with total degree <= max_degree, graded-lex order."""

    def rec(remaining: int, budget: int):
        if remaining == 1:
            for d in range(budget + 1):
                yield (d,)
            return
        for d in range(budget + 1):
            for rest in rec(remaining - 1, budget - d):
                yield (d,) + rest

    monos = list(rec(nvars, max_degree))
    monos.sort(key=grlex_key)
    return iter(monos)


def _check_chart(a: "Poly", b: "Poly") -> None:
    if a.chart != b.chart:
        raise ChartMismatchError("polynomials live on different charts")


@dataclass(frozen=True)
class Poly:
    """Sparse multivariate polynomial with exact rational coefficients.

    `terms` never stores zero coefficients; the zero polynomial is the empty
    map.  Instances are immutable by convention: no method mutates `terms`.
    """

    chart: Chart
    terms: dict = field(default_factory=dict)

    # -- constructors ------------------------------------------------------

    @classmethod
    def make(cls, chart: Chart, terms: Mapping[Mono, QQ]) -> "Poly":
        clean = {m: QQ(c) for m, c in terms.items() if c != 0}
        for m in clean:
            if len(m) != chart.dim:
                raise ChartMismatchError("exponent tuple length != chart dimension")
        return cls(chart, clean)

    @classmethod
    def zero(cls, chart: Chart) -> "Poly":
        return cls(chart, {})

    @classmethod
    def const(cls, chart: Chart, value) -> "Poly":
        value = QQ(value)
        if value == 0:
            return cls.zero(chart)
        return cls(chart, {(0,) * chart.dim: value})

    @classmethod
    def variable(cls, chart: Chart, i: int) -> "Poly":
        """The polynomial x_i (1-based index)."""
        if not 1 <= i <= chart.dim:
            raise ChartMismatchError(f"variable index {i} out of range 1..{chart.dim}")
        exp = [0] * chart.dim
        exp[i - 1] = 1
        return cls(chart, {tuple(exp): QQ(1)})

    @classmethod
    def monomial(cls, chart: Chart, mono: Mono, coeff=1) -> "Poly":
        return cls.make(chart, {tuple(mono): QQ(coeff)})

    # -- basic queries -----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; the zero polynomial reports -1."""
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    def leading(self) -> tuple[Mono, QQ]:
        """Graded-lex leading (monomial, coefficient); error on zero."""
        if not self.terms:
            raise DomainError("zero polynomial has no leading term")
        m = max(self.terms, key=grlex_key)
        return m, self.terms[m]

    def constant_value(self) -> QQ | None:
        """The rational value if this polynomial is constant, else None."""
        if not self.terms:
            return QQ(0)
        if len(self.terms) == 1:
            m, c = next(iter(self.terms.items()))
            if sum(m) == 0:
                return c
        return None

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        _check_chart(self, other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            acc = out.get(m, QQ(0)) + c
            if acc == 0:
                out.pop(m, None)
            else:
                out[m] = acc
        return Poly(self.chart, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.chart, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        other = self._coerce(other)
        _check_chart(self, other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                acc = out.get(m, QQ(0)) + c1 * c2
                if acc == 0:
                    out.pop(m, None)
                else:
                    out[m] = acc
        return Poly(self.chart, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise DomainError("negative polynomial power")
        result = Poly.const(self.chart, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, QQ)):
            return Poly.const(self.chart, other)
        raise TypeError(f"cannot combine Poly with {type(other).__name__}")

    # -- calculus and evaluation -------------------------------------------

    def partial(self, i: int) -> "Poly":
        """Exact partial derivative with respect to x_i (1-based)."""
        if not 1 <= i <= self.chart.dim:
            raise ChartMismatchError(f"variable index {i} out of range 1..{self.chart.dim}")
        out: dict = {}
        k = i - 1
        for m, c in self.terms.items():
            e = m[k]
            if e == 0:
                continue
            dm = m[:k] + (e - 1,) + m[k + 1 :]
            out[dm] = out.get(dm, QQ(0)) + c * e
        return Poly(self.chart, {m: c for m, c in out.items() if c != 0})

    def evaluate(self, point: Sequence[QQ]) -> QQ:
        if len(point) != self.chart.dim:
            raise ChartMismatchError("point dimension != chart dimension")
        total = QQ(0)
        for m, c in self.terms.items():
            val = c
            for e, x in zip(m, point):
                if e:
                    val *= x**e
            total += val
        return total

    def substitute(self, values: Mapping[int, QQ]) -> "Poly":
        """Partially evaluate: fix x_i = values[i] for the given 1-based indices."""
        out: dict = {}
        for m, c in self.terms.items():
            coeff = c
            new_m = list(m)
            for i, v in values.items():
                e = m[i - 1]
                if e:
                    coeff *= QQ(v) ** e
                new_m[i - 1] = 0
            if coeff == 0:
                continue
            key = tuple(new_m)
            acc = out.get(key, QQ(0)) + coeff
            if acc == 0:
                out.pop(key, None)
            else:
                out[key] = acc
        return Poly(self.chart, out)

    def depends_on(self, i: int) -> bool:
        return any(m[i - 1] for m in self.terms)

    def truncate_degree(self, max_degree: int, upto_var: int | None = None) -> "Poly":
        """Drop terms whose degree (in variables 1..upto_var) exceeds max_degree."""
        n = self.chart.dim if upto_var is None else upto_var
        return Poly(
            self.chart,
            {m: c for m, c in self.terms.items() if sum(m[:n]) <= max_degree},
        )

    def extend_to(self, chart: Chart) -> "Poly":
        """Re-embed into a chart that contains all current variables by name."""
        if chart == self.chart:
            return self
        positions = [chart.index(name) - 1 for name in self.chart.names]
        out = {}
        for m, c in self.terms.items():
            exp = [0] * chart.dim
            for pos, e in zip(positions, m):
                exp[pos] = e
            out[tuple(exp)] = c
        return Poly(chart, out)

    # -- text format -------------------------------------------------------

    def to_text(self) -> str:
        """Canonical form `c*x1^a*x2^b + ...`, graded-lex descending."""
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=grlex_key, reverse=True):
            c = self.terms[m]
            factors = []
            for idx, e in enumerate(m):
                if e == 0:
                    continue
                name = self.chart.names[idx]
                factors.append(name if e == 1 else f"{name}^{e}")
            body = "*".join(factors)
            mag = abs(c)
            if not body:
                core = _fmt_q(mag)
            elif mag == 1:
                core = body
            else:
                core = f"{_fmt_q(mag)}*{body}"
            parts.append(("- " if c < 0 else "+ ") + core)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"Poly({self.to_text()!r})"


def _fmt_q(q: QQ) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_poly(chart: Chart, text: str) -> Poly:
    """Parse the textual polynomial format; whitespace is insignificant."""
    compact = text.replace(" ", "").replace("\t", "")
    if not compact:
        raise DomainError("empty polynomial text")
    if compact == "0":
        return Poly.zero(chart)
    # split into signed terms
    terms: dict = {}
    i = 0
    sign = 1
    if compact[0] in "+-":
        sign = -1 if compact[0] == "-" else 1
        i = 1
    start = i
    chunks: list[tuple[int, str]] = []
    while i <= len(compact):
        if i == len(compact) or compact[i] in "+-":
            if i == start:
                raise DomainError(f"malformed polynomial text: {text!r}")
            chunks.append((sign, compact[start:i]))
            if i < len(compact):
                sign = -1 if compact[i] == "-" else 1
            start = i + 1
        i += 1
    for sgn, chunk in chunks:
        coeff = QQ(sgn)
        exp = [0] * chart.dim
        for factor in chunk.split("*"):
            if not factor:
                raise DomainError(f"malformed term in {text!r}")
            if factor[0].isdigit():
                coeff *= QQ(factor)
                continue
            if "^" in factor:
                name, _, power = factor.partition("^")
                e = int(power)
            else:
                name, e = factor, 1
            exp[chart.index(name) - 1] += e
        key = tuple(exp)
        acc = terms.get(key, QQ(0)) + coeff
        if acc == 0:
            terms.pop(key, None)
        else:
            terms[key] = acc
    return Poly(chart, terms)


def divexact(f: Poly, g: Poly) -> Poly:
    """Exact division f/g in the polynomial ring; raises if not exact."""
    _check_chart(f, g)
    if g.is_zero:
        raise DomainError("division by the zero polynomial")
    if f.is_zero:
        return f
    gm, gc = g.leading()
    rem = dict(f.terms)
    quot: dict = {}
    while rem:
        rm = max(rem, key=grlex_key)
        mono = tuple(a - b for a, b in zip(rm, gm))
        if any(e < 0 for e in mono):
            raise DomainError("inexact polynomial division")
        coeff = rem[rm] / gc
        quot[mono] = coeff
        for m2, c2 in g.terms.items():
            key = tuple(a + b for a, b in zip(mono, m2))
            acc = rem.get(key, QQ(0)) - coeff * c2
            if acc == 0:
                rem.pop(key, None)
            else:
                rem[key] = acc
    return Poly(f.chart, quot)


def _strip_common_factor(vec: list[Poly]) -> list[Poly]:
    """Normalize a polynomial vector: pull out the common monomial factor and
    rational content, and make the graded-lex leading coefficient positive."""
    nonzero = [p for p in vec if not p.is_zero]
    if not nonzero:
        return vec
    chart = nonzero[0].chart
    n = chart.dim
    common = [min(m[k] for p in nonzero for m in p.terms) for k in range(n)]
    nums: list[int] = []
    dens: list[int] = []
    for p in nonzero:
        for c in p.terms.values():
            nums.append(c.numerator)
            dens.append(c.denominator)
    num_gcd = 0
    for v in nums:
        num_gcd = gcd(num_gcd, abs(v))
    den_lcm = 1
    for v in dens:
        den_lcm = den_lcm * v // gcd(den_lcm, v)
    scale = QQ(den_lcm, num_gcd if num_gcd else 1)
    lead = max(
        ((p.leading(), idx) for idx, p in enumerate(vec) if not p.is_zero),
        key=lambda item: grlex_key(item[0][0]),
    )
    if lead[0][1] < 0:
        scale = -scale
    out = []
    for p in vec:
        out.append(
            Poly(
                chart,
                {
                    tuple(a - b for a, b in zip(m, common)): c * scale
                    for m, c in p.terms.items()
                },
            )
        )
    return out


@dataclass(frozen=True)
class PolyMatrix:
    """Rectangular matrix of polynomials on a shared chart."""

    chart: Chart
    rows: tuple[tuple[Poly, ...], ...]

    @classmethod
    def from_rows(cls, chart: Chart, rows: Iterable[Iterable[Poly]]) -> "PolyMatrix":
        rows = tuple(tuple(r) for r in rows)
        if rows:
            width = len(rows[0])
            for r in rows:
                if len(r) != width:
                    raise DomainError("ragged matrix")
                for p in r:
                    if p.chart != chart:
                        raise ChartMismatchError("matrix entry on wrong chart")
        return cls(chart, rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def evaluate(self, point: Sequence[QQ]) -> list[list[QQ]]:
        return [[p.evaluate(point) for p in row] for row in self.rows]

    def _forward_eliminate(self):
        """Bareiss fraction-free forward elimination.

        Pivots are chosen among nonzero candidates by smallest graded-lex
        leading monomial; ties break to the lowest row, then column, index.
        Returns (rank, pivot_rows, pivot_cols) into the original matrix.
        """
        m, n = self.shape
        a = [[p for p in row] for row in self.rows]
        row_ids = list(range(m))
        col_ids = list(range(n))
        prev = Poly.const(self.chart, 1)
        rank = 0
        pivot_rows: list[int] = []
        pivot_cols: list[int] = []
        while rank < m and rank < n:
            best = None
            for r in range(rank, m):
                for c in range(rank, n):
                    p = a[r][c]
                    if p.is_zero:
                        continue
                    key = (grlex_key(p.leading()[0]), row_ids[r], col_ids[c])
                    if best is None or key < best[0]:
                        best = (key, r, c)
            if best is None:
                break
            _, br, bc = best
            a[rank], a[br] = a[br], a[rank]
            row_ids[rank], row_ids[br] = row_ids[br], row_ids[rank]
            for r in range(m):
                a[r][rank], a[r][bc] = a[r][bc], a[r][rank]
            col_ids[rank], col_ids[bc] = col_ids[bc], col_ids[rank]
            piv = a[rank][rank]
            for r in range(rank + 1, m):
                head = a[r][rank]
                for c in range(rank + 1, n):
                    a[r][c] = divexact(a[r][c] * piv - head * a[rank][c], prev)
                a[r][rank] = Poly.zero(self.chart)
            prev = piv
            pivot_rows.append(row_ids[rank])
            pivot_cols.append(col_ids[rank])
            rank += 1
        return rank, pivot_rows, pivot_cols

    def rank_generic(self) -> int:
        """Rank over the field of rational functions (generic pointwise rank)."""
        if not self.rows or not self.rows[0]:
            return 0
        rank, _, _ = self._forward_eliminate()
        return rank

    def det_bareiss(self) -> Poly:
        """Determinant of a square matrix by fraction-free elimination."""
        m, n = self.shape
        if m != n:
            raise DomainError("determinant of a non-square matrix")
        if m == 0:
            return Poly.const(self.chart, 1)
        a = [[p for p in row] for row in self.rows]
        prev = Poly.const(self.chart, 1)
        sign = 1
        for k in range(m):
            if a[k][k].is_zero:
                for r in range(k + 1, m):
                    if not a[r][k].is_zero:
                        a[k], a[r] = a[r], a[k]
                        sign = -sign
                        break
                else:
                    return Poly.zero(self.chart)
            piv = a[k][k]
            for r in range(k + 1, m):
                head = a[r][k]
                for c in range(k + 1, m):
                    a[r][c] = divexact(a[r][c] * piv - head * a[k][c], prev)
                a[r][k] = Poly.zero(self.chart)
            prev = piv
        det = a[m - 1][m - 1]
        return -det if sign < 0 else det

    def kernel_generic(self) -> list[tuple[Poly, ...]]:
        """Polynomial basis of the right kernel over the fraction field.

        Vectors are built Cramer-style from rank-sized minors, then stripped
        of common monomial and content factors, so entries stay polynomial.
        """
        m, n = self.shape
        if n == 0:
            return []
        if m == 0 or all(p.is_zero for row in self.rows for p in row):
            basis = []
            for j in range(n):
                vec = [Poly.zero(self.chart)] * n
                vec[j] = Poly.const(self.chart, 1)
                basis.append(tuple(vec))
            return basis
        rank, piv_rows, piv_cols = self._forward_eliminate()
        free_cols = [c for c in range(n) if c not in piv_cols]
        basis = []
        for f in free_cols:
            cols = piv_cols + [f]
            sub = [[self.rows[r][c] for c in cols] for r in piv_rows]
            vec = [Poly.zero(self.chart)] * n
            for pos in range(rank + 1):
                minor_rows = [
                    [row[c] for c in range(rank + 1) if c != pos] for row in sub
                ]
                det = PolyMatrix.from_rows(self.chart, minor_rows).det_bareiss()
                if pos % 2:
                    det = -det
                vec[cols[pos]] = det
            basis.append(tuple(_strip_common_factor(vec)))
        return basis


# -- pointwise linear algebra over QQ ---------------------------------------


def qq_rref(rows: Sequence[Sequence[QQ]], ncols: int | None = None):
    """Reduced row echelon form; returns (rref_rows, pivot_columns)."""
    work = [list(map(QQ, r)) for r in rows]
    if ncols is None:
        ncols = len(work[0]) if work else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(work)) if work[i][c] != 0), None)
        if pr is None:
            continue
        work[r], work[pr] = work[pr], work[r]
        pv = work[r][c]
        work[r] = [v / pv for v in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c] != 0:
                f = work[i][c]
                work[i] = [a - f * b for a, b in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    return [row for row in work if any(v != 0 for v in row)], pivots


def qq_rank(rows: Sequence[Sequence[QQ]]) -> int:
    if not rows:
        return 0
    reduced, pivots = qq_rref(rows)
    return len(pivots)


def qq_kernel(rows: Sequence[Sequence[QQ]], ncols: int) -> list[tuple[QQ, ...]]:
    """Basis of the right kernel of a rational matrix."""
    if not rows:
        return [
            tuple(QQ(1) if j == i else QQ(0) for j in range(ncols))
            for i in range(ncols)
        ]
    reduced, pivots = qq_rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        vec = [QQ(0)] * ncols
        vec[f] = QQ(1)
        for row, p in zip(reduced, pivots):
            vec[p] = -row[f]
        basis.append(tuple(vec))
    return basis


def qq_spans_equal(a: Sequence[Sequence[QQ]], b: Sequence[Sequence[QQ]]) -> bool:
    """Do two row families span the same rational subspace?"""
    ra = qq_rank(a)
    rb = qq_rank(b)
    if ra != rb:
        return False
    return qq_rank(list(a) + list(b)) == ra


# -- linear systems in named unknowns ---------------------------------------


@dataclass(frozen=True)
class LinearSolution:
    """Row-reduced description of a homogeneous rational linear system.

    `forced` are the unknowns equal to zero in every solution; `relations`
    are the independent reduced rows that tie several unknowns together
    (empty exactly when the system is of coordinate-vanishing shape).
    `corank` is the number of independent conditions.
    """

    unknowns: tuple[str, ...]
    forced: tuple[str, ...]
    free: tuple[str, ...]
    relations: tuple[tuple[tuple[str, QQ], ...], ...]
    corank: int


def solve_linear_rational(
    forms: Sequence[Mapping[str, QQ]],
    unknowns: Sequence[str] | None = None,
) -> LinearSolution:
    """Row-reduce homogeneous linear forms over named unknowns."""
    if unknowns is None:
        seen: dict[str, None] = {}
        for form in forms:
            for name in form:
                seen.setdefault(name)
        unknowns = sorted(seen)
    unknowns = tuple(unknowns)
    col = {name: i for i, name in enumerate(unknowns)}
    rows = []
    for form in forms:
        row = [QQ(0)] * len(unknowns)
        for name, c in form.items():
            if name not in col:
                raise DomainError(f"unknown {name!r} not declared")
            row[col[name]] += QQ(c)
        if any(v != 0 for v in row):
            rows.append(row)
    if not rows:
        return LinearSolution(unknowns, (), unknowns, (), 0)
    reduced, pivots = qq_rref(rows, len(unknowns))
    forced = []
    relations = []
    pivot_set = set(pivots)
    for row, p in zip(reduced, pivots):
        support = [j for j, v in enumerate(row) if v != 0]
        if support == [p]:
            forced.append(unknowns[p])
        else:
            relations.append(tuple((unknowns[j], row[j]) for j in support))
    free = tuple(u for j, u in enumerate(unknowns) if j not in pivot_set)
    return LinearSolution(
        unknowns, tuple(forced), free, tuple(relations), len(pivots)
    )
