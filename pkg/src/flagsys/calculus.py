"""Polynomial differential forms and vector fields on a chart.

Only 1- and 2-forms are implemented: every construction in this package
lands in degree at most two (structure tensors take values in Lambda^2).
A 2-form stores its strictly upper-triangular coefficients; antisymmetry is
implicit.

Several operators take an `upto` argument bounding which chart variables are
treated as geometric: differentials and Lie derivatives only see x1..x_upto.
This is how jet-coefficient symbols (appended to a chart as extra variables)
are kept constant under d without a second polynomial type.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .algebra import (
    QQ,
    Chart,
    ChartMismatchError,
    DegenerateSystemError,
    DomainError,
    Poly,
    parse_poly,
    qq_rank,
)


def _pair(i: int, j: int) -> tuple[int, int, int]:
    """Normalize an index pair to (i<j, sign)."""
    if i == j:
        return i, j, 0
    return (i, j, 1) if i < j else (j, i, -1)


@dataclass(frozen=True)
class OneForm:
    """A polynomial 1-form: the coefficient of dx_i sits at slot i-1."""

    chart: Chart
    coeffs: tuple[Poly, ...]

    @classmethod
    def make(cls, chart: Chart, coeffs: Sequence[Poly]) -> "OneForm":
        coeffs = tuple(coeffs)
        if len(coeffs) != chart.dim:
            raise ChartMismatchError("coefficient count != chart dimension")
        for p in coeffs:
            if p.chart != chart:
                raise ChartMismatchError("coefficient on wrong chart")
        return cls(chart, coeffs)

    @classmethod
    def zero(cls, chart: Chart) -> "OneForm":
        return cls(chart, (Poly.zero(chart),) * chart.dim)

    @classmethod
    def dx(cls, chart: Chart, i: int) -> "OneForm":
        coeffs = [Poly.zero(chart)] * chart.dim
        coeffs[i - 1] = Poly.const(chart, 1)
        return cls(chart, tuple(coeffs))

    @property
    def is_zero(self) -> bool:
        return all(p.is_zero for p in self.coeffs)

    def coeff(self, i: int) -> Poly:
        return self.coeffs[i - 1]

    def __add__(self, other: "OneForm") -> "OneForm":
        self._check(other)
        return OneForm(self.chart, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "OneForm") -> "OneForm":
        self._check(other)
        return OneForm(self.chart, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "OneForm":
        return OneForm(self.chart, tuple(-a for a in self.coeffs))

    def scale(self, factor) -> "OneForm":
        if not isinstance(factor, Poly):
            factor = Poly.const(self.chart, factor)
        return OneForm(self.chart, tuple(factor * a for a in self.coeffs))

    def evaluate(self, point: Sequence[QQ]) -> tuple[QQ, ...]:
        return tuple(p.evaluate(point) for p in self.coeffs)

    def extend_to(self, chart: Chart) -> "OneForm":
        if chart == self.chart:
            return self
        coeffs = [Poly.zero(chart)] * chart.dim
        for name, p in zip(self.chart.names, self.coeffs):
            coeffs[chart.index(name) - 1] = p.extend_to(chart)
        return OneForm(chart, tuple(coeffs))

    def _check(self, other: "OneForm") -> None:
        if self.chart != other.chart:
            raise ChartMismatchError("1-forms on different charts")

    def to_text(self) -> str:
        parts = []
        for i, p in enumerate(self.coeffs, start=1):
            if p.is_zero:
                continue
            parts.append(_coeff_text(p, f"d{self.chart.names[i - 1]}"))
        if not parts:
            return "0"
        out = " + ".join(parts)
        return out.replace("+ -", "- ")

    __str__ = to_text


@dataclass(frozen=True)
class TwoForm:
    """A polynomial 2-form, stored strictly upper-triangular: keys (i, j), i<j."""

    chart: Chart
    coeffs: dict

    @classmethod
    def make(cls, chart: Chart, entries: dict) -> "TwoForm":
        clean: dict = {}
        for (i, j), p in entries.items():
            a, b, sign = _pair(i, j)
            if sign == 0 or p.is_zero:
                continue
            q = p if sign > 0 else -p
            key = (a, b)
            acc = clean.get(key)
            q = q if acc is None else acc + q
            if q.is_zero:
                clean.pop(key, None)
            else:
                clean[key] = q
        return cls(chart, clean)

    @classmethod
    def zero(cls, chart: Chart) -> "TwoForm":
        return cls(chart, {})

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, i: int, j: int) -> Poly:
        a, b, sign = _pair(i, j)
        p = self.coeffs.get((a, b), Poly.zero(self.chart))
        return p if sign >= 0 else -p

    def __add__(self, other: "TwoForm") -> "TwoForm":
        if self.chart != other.chart:
            raise ChartMismatchError("2-forms on different charts")
        out = dict(self.coeffs)
        for key, p in other.coeffs.items():
            q = out.get(key)
            q = p if q is None else q + p
            if q.is_zero:
                out.pop(key, None)
            else:
                out[key] = q
        return TwoForm(self.chart, out)

    def __neg__(self) -> "TwoForm":
        return TwoForm(self.chart, {k: -p for k, p in self.coeffs.items()})

    def __sub__(self, other: "TwoForm") -> "TwoForm":
        return self + (-other)

    def scale(self, factor) -> "TwoForm":
        if not isinstance(factor, Poly):
            factor = Poly.const(self.chart, factor)
        return TwoForm.make(self.chart, {k: factor * p for k, p in self.coeffs.items()})

    def evaluate(self, point: Sequence[QQ]) -> list[list[QQ]]:
        n = self.chart.dim
        mat = [[QQ(0)] * n for _ in range(n)]
        for (i, j), p in self.coeffs.items():
            v = p.evaluate(point)
            mat[i - 1][j - 1] = v
            mat[j - 1][i - 1] = -v
        return mat

    def to_text(self) -> str:
        parts = []
        for (i, j) in sorted(self.coeffs):
            ni = self.chart.names[i - 1]
            nj = self.chart.names[j - 1]
            parts.append(_coeff_text(self.coeffs[(i, j)], f"d{ni}^d{nj}"))
        if not parts:
            return "0"
        return " + ".join(parts).replace("+ -", "- ")

    __str__ = to_text


@dataclass(frozen=True)
class VectorField:
    """A polynomial vector field: the coefficient of d/dx_i sits at slot i-1."""

    chart: Chart
    coeffs: tuple[Poly, ...]

    @classmethod
    def make(cls, chart: Chart, coeffs: Sequence[Poly]) -> "VectorField":
        coeffs = tuple(coeffs)
        if len(coeffs) != chart.dim:
            raise ChartMismatchError("coefficient count != chart dimension")
        for p in coeffs:
            if p.chart != chart:
                raise ChartMismatchError("coefficient on wrong chart")
        return cls(chart, coeffs)

    @classmethod
    def zero(cls, chart: Chart) -> "VectorField":
        return cls(chart, (Poly.zero(chart),) * chart.dim)

    @classmethod
    def d(cls, chart: Chart, i: int) -> "VectorField":
        coeffs = [Poly.zero(chart)] * chart.dim
        coeffs[i - 1] = Poly.const(chart, 1)
        return cls(chart, tuple(coeffs))

    @property
    def is_zero(self) -> bool:
        return all(p.is_zero for p in self.coeffs)

    def coeff(self, i: int) -> Poly:
        return self.coeffs[i - 1]

    def __add__(self, other: "VectorField") -> "VectorField":
        if self.chart != other.chart:
            raise ChartMismatchError("vector fields on different charts")
        return VectorField(self.chart, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, tuple(-a for a in self.coeffs))

    def scale(self, factor) -> "VectorField":
        if not isinstance(factor, Poly):
            factor = Poly.const(self.chart, factor)
        return VectorField(self.chart, tuple(factor * a for a in self.coeffs))

    def apply(self, f: Poly) -> Poly:
        """Directional derivative X(f) = sum_i X_i df/dx_i."""
        if f.chart != self.chart:
            raise ChartMismatchError("function on wrong chart")
        out = Poly.zero(self.chart)
        for i, c in enumerate(self.coeffs, start=1):
            if not c.is_zero:
                out = out + c * f.partial(i)
        return out

    def evaluate(self, point: Sequence[QQ]) -> tuple[QQ, ...]:
        return tuple(p.evaluate(point) for p in self.coeffs)

    def extend_to(self, chart: Chart) -> "VectorField":
        if chart == self.chart:
            return self
        coeffs = [Poly.zero(chart)] * chart.dim
        for name, p in zip(self.chart.names, self.coeffs):
            coeffs[chart.index(name) - 1] = p.extend_to(chart)
        return VectorField(chart, tuple(coeffs))

    def to_text(self) -> str:
        parts = []
        for i, p in enumerate(self.coeffs, start=1):
            if p.is_zero:
                continue
            parts.append(_coeff_text(p, f"d{i}"))
        if not parts:
            return "0"
        return " + ".join(parts).replace("+ -", "- ")

    __str__ = to_text


def _coeff_text(p: Poly, symbol: str) -> str:
    c = p.constant_value()
    if c is not None:
        if c == 1:
            return symbol
        if c == -1:
            return f"-{symbol}"
        text = p.to_text()
        return f"{text}*{symbol}"
    text = p.to_text()
    if " " in text:
        return f"({text})*{symbol}"
    return f"{text}*{symbol}"


def parse_one_form(chart: Chart, text: str) -> OneForm:
    """Parse `dx2 + x3*dx1`-style text into a OneForm."""
    return OneForm.make(chart, _parse_covector(chart, text, "d" ))


def parse_vector_field(chart: Chart, text: str) -> VectorField:
    """Parse `x3*d1 + d2`-style text; `di` denotes d/dx_i."""
    compact = text.replace(" ", "")
    if not compact or compact == "0":
        return VectorField.zero(chart)
    coeffs = [Poly.zero(chart)] * chart.dim
    for sign, chunk in _signed_chunks(compact):
        factors = chunk.split("*")
        slot = None
        rest = []
        for f in factors:
            if f.startswith("d") and f[1:].isdigit():
                if slot is not None:
                    raise DomainError(f"two basis fields in one term: {text!r}")
                slot = int(f[1:])
            else:
                rest.append(f)
        if slot is None or not 1 <= slot <= chart.dim:
            raise DomainError(f"missing or out-of-range basis field in {text!r}")
        coeff_text = "*".join(rest) if rest else "1"
        coeffs[slot - 1] = coeffs[slot - 1] + parse_poly(chart, coeff_text) * sign
    return VectorField.make(chart, coeffs)


def _parse_covector(chart: Chart, text: str, prefix: str) -> list[Poly]:
    compact = text.replace(" ", "")
    coeffs = [Poly.zero(chart)] * chart.dim
    if not compact or compact == "0":
        return coeffs
    for sign, chunk in _signed_chunks(compact):
        factors = chunk.split("*")
        slot = None
        rest = []
        for f in factors:
            if f.startswith(prefix) and f[len(prefix):] in chart.names:
                if slot is not None:
                    raise DomainError(f"two differentials in one term: {text!r}")
                slot = chart.index(f[len(prefix):])
            else:
                rest.append(f)
        if slot is None:
            raise DomainError(f"term without differential in {text!r}")
        coeff_text = "*".join(rest) if rest else "1"
        coeffs[slot - 1] = coeffs[slot - 1] + parse_poly(chart, coeff_text) * sign
    return coeffs


def _signed_chunks(compact: str):
    i = 0
    sign = 1
    if compact[0] in "+-":
        sign = -1 if compact[0] == "-" else 1
        i = 1
    start = i
    depth = 0
    out = []
    while i <= len(compact):
        if i == len(compact) or (compact[i] in "+-" and depth == 0):
            if i == start:
                raise DomainError(f"malformed expression: {compact!r}")
            out.append((sign, compact[start:i]))
            if i < len(compact):
                sign = -1 if compact[i] == "-" else 1
            start = i + 1
        elif compact[i] == "(":
            depth += 1
        elif compact[i] == ")":
            depth -= 1
        i += 1
    return out


# -- operators ---------------------------------------------------------------


def differential(f: Poly, upto: int | None = None) -> OneForm:
    """df, with partials taken only in variables 1..upto (default: all)."""
    n = f.chart.dim if upto is None else upto
    coeffs = [f.partial(i) if i <= n else Poly.zero(f.chart) for i in range(1, f.chart.dim + 1)]
    return OneForm(f.chart, tuple(coeffs))


def exterior_derivative(w: OneForm, upto: int | None = None) -> TwoForm:
    """d(w): the coefficient of dx_i^dx_j is dw_j/dx_i - dw_i/dx_j."""
    n = w.chart.dim if upto is None else upto
    entries: dict = {}
    for i in range(1, n + 1):
        for j in range(i + 1, w.chart.dim + 1):
            p = w.coeff(j).partial(i) if i <= n else Poly.zero(w.chart)
            if j <= n:
                p = p - w.coeff(i).partial(j)
            if not p.is_zero:
                entries[(i, j)] = p
    return TwoForm.make(w.chart, entries)


def wedge(a: OneForm, b: OneForm) -> TwoForm:
    a._check(b)
    entries: dict = {}
    n = a.chart.dim
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            p = a.coeff(i) * b.coeff(j) - a.coeff(j) * b.coeff(i)
            if not p.is_zero:
                entries[(i, j)] = p
    return TwoForm.make(a.chart, entries)


def interior_product(x: VectorField, eta):
    """Contraction in the first slot; accepts a 1- or 2-form."""
    if x.chart != eta.chart:
        raise ChartMismatchError("vector field and form on different charts")
    if isinstance(eta, OneForm):
        out = Poly.zero(x.chart)
        for xi, wi in zip(x.coeffs, eta.coeffs):
            if not (xi.is_zero or wi.is_zero):
                out = out + xi * wi
        return out
    if isinstance(eta, TwoForm):
        coeffs = [Poly.zero(x.chart)] * x.chart.dim
        for (i, j), p in eta.coeffs.items():
            xi = x.coeff(i)
            xj = x.coeff(j)
            if not xi.is_zero:
                coeffs[j - 1] = coeffs[j - 1] + xi * p
            if not xj.is_zero:
                coeffs[i - 1] = coeffs[i - 1] - xj * p
        return OneForm(x.chart, tuple(coeffs))
    raise DomainError("interior product expects a 1- or 2-form")


def lie_derivative(x: VectorField, w: OneForm, upto: int | None = None) -> OneForm:
    """Cartan's identity as the definition: L_X w = d(i_X w) + i_X dw."""
    if x.chart != w.chart:
        raise ChartMismatchError("vector field and form on different charts")
    return differential(interior_product(x, w), upto) + interior_product(
        x, exterior_derivative(w, upto)
    )


def lie_bracket(x: VectorField, y: VectorField) -> VectorField:
    if x.chart != y.chart:
        raise ChartMismatchError("vector fields on different charts")
    coeffs = tuple(x.apply(yc) - y.apply(xc) for xc, yc in zip(x.coeffs, y.coeffs))
    return VectorField(x.chart, coeffs)


# -- reduction modulo a system of 1-forms ------------------------------------


@dataclass(frozen=True)
class ReduceResult:
    residual: OneForm
    multipliers: tuple[Poly, ...]
    leading: tuple[int, ...]


def detect_leading(generators: Sequence[OneForm]) -> tuple[int, ...]:
    """Choose a leading differential per generator for sequential elimination.

    Generators are processed in order; after reducing by the previous ones,
    the leading slot is the first index whose coefficient is a nonzero
    rational constant.  (Pseudo-normal-form generators always have one.)
    """
    if not generators:
        return ()
    chart = generators[0].chart
    if qq_rank([g.evaluate(chart.origin()) for g in generators]) < len(generators):
        raise DegenerateSystemError("generators linearly dependent at the origin")
    leading: list[int] = []
    reduced: list[OneForm] = []
    for g in generators:
        cur = g
        for idx, prev in zip(leading, reduced):
            c = cur.coeff(idx)
            if not c.is_zero:
                pivot = prev.coeff(idx).constant_value()
                cur = cur - prev.scale(c * (1 / pivot))
        slot = None
        for i in range(1, chart.dim + 1):
            val = cur.coeff(i).constant_value()
            if val is not None and val != 0:
                slot = i
                break
        if slot is None:
            raise DegenerateSystemError(
                "no constant-coefficient pivot differential; system unsupported"
            )
        leading.append(slot)
        reduced.append(cur)
    return tuple(leading)


def reduce_mod_system(
    eta: OneForm,
    generators: Sequence[OneForm],
    leading: Sequence[int] | None = None,
) -> ReduceResult:
    """Write eta = sum_i lambda_i w^i + residual by eliminating, in order,
    each generator's leading differential.  The residual is supported only
    on differentials outside the leading set; it vanishes exactly when eta
    lies in the span of the generators (generically)."""
    generators = list(generators)
    for g in generators:
        if g.chart != eta.chart:
            raise ChartMismatchError("system generator on wrong chart")
    if leading is None:
        leading = detect_leading(generators)
    else:
        leading = tuple(leading)
        if len(leading) != len(generators):
            raise DomainError("leading index count != generator count")
    residual = eta
    multipliers = []
    for g, idx in zip(generators, leading):
        pivot = g.coeff(idx).constant_value()
        if pivot is None or pivot == 0:
            raise DegenerateSystemError(
                f"generator has no constant pivot at slot {idx}"
            )
        lam = residual.coeff(idx) * (1 / pivot)
        multipliers.append(lam)
        if not lam.is_zero:
            residual = residual - g.scale(lam)
    return ReduceResult(residual, tuple(multipliers), tuple(leading))
