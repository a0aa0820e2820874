"""Contact Hamiltonians and the unique lift of symmetries up a flag.

On the rank-1 chart (x1, x2, x3) with generating form w = dx2 + x3 dx1, the
correspondence between infinitesimal symmetries and functions is

    field_to_hamiltonian:  xi  ->  i(xi) w
    hamiltonian_to_field:  f   ->  f_3 d1 + (f - x3 f_3) d2 - (f_1 - x3 f_2) d3

and L_xi w = f_2 * w.  A symmetry of the next-to-last derived system lifts
uniquely to the full system: the vertical coefficient is pinned by reducing
the Lie derivative of the top generator modulo the system and matching the
single surviving residual component.  Iterating the lift from the rank-1
chart reaches any model.

The prolongation step is linear over the rationals in the input field and
multiplies coefficients only by chart polynomials, so it is reused verbatim
by the jet-isotropy solver with symbolic Taylor coefficients appended to the
chart as extra variables; `geom_dim` caps which variables differentials see.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import Chart, ContractViolation, DomainError, Poly
from .calculus import (
    OneForm,
    VectorField,
    differential,
    interior_product,
    lie_derivative,
    reduce_mod_system,
)
from .models import FlagCode, PseudoNormalForm, generate_model


def darboux_form(chart: Chart) -> OneForm:
    """dx2 + x3 dx1 on any chart of dimension >= 3."""
    if chart.dim < 3:
        raise DomainError("need at least three variables")
    coeffs = [Poly.zero(chart) for _ in range(chart.dim)]
    coeffs[0] = Poly.variable(chart, 3)
    coeffs[1] = Poly.const(chart, 1)
    return OneForm.make(chart, coeffs)


def _check_hamiltonian(f: Poly) -> None:
    if f.chart.dim < 3:
        raise DomainError("contact Hamiltonian needs a chart of dimension >= 3")
    for i in range(4, f.chart.dim + 1):
        if f.depends_on(i):
            raise DomainError("contact Hamiltonian may only involve x1, x2, x3")


def hamiltonian_to_field(f: Poly) -> VectorField:
    """The symmetry of dx2 + x3 dx1 with contact Hamiltonian f."""
    _check_hamiltonian(f)
    chart = f.chart
    f1, f2, f3 = f.partial(1), f.partial(2), f.partial(3)
    x3 = Poly.variable(chart, 3)
    coeffs = [Poly.zero(chart) for _ in range(chart.dim)]
    coeffs[0] = f3
    coeffs[1] = f - x3 * f3
    coeffs[2] = -(f1 - x3 * f2)
    return VectorField.make(chart, coeffs)


def field_to_hamiltonian(xi: VectorField) -> Poly:
    """i(xi) w for a symmetry xi of the rank-1 form; inverse of the above."""
    omega = darboux_form(xi.chart)
    residual = reduce_mod_system(lie_derivative(xi, omega), [omega], leading=(2,)).residual
    if not residual.is_zero:
        raise ContractViolation("field is not a symmetry of dx2 + x3 dx1")
    return interior_product(xi, omega)


def lagrange_bracket(f: Poly, g: Poly) -> Poly:
    """[f, g] = xi(g) - g * f_2, with xi the field of f; matches the field
    bracket through the correspondence."""
    _check_hamiltonian(f)
    _check_hamiltonian(g)
    return hamiltonian_to_field(f).apply(g) - g * f.partial(2)


@dataclass(frozen=True)
class SymmetryField:
    """A verified infinitesimal symmetry of a generated model."""

    field: VectorField
    provenance: FlagCode

    @classmethod
    def checked(cls, field: VectorField, model: PseudoNormalForm) -> "SymmetryField":
        if not verify_symmetry(field, model):
            raise ContractViolation("field fails the symmetry congruences")
        return cls(field, model.code)


def verify_symmetry(field: VectorField, model: PseudoNormalForm) -> bool:
    """True iff the Lie derivative of every generator reduces to zero
    residual modulo the model's generators."""
    if field.chart != model.chart:
        raise DomainError("field and model on different charts")
    gens = model.generators
    for g in gens:
        res = reduce_mod_system(lie_derivative(field, g), gens, model.leading).residual
        if not res.is_zero:
            return False
    return True


def lift_coefficient(
    coeffs,
    generators,
    leading,
    pair: tuple[int, int],
    x_top: Poly,
    geom_dim: int,
) -> tuple[Poly, tuple[Poly, ...]]:
    """Core of the lift: reduce d(A_p) + X d(A_q) modulo the generators and
    read the unique vertical coefficient off the dx_q residual component.

    Works on charts carrying extra symbolic variables: `geom_dim` bounds the
    variables that differentials act on.  Returns (coefficient, multipliers).
    """
    p, q = pair
    lhs = differential(coeffs[p - 1], upto=geom_dim) + differential(
        coeffs[q - 1], upto=geom_dim
    ).scale(x_top)
    reduction = reduce_mod_system(lhs, generators, leading)
    residual = reduction.residual
    for i in range(1, residual.chart.dim + 1):
        if i != q and not residual.coeff(i).is_zero:
            raise ContractViolation(
                "reduction residual escapes the expected component; "
                "input is not a symmetry of the derived system"
            )
    return -residual.coeff(q), reduction.multipliers


def prolongation_step(
    coeffs: list[Poly], model: PseudoNormalForm
) -> tuple[Poly, tuple[Poly, ...]]:
    """The unique vertical coefficient extending a symmetry one level up.

    `coeffs` are the first length+1 components of the lifted field (the last
    chart variable's coefficient is the unknown).
    """
    return lift_coefficient(
        coeffs,
        model.generators,
        model.leading,
        model.pairs[-1],
        model.coefficient(model.length),
        model.length + 2,
    )


def prolong_once(xi: VectorField, model: PseudoNormalForm) -> SymmetryField:
    """Lift a symmetry of the derived system (coefficients in the first
    length+1 variables) to the full model."""
    chart = model.chart
    n = chart.dim
    field_coeffs = [c.extend_to(chart) for c in xi.coeffs]
    while len(field_coeffs) < n:
        field_coeffs.append(Poly.zero(chart))
    if not field_coeffs[n - 1].is_zero:
        raise DomainError("input field already has a vertical component")
    for c in field_coeffs:
        if c.depends_on(n):
            raise DomainError("input field depends on the top variable")
    vertical, _ = prolongation_step(field_coeffs[: n - 1], model)
    field_coeffs[n - 1] = vertical
    return SymmetryField.checked(VectorField.make(chart, field_coeffs), model)


def prolong_to_top(f: Poly, code: FlagCode) -> SymmetryField:
    """Iterate the unique lift of the rank-1 symmetry of f up the tower."""
    model = generate_model(code)
    base_chart = Chart.standard(3)
    f_base = f.extend_to(base_chart) if f.chart.dim < 3 else _restrict_to_base(f)
    current = hamiltonian_to_field(f_base)
    for length in range(2, code.length + 1):
        stage = model.prefix_model(length)
        current = prolong_once(current, stage).field
    return SymmetryField.checked(current.extend_to(model.chart), model)


def _restrict_to_base(f: Poly) -> Poly:
    _check_hamiltonian(f)
    base = Chart.standard(3)
    terms = {m[:3]: c for m, c in f.terms.items()}
    return Poly.make(base, terms)
