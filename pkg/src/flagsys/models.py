"""Classification codes and the pseudo-normal-form model generators.

A code is a word over {1, 2, 3} for the extension steps from rank three
onward (the first two steps admit no choice), written `1.3.2(5/2).`:

    1  homogeneous extension:      (i, j) = (step+1, j_prev),  X = x^{step+2}
    2  constant-shifted extension: same pair, X = x^{step+2} + c with c != 0
    3  inversion:                  (i, j) = (j_prev, step+1),  X = x^{step+2}

A model of length l lives on R^{l+2} with generators w^nu = dx^{i_nu} +
X^{nu+2} dx^{j_nu}; its derived systems are obtained by dropping the last
generator.  Lengths one and two (the unique rank-1 and rank-2 models) are
spelled `D` and `E`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction as QQ

from .algebra import Chart, CodeError, DomainError, Poly, sample_rational_points
from .calculus import OneForm
from .pfaffian import PfaffianSystem, small_growth_vector

_TOKEN = re.compile(r"([123])(?:\((-?\d+(?:/\d+)?)\))?\.")


@dataclass(frozen=True)
class FlagCode:
    """A validated classification code of some length >= 1.

    `letters` covers positions 3..length (empty for lengths 1 and 2);
    `constants` maps a position to its shift, mandatory and nonzero at
    2-positions, optional at 1-positions.
    """

    length: int
    letters: tuple[int, ...] = ()
    constants: tuple[tuple[int, QQ], ...] = ()

    def __post_init__(self):
        if self.length < 1:
            raise CodeError("length must be >= 1")
        expected = max(0, self.length - 2)
        if len(self.letters) != expected:
            raise CodeError(
                f"length {self.length} needs {expected} letters, got {len(self.letters)}"
            )
        seen_three = False
        consts = dict(self.constants)
        for pos, letter in zip(self.positions(), self.letters):
            if letter not in (1, 2, 3):
                raise CodeError(f"invalid letter {letter}")
            if letter == 2:
                if not seen_three:
                    raise CodeError(
                        f"letter 2 at position {pos} has no preceding inversion"
                    )
                c = consts.get(pos, QQ(1))
                if c == 0:
                    raise CodeError(f"zero constant at 2-position {pos}")
            if letter == 3:
                seen_three = True
                if pos in consts:
                    raise CodeError(f"constant attached to inversion at position {pos}")
        for pos in consts:
            idx = pos - 3
            if not 0 <= idx < len(self.letters):
                raise CodeError(f"constant at invalid position {pos}")

    def positions(self) -> range:
        return range(3, self.length + 1)

    def letter(self, pos: int) -> int:
        return self.letters[pos - 3]

    def constant(self, pos: int) -> QQ:
        consts = dict(self.constants)
        if self.letter(pos) == 2:
            return consts.get(pos, QQ(1))
        return consts.get(pos, QQ(0))

    @property
    def is_elementary(self) -> bool:
        return all(self.constant(p) == 0 for p in self.positions())

    @property
    def grammar_extrapolated(self) -> bool:
        """True when some 2 does not immediately follow an inversion; the
        write-up for such transitions is extrapolated from the ones whose
        constants arise directly after a j-index change."""
        for pos, letter in zip(self.positions(), self.letters):
            if letter == 2 and (pos == 3 or self.letter(pos - 1) != 3):
                return True
        return False

    def prefix(self, length: int) -> "FlagCode":
        if not 1 <= length <= self.length:
            raise CodeError("prefix length out of range")
        letters = self.letters[: max(0, length - 2)]
        consts = tuple((p, c) for p, c in self.constants if p <= length)
        return FlagCode(length, letters, consts)

    def extend(self, letter: int, constant: QQ | None = None) -> "FlagCode":
        pos = self.length + 1
        consts = self.constants
        if constant is not None and constant != 0:
            consts = consts + ((pos, QQ(constant)),)
        if pos < 3:
            return FlagCode(pos)
        return FlagCode(pos, self.letters + (letter,), consts)

    def to_text(self) -> str:
        if self.length == 1:
            return "D"
        if self.length == 2:
            return "E"
        out = []
        for pos, letter in zip(self.positions(), self.letters):
            c = self.constant(pos)
            if letter == 2 and c == 1:
                out.append("2.")
            elif c != 0:
                num = f"{c.numerator}" if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
                out.append(f"{letter}({num}).")
            else:
                out.append(f"{letter}.")
        return "".join(out)

    __str__ = to_text


DARBOUX = FlagCode(1)
ENGEL = FlagCode(2)


def parse_code(text: str) -> FlagCode:
    """Parse a dot-separated code; `D` and `E` name the two short models."""
    compact = text.replace(" ", "")
    if compact in ("D", "d"):
        return DARBOUX
    if compact in ("E", "e"):
        return ENGEL
    if not compact:
        raise CodeError("empty code")
    letters = []
    constants = []
    pos = 3
    idx = 0
    while idx < len(compact):
        m = _TOKEN.match(compact, idx)
        if not m:
            raise CodeError(f"malformed code near {compact[idx:]!r}")
        letter = int(m.group(1))
        letters.append(letter)
        if m.group(2) is not None:
            value = QQ(m.group(2))
            if letter == 2 and value == 0:
                raise CodeError(f"zero constant at 2-position {pos}")
            if value != 0:
                constants.append((pos, value))
        elif letter == 2:
            constants.append((pos, QQ(1)))
        idx = m.end()
        pos += 1
    return FlagCode(len(letters) + 2, tuple(letters), tuple(constants))


@dataclass(frozen=True)
class PseudoNormalForm:
    """A generated model: generators, index pairs and leading differentials."""

    code: FlagCode
    chart: Chart
    system: PfaffianSystem
    pairs: tuple[tuple[int, int], ...]

    @property
    def length(self) -> int:
        return self.code.length

    @property
    def generators(self) -> tuple[OneForm, ...]:
        return self.system.generators

    @property
    def leading(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.pairs)

    def coefficient(self, nu: int) -> Poly:
        """The function X^{nu+2} multiplying dx^{j_nu} in generator nu."""
        x = Poly.variable(self.chart, nu + 2)
        shift = self.code.constant(nu) if nu >= 3 else QQ(0)
        return x + Poly.const(self.chart, shift)

    def prefix_model(self, length: int) -> "PseudoNormalForm":
        return generate_model(self.code.prefix(length))

    def inversion_positions(self) -> tuple[int, ...]:
        return tuple(
            pos for pos, letter in zip(self.code.positions(), self.code.letters) if letter == 3
        )


def generate_model(code: FlagCode) -> PseudoNormalForm:
    """Build the pseudo-normal-form generators on R^{length+2}."""
    n = code.length + 2
    chart = Chart.standard(n)
    pairs: list[tuple[int, int]] = [(2, 1)]
    if code.length >= 2:
        pairs.append((3, 1))
    for pos in code.positions():
        prev_j = pairs[-1][1]
        if code.letter(pos) == 3:
            pairs.append((prev_j, pos + 1))
        else:
            pairs.append((pos + 1, prev_j))
    generators = []
    for nu, (i, j) in enumerate(pairs, start=1):
        coeffs = [Poly.zero(chart) for _ in range(n)]
        coeffs[i - 1] = Poly.const(chart, 1)
        shift = code.constant(nu) if nu >= 3 else QQ(0)
        coeffs[j - 1] = Poly.variable(chart, nu + 2) + Poly.const(chart, shift)
        generators.append(OneForm.make(chart, coeffs))
    system = PfaffianSystem.make(chart, generators)
    return PseudoNormalForm(code, chart, system, tuple(pairs))


def enumerate_codes(length: int) -> list[FlagCode]:
    """All valid letter words for the given length, constants normalized to 1
    at 2-positions, in lexicographic order (1 < 2 < 3)."""
    if length < 1:
        raise CodeError("length must be >= 1")
    if length == 1:
        return [DARBOUX]
    if length == 2:
        return [ENGEL]
    words: list[tuple[int, ...]] = []

    def rec(word: tuple[int, ...], seen_three: bool):
        if len(word) == length - 2:
            words.append(word)
            return
        for letter in (1, 2, 3):
            if letter == 2 and not seen_three:
                continue
            rec(word + (letter,), seen_three or letter == 3)

    rec((), False)
    codes = []
    for word in sorted(words):
        constants = tuple(
            (pos, QQ(1)) for pos, letter in zip(range(3, length + 1), word) if letter == 2
        )
        codes.append(FlagCode(length, word, constants))
    return codes


# The cited classification literature counts 13 equivalence classes among the
# 14 length-five words: the 9th and 10th models of the cited list coincide.
LENGTH5_EQUIVALENCE = {
    "equivalent_models": (9, 10),
    "word_count": 14,
    "class_count": 13,
    "note": "cited equivalence between the 9th and 10th listed models; "
    "recorded as metadata, not collapsed by the enumerator",
}


def enumeration_report(length: int) -> dict:
    codes = enumerate_codes(length)
    report = {
        "length": length,
        "count": len(codes),
        "codes": [c.to_text() for c in codes],
        "grammar_extrapolated": [c.to_text() for c in codes if c.grammar_extrapolated],
    }
    if length == 5:
        report["equivalences"] = dict(
            LENGTH5_EQUIVALENCE, equivalent_models=list(LENGTH5_EQUIVALENCE["equivalent_models"])
        )
    return report


@dataclass(frozen=True)
class SingularLocus:
    """Strata where the pointwise growth vector differs from its generic
    value.  Each stratum is a tuple of affine-linear defining polynomials;
    `equations` flattens the codimension-one strata."""

    strata: tuple[tuple[Poly, ...], ...]

    @property
    def equations(self) -> tuple[Poly, ...]:
        return tuple(eq for stratum in self.strata if len(stratum) == 1 for eq in stratum)

    @property
    def is_empty(self) -> bool:
        return not self.strata


def _locus_candidates(model: PseudoNormalForm) -> list[tuple[int, QQ]]:
    """Coordinate hyperplanes where a generator coefficient X^{nu+2} vanishes:
    x^{nu+2} = -c^{nu+2}, for positions from rank three onward."""
    out = []
    for pos in model.code.positions():
        out.append((pos + 2, -model.code.constant(pos)))
    return out


def _point_on(
    chart: Chart, fixed: dict[int, QQ], candidates: list[tuple[int, QQ]], salt: int
) -> tuple[QQ, ...]:
    """A deterministic sample point with the given coordinates fixed, staying
    clear of the other candidate hyperplanes."""
    base = sample_rational_points(chart.dim, 1, seed=90210 + salt, nonzero=True)[0]
    pt = list(base)
    for var, value in candidates:
        if var not in fixed and pt[var - 1] == value:
            pt[var - 1] = value + 1
    for var, value in fixed.items():
        pt[var - 1] = value
    return tuple(pt)


def singular_locus(model: PseudoNormalForm) -> SingularLocus:
    """Find the strata (codimension one and two) where the growth vector at a
    sample point differs from the generic growth vector."""
    chart = model.chart
    system = model.system
    candidates = _locus_candidates(model)
    generic = small_growth_vector(system, _point_on(chart, {}, candidates, 0)).dims
    check = small_growth_vector(system, _point_on(chart, {}, candidates, 1)).dims
    if generic != check:
        # sampled a coincidence; prefer the faster-growing vector
        generic = max(generic, check)
    singular_single: list[tuple[int, QQ]] = []
    strata: list[tuple[Poly, ...]] = []
    for var, value in candidates:
        pt = _point_on(chart, {var: value}, candidates, 2)
        if small_growth_vector(system, pt).dims != generic:
            singular_single.append((var, value))
            strata.append((Poly.variable(chart, var) - Poly.const(chart, value),))
    for a in range(len(candidates)):
        for b in range(a + 1, len(candidates)):
            (va, ca), (vb, cb) = candidates[a], candidates[b]
            pt = _point_on(chart, {va: ca, vb: cb}, candidates, 3)
            gv = small_growth_vector(system, pt).dims
            singles = [s for s, _ in singular_single]
            if gv != generic:
                on_singles = [
                    small_growth_vector(
                        system, _point_on(chart, {v: c}, candidates, 4)
                    ).dims
                    for v, c in ((va, ca), (vb, cb))
                    if v in singles
                ]
                if gv not in on_singles or not on_singles:
                    strata.append(
                        (
                            Poly.variable(chart, va) - Poly.const(chart, ca),
                            Poly.variable(chart, vb) - Poly.const(chart, cb),
                        )
                    )
    return SingularLocus(tuple(strata))


def to_elementary(model: PseudoNormalForm) -> tuple[PseudoNormalForm, tuple[QQ, ...]]:
    """Absorb all constants by translating coordinates.

    Returns the elementary model and the image of the origin under the
    translation: the point of the elementary chart corresponding to the
    origin of the original one (coordinate m picks up the constant c^m).
    """
    code = model.code
    shift = [QQ(0)] * model.chart.dim
    letters = []
    for pos in code.positions():
        c = code.constant(pos)
        shift[pos + 2 - 1] = c
        letters.append(1 if code.letter(pos) == 2 else code.letter(pos))
    elementary = FlagCode(code.length, tuple(letters), ())
    return generate_model(elementary), tuple(shift)
