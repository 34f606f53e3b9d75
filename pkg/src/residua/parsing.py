"""Text grammars for monomials, factors, and split test forms.

Monomials: ``term ('*' term)*`` with ``term := var ('^' nat)?`` and
``var := 'x' nat | 'z' | 'w'``; ``z`` and ``w`` are aliases for ``x1``
and ``x2``.  The literal ``"1"`` denotes the constant monomial.  Zero
exponents are disallowed; constants belong in the unit field.

Factors: ``KIND ':' monomial (':' unit (':' pole)?)?`` with KIND one of
``U`` (principal value), ``R`` (residue block), ``M`` (positive closed).

Test forms: ``monomial '|' diff`` where ``diff`` is ``1``, ``vol``, or a
wedge ``atom ('^' atom)*`` of ``dz``, ``dw``, ``dx<i>``, their
conjugates with a ``b`` suffix, and per-coordinate ``vol<i>``; atoms
must be written in canonical coordinate order (holomorphic first).
"""

from __future__ import annotations

import re
from fractions import Fraction

from .currents import TestForm, TestSlot
from .errors import ParseError
from .products import FactorSpec
from .profiles import RadialProfile

_TERM_RE = re.compile(r"(x[0-9]+|z|w)(?:\^([0-9]+))?\Z")
_VAR_ALIASES = {"z": 1, "w": 2}


def _var_index(name: str, text: str, position: int) -> int:
    if name in _VAR_ALIASES:
        return _VAR_ALIASES[name]
    index = int(name[1:])
    if index < 1:
        raise ParseError("variable indices are 1-based", text, position)
    return index


def parse_monomial(text: str, ncoords: int | None = None) -> tuple[int, ...]:
    """Parse a monomial into an exponent vector.

    With ``ncoords`` unset, the vector is as long as the largest
    variable index mentioned (empty for the constant ``"1"``).
    """
    stripped = text.strip()
    if not stripped:
        raise ParseError("empty monomial", text, 0)
    exponents: dict[int, int] = {}
    if stripped != "1":
        position = 0
        for chunk in stripped.split("*"):
            term = chunk.strip()
            offset = text.index(chunk, position) if chunk else position
            position = offset + len(chunk)
            match = _TERM_RE.match(term)
            if not match:
                raise ParseError("expected var('^'nat)?", text, offset)
            index = _var_index(match.group(1), text, offset)
            power = int(match.group(2)) if match.group(2) else 1
            if power == 0:
                raise ParseError(
                    "zero exponent disallowed; write the constant via the unit field",
                    text,
                    offset,
                )
            exponents[index] = exponents.get(index, 0) + power
    width = max(exponents, default=0)
    if ncoords is None:
        ncoords = width
    elif width > ncoords:
        raise ParseError(f"monomial uses {width} coordinates, only {ncoords} available", text)
    return tuple(exponents.get(i, 0) for i in range(1, ncoords + 1))


def monomial_width(text: str) -> int:
    """Number of coordinates a monomial mentions (0 for the constant)."""
    return len(parse_monomial(text))


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational constant: {exc}", text) from None


def parse_factor(text: str, ncoords: int) -> FactorSpec:
    """Parse ``KIND:monomial[:unit[:pole]]`` into a factor spec."""
    parts = text.split(":")
    if len(parts) < 2 or len(parts) > 4:
        raise ParseError("factor syntax is KIND:monomial[:unit[:pole]]", text)
    kind = parts[0].strip()
    if kind not in ("U", "R", "M"):
        raise ParseError(f"unknown factor kind {kind!r}", text)
    exponents = parse_monomial(parts[1], ncoords)
    unit = parse_fraction(parts[2]) if len(parts) > 2 and parts[2].strip() else Fraction(1)
    pole = 1
    if len(parts) > 3 and parts[3].strip():
        try:
            pole = int(parts[3])
        except ValueError:
            raise ParseError("pole order must be an integer", text) from None
    return FactorSpec(kind=kind, exponents=exponents, unit=unit, pole=pole)


def factor_width(text: str) -> int:
    parts = text.split(":")
    if len(parts) < 2:
        raise ParseError("factor syntax is KIND:monomial[:unit[:pole]]", text)
    return monomial_width(parts[1])


_DIFF_ATOM_RE = re.compile(r"(d(?:x[0-9]+|z|w)b?|vol[0-9]*|1)\Z")


def _atom_effects(atom: str, text: str) -> list[tuple[int, str]]:
    match = _DIFF_ATOM_RE.match(atom)
    if not match:
        raise ParseError(f"unknown differential atom {atom!r}", text)
    if atom == "1":
        return []
    if atom.startswith("vol"):
        if atom == "vol":
            return [(-1, "vol")]
        return [(int(atom[3:]) - 1, "vol")]
    name = atom[1:]
    anti = name.endswith("b")
    if anti:
        name = name[:-1]
    index = _var_index(name, text, 0) - 1
    return [(index, "anti" if anti else "hol")]


def parse_diff(text: str, ncoords: int) -> tuple[str, ...]:
    """Expand a differential expression into per-coordinate slot kinds."""
    hol = [False] * ncoords
    anti = [False] * ncoords
    vol = [False] * ncoords
    order_rank: list[int] = []
    for chunk in text.split("^"):
        atom = chunk.strip()
        for index, kind in _atom_effects(atom, text):
            if kind == "vol":
                targets = range(ncoords) if index < 0 else [index]
                for c in targets:
                    if c >= ncoords:
                        raise ParseError(f"coordinate {c + 1} out of range", text)
                    if vol[c] or hol[c] or anti[c]:
                        raise ParseError(f"coordinate {c + 1} given twice", text)
                    vol[c] = True
                continue
            if index >= ncoords:
                raise ParseError(f"coordinate {index + 1} out of range", text)
            flags = hol if kind == "hol" else anti
            if flags[index] or vol[index]:
                raise ParseError(f"coordinate {index + 1} given twice", text)
            flags[index] = True
            rank = 2 * index + (1 if kind == "anti" else 0)
            if order_rank and rank < order_rank[-1]:
                raise ParseError(
                    "differentials must be written in coordinate order", text
                )
            order_rank.append(rank)
    kinds = []
    for c in range(ncoords):
        if vol[c]:
            kinds.append("vol")
        elif hol[c] and anti[c]:
            kinds.append("wedge")
        elif hol[c]:
            kinds.append("dx")
        elif anti[c]:
            kinds.append("dxbar")
        else:
            kinds.append("1")
    return tuple(kinds)


def parse_test_form(
    text: str, ncoords: int, profile: RadialProfile | None = None
) -> TestForm:
    """Parse ``monomial|diff`` into a split test form."""
    if text.count("|") != 1:
        raise ParseError("test form syntax is monomial|diff", text)
    monomial_text, diff_text = text.split("|")
    powers = parse_monomial(monomial_text, ncoords)
    kinds = parse_diff(diff_text.strip(), ncoords)
    profile = profile or RadialProfile.bump(4)
    slots = tuple(
        TestSlot(a=powers[c], d=0, profile=profile, diff=kinds[c])
        for c in range(ncoords)
    )
    if not slots:
        raise ParseError("test form needs at least one coordinate", text)
    return TestForm(slots)


def form_width(text: str) -> int:
    """Coordinates mentioned by a test-form expression."""
    if text.count("|") != 1:
        raise ParseError("test form syntax is monomial|diff", text)
    monomial_text, diff_text = text.split("|")
    width = monomial_width(monomial_text)
    for chunk in diff_text.strip().split("^"):
        atom = chunk.strip()
        match = _DIFF_ATOM_RE.match(atom)
        if not match:
            raise ParseError(f"unknown differential atom {atom!r}", text)
        if atom == "1" or atom == "vol":
            continue
        if atom.startswith("vol"):
            width = max(width, int(atom[3:]))
            continue
        name = atom[1:-1] if atom.endswith("b") else atom[1:]
        width = max(width, _var_index(name, text, 0))
    return width


def parse_sigma(text: str, size: int) -> tuple[int, ...] | None:
    """Parse a permutation given as ``id`` or comma-separated images."""
    stripped = text.strip()
    if stripped in ("", "id"):
        return None
    try:
        images = tuple(int(v) for v in stripped.split(","))
    except ValueError:
        raise ParseError("permutation must be comma-separated integers", text) from None
    if sorted(images) != list(range(1, size + 1)):
        raise ParseError(f"not a permutation of 1..{size}", text)
    return images


def parse_int_list(text: str) -> tuple[int, ...]:
    stripped = text.strip()
    if not stripped:
        return ()
    try:
        return tuple(int(v) for v in stripped.split(","))
    except ValueError:
        raise ParseError("expected comma-separated integers", text) from None


def parse_float_list(text: str) -> tuple[float, ...]:
    stripped = text.strip()
    if not stripped:
        return ()
    try:
        return tuple(float(v) for v in stripped.split(","))
    except ValueError:
        raise ParseError("expected comma-separated numbers", text) from None
