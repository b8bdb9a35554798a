"""A uniform record for verified inequalities and identities."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .rigorous import int_str


def render_number(x: Fraction | int | None) -> str | None:
    """Exact rendering: integers as digits, other rationals as ``p/q``."""
    if x is None:
        return None
    x = Fraction(x)
    return int_str(x.numerator) if x.denominator == 1 else f"{int_str(x.numerator)}/{int_str(x.denominator)}"


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    margin: Fraction | None = None
    anchor: str = ""

    def to_json_obj(self, with_anchor: bool = False) -> dict:
        obj = {
            "name": self.name,
            "verdict": "pass" if self.passed else "fail",
            "margin": render_number(self.margin),
            "detail": self.detail,
        }
        if with_anchor:
            obj["paper_ref"] = self.anchor
        return obj


def check_le(name: str, lhs: Fraction | int, rhs: Fraction | int, anchor: str = "") -> CheckResult:
    """lhs <= rhs, exactly; the margin is rhs - lhs."""
    lhs, rhs = Fraction(lhs), Fraction(rhs)
    return CheckResult(name, lhs <= rhs, f"{render_number(lhs)} <= {render_number(rhs)}", rhs - lhs, anchor)


def check_eq(name: str, lhs: Fraction | int, rhs: Fraction | int, anchor: str = "") -> CheckResult:
    lhs, rhs = Fraction(lhs), Fraction(rhs)
    return CheckResult(name, lhs == rhs, f"{render_number(lhs)} == {render_number(rhs)}", rhs - lhs, anchor)
