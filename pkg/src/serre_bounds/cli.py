"""``serre-bounds``: command-line driver for the tower verifications and the bounds engine.

Exit codes: 0 when every check passes, 1 when a verification fails, 2 on a
usage or input error.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from .bounds import (
    OPERATIONS,
    AbelianContext,
    ContextError,
    ParameterRequired,
    SymbolicBound,
    effective_prime_bound,
    field_extension_degrees,
    general_linear_order,
    m_exponent,
    serre_c_large_prime,
    xi,
)
from .checks import CheckResult, check_le, render_number
from .magnitude import LogMagnitude
from .operators import (
    NonInvertibleError,
    OperatorCertificate,
    check_t_contraction,
    check_trace_identity,
    check_trace_step_derived,
    check_trace_step_stated,
    check_u_recursion,
    ker_log_chain,
    project_to_kernel,
    rho_solve,
    twisted_invert,
)
from .padic import PrecisionError, is_prime
from .ramification import InsufficientLevelsError, c5_bound, c6, profile_checks, ramification_profile
from .report import Record, RunReport
from .tower import (
    TowerConfig,
    TowerElement,
    TowerSizeError,
    embed,
    normalized_trace,
    random_element,
)

THREADS_VARIABLE = "SERRE_BOUNDS_THREADS"

ANCHORS = {
    "t_contraction": "||x - t(x)|| <= l^{c5} ||x - sigma(x)||",
    "u_recursion": "u_1 = e, u_n = e + |c4| sum_{k=1}^{n-1} l^{-k}",
    "trace_step.stated": "||Tr_{K_{n+1}/K_n} x|| <= l^{-e + l^{-n} c4} ||x||",
    "trace_step.derived": "v(Tr_{K_{n+1}/K_n} x) > e + v(x) + l^{-n}(c3 - 1)",
    "trace_identity": "||x - l^{-1} Tr x|| <= l^{e} ||sigma x - x||",
    "projector": "t(t(x)) = t(x), t(x - t(x)) = 0",
    "rho": "(sigma - 1) rho(y) = y, |rho(y)| <= l^{c5} |y| on ker t",
    "twisted": "rho(sigma^{l^{c6}} - lambda^{l^{c6}}) = 1 - (lambda^{l^{c6}} - 1) rho",
    "c6": "c6 = 2 + floor(1/(e l (l-1)) + 2 l e/(l-1)^2 + log(2e)/log l) <= 7e; c6 = 1 if l >= 4e^2",
    "ker_log": "|Ker log| = (l^f - 1) l^alpha | (l^{n!} - 1) l^{1 + v_l(n!)}",
}


class UsageError(Exception):
    """Invalid input; reported with exit code 2."""


# -- helpers ------------------------------------------------------------------------------------------


def _record_from_check(check: CheckResult, with_anchor: bool) -> Record:
    return Record(
        name=check.name,
        verdict="pass" if check.passed else "fail",
        margin=render_number(check.margin),
        paper_ref=(check.anchor or None) if with_anchor else None,
        detail=check.detail,
    )


def _record_from_certificate(cert: OperatorCertificate, name: str, anchor: str | None) -> Record:
    return Record(
        name=name,
        verdict=cert.verdict,
        margin=render_number(cert.margin),
        paper_ref=anchor,
        detail=f"{cert.samples} samples, {cert.skipped} skipped, {cert.violations} violations",
        data=cert.to_json_obj(),
    )


def _tower_config(ell: int, n_max: int, precision: int) -> TowerConfig:
    try:
        return TowerConfig(ell, n_max, precision)
    except (ValueError, TowerSizeError) as exc:
        raise UsageError(str(exc)) from exc


def _thread_count() -> int:
    raw = os.environ.get(THREADS_VARIABLE)
    if raw is None or raw == "":
        return 1
    try:
        count = int(raw)
    except ValueError as exc:
        raise UsageError(f"{THREADS_VARIABLE} must be a positive integer, got {raw!r}") from exc
    if count < 1:
        raise UsageError(f"{THREADS_VARIABLE} must be a positive integer, got {raw!r}")
    return count


# -- lambda expressions ---------------------------------------------------------------------------------


def parse_lambda(text: str, ell: int, precision: int) -> TowerElement:
    """Evaluate an arithmetic expression in ``zeta`` (a primitive l-th root of unity) and ``ell``."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise UsageError(f"cannot parse lambda expression {text!r}") from exc

    def as_element(value) -> TowerElement:
        if isinstance(value, TowerElement):
            return value
        return TowerElement.constant(value, ell, 0, precision)

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return Fraction(node.value)
        if isinstance(node, ast.Name):
            if node.id == "zeta":
                return TowerElement.zeta_power(ell, 0, precision, 1)
            if node.id in ("ell", "l"):
                return Fraction(ell)
            raise UsageError(f"unknown name {node.id!r} in lambda expression")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            value = walk(node.operand)
            return -value if isinstance(node.op, ast.USub) else value
        if isinstance(node, ast.BinOp):
            left, right = walk(node.left), walk(node.right)
            if isinstance(node.op, ast.Pow):
                if not (isinstance(right, Fraction) and right.denominator == 1 and right >= 0):
                    raise UsageError("exponents must be nonnegative integers")
                return left ** int(right)
            if isinstance(node.op, ast.Div):
                if not isinstance(right, Fraction) or right == 0:
                    raise UsageError("only division by a nonzero rational is supported")
                return left / right if isinstance(left, Fraction) else left * (1 / right)
            if isinstance(node.op, (ast.Add, ast.Sub, ast.Mult)):
                if isinstance(left, Fraction) and isinstance(right, Fraction):
                    return {ast.Add: left + right, ast.Sub: left - right, ast.Mult: left * right}[type(node.op)]
                if isinstance(node.op, ast.Mult):
                    return as_element(left) * right if isinstance(right, Fraction) else as_element(left) * as_element(right)
                a, b = as_element(left), as_element(right)
                return a + b if isinstance(node.op, ast.Add) else a - b
        raise UsageError(f"unsupported syntax in lambda expression {text!r}")

    return as_element(walk(tree))


# -- bounds ------------------------------------------------------------------------------------------------

CONTEXT_FLAGS = {
    "g": "genus / dimension g",
    "degK": "[K:Q]",
    "hF": "Faltings height h_F (decimal string)",
    "logDiscK": "log of the discriminant of K (decimal string)",
    "classNumber": "class number h_K",
    "normP": "norm N(p) of the auxiliary prime",
    "deltaV": "degree of definition delta(V)",
    "type": "generic | elliptic-nonCM-power | CM",
    "c_A": "Serre constant c(A)",
    "c_g": "Chevalley constant c(g)",
    "alpha": "Zywina alpha",
    "beta": "Zywina beta",
    "disc3": "discriminant of K(E[3])",
    "ell": "the prime l",
    "rep_dim": "representation dimension n",
}
CONTEXT_SWITCHES = ("grh", "ell_unramified", "good_reduction")


def _load_context(args) -> AbelianContext:
    data: dict = {}
    if args.context:
        try:
            with open(args.context, encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise UsageError(f"cannot read context file: {exc}") from exc
        try:
            data = json.loads(text, parse_float=Fraction)
        except json.JSONDecodeError as exc:
            raise UsageError(f"context is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("context JSON must be an object")
    for name in list(CONTEXT_FLAGS) + list(CONTEXT_SWITCHES):
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    try:
        return AbelianContext.from_mapping(data)
    except ContextError as exc:
        raise UsageError(f"malformed context: {exc}") from exc
    except TypeError as exc:
        raise UsageError(f"malformed context: {exc}") from exc


def _value_row(value) -> dict:
    if isinstance(value, SymbolicBound):
        return value.to_row()
    if isinstance(value, LogMagnitude):
        return value.to_row()
    return LogMagnitude.of(value).to_row()


FIELD_DEGREE_PARTS = ("semistable_torsion", "connectedness_product", "connectedness_bound")


def bound_rows(ctx: AbelianContext, names: list[str], strict: bool, with_anchor: bool) -> list[dict]:
    rows = []
    for name in names:
        op = OPERATIONS[name]
        try:
            value = op.evaluate(ctx)
        except ParameterRequired as exc:
            if strict:
                raise
            rows.append(
                {"op": name, "value": {"kind": "unavailable", "value": None, "missing": exc.parameter, "status": exc.status}}
            )
            continue
        if strict and isinstance(value, SymbolicBound):
            missing = value.missing[0]
            raise ParameterRequired(missing, f"{_parameter_status(missing)}; symbolic form {value.formula}")
        if isinstance(value, tuple):
            entries = [(f"{name}.{part}", v) for part, v in zip(FIELD_DEGREE_PARTS, value)]
        else:
            entries = [(name, value)]
        for row_name, v in entries:
            row = {"op": row_name, "value": _value_row(v)}
            if with_anchor:
                row["paper_ref"] = op.anchor
            rows.append(row)
    return rows


def _parameter_status(name: str) -> str:
    from .bounds import PARAMETER_STATUS

    return PARAMETER_STATUS.get(name, "required input")


def _rows_to_csv(rows: list[dict]) -> str:
    out = io.StringIO()
    columns = ["op", "kind", "value", "rounded", "log10", "loglog10", "missing", "paper_ref"]
    writer = csv.DictWriter(out, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        flat = {"op": row["op"], "paper_ref": row.get("paper_ref", "")}
        for key, value in row["value"].items():
            flat[key] = "" if value is None else value
        writer.writerow(flat)
    return out.getvalue()


def cmd_bounds(args) -> tuple[RunReport, str]:
    ctx = _load_context(args)
    strict = args.op is not None
    names = [args.op] if strict else sorted(OPERATIONS)
    try:
        rows = bound_rows(ctx, names, strict, args.paper_refs)
    except ParameterRequired as exc:
        raise UsageError(f"{exc.parameter} is required for {args.op}: {exc.status}") from exc
    report = RunReport(command=_command(args), seed=None, rows=tuple(rows))
    if args.format == "csv":
        return report, _rows_to_csv(rows)
    return report, report.to_json()


# -- tower verifications ----------------------------------------------------------------------------------


def jumps_records(ell: int, levels: int, precision: int, with_anchor: bool) -> tuple[list[Record], dict]:
    config = _tower_config(ell, levels, precision)
    if levels < 1:
        raise UsageError("--levels must be at least 1")
    profile = ramification_profile(config)
    prefix = f"jumps.l{ell}"
    records = [
        _record_from_check(CheckResult(f"{prefix}.{c.name}", c.passed, c.detail, c.margin, c.anchor), with_anchor)
        for c in profile_checks(config, profile)
    ]
    return records, profile.to_json_obj()


def _projector_record(config: TowerConfig, n: int, samples: int, seed: int, anchor: str | None) -> Record:
    import random

    rng = random.Random(seed)
    failures = 0
    for _ in range(samples):
        x = random_element(config.ell, n, config.precision, rng)
        t = normalized_trace(x)
        idempotent = (normalized_trace(embed(t, n)) - t).is_indistinguishable_from_zero
        kernel = normalized_trace(project_to_kernel(x)).is_indistinguishable_from_zero
        failures += not (idempotent and kernel)
    return Record(
        name=f"projector.l{config.ell}.n{n}",
        verdict="pass" if failures == 0 else "fail",
        paper_ref=anchor,
        detail=f"{samples} samples, {failures} failures",
    )


def trace_records(
    ell: int, level: int, samples: int, precision: int, seed: int, stated: bool, with_anchor: bool
) -> list[Record]:
    if level < 1:
        raise UsageError("--level must be at least 1")
    config = _tower_config(ell, level, precision)
    c4 = ramification_profile(config).c4
    tag = f"l{ell}.n{level}"
    anchor = (lambda key: ANCHORS[key]) if with_anchor else (lambda key: None)
    records = [
        _record_from_certificate(check_t_contraction(config, level, samples, seed), f"t_contraction.{tag}", anchor("t_contraction")),
        _record_from_certificate(check_u_recursion(config, level, c4, samples, seed), f"u_recursion.{tag}", anchor("u_recursion")),
        _record_from_certificate(
            check_trace_step_derived(config, level - 1, c4, samples, seed), f"trace_step.derived.{tag}", anchor("trace_step.derived")
        ),
        _record_from_certificate(
            check_trace_identity(config, level - 1, samples, seed), f"trace_identity.{tag}", anchor("trace_identity")
        ),
        _projector_record(config, level, min(samples, 100), seed, anchor("projector")),
    ]
    for m in range(1, level):
        cert = check_t_contraction(config, level, samples, seed, base_level=m, name=f"t_contraction.base{m}")
        records.append(_record_from_certificate(cert, f"t_contraction.base{m}.{tag}", anchor("t_contraction")))
    if stated:
        records.append(
            _record_from_certificate(
                check_trace_step_stated(config, level - 1, c4, samples, seed), f"trace_step.stated.{tag}", anchor("trace_step.stated")
            )
        )
    return records


def rho_records(ell: int, level: int, samples: int, precision: int, seed: int, with_anchor: bool) -> list[Record]:
    import random

    config = _tower_config(ell, level, precision)
    rng = random.Random(seed)
    residual_failures = bound_failures = 0
    worst = None
    for _ in range(samples):
        y = project_to_kernel(random_element(ell, level, precision, rng))
        result = rho_solve(config, y)
        residual_failures += not result.residual_is_zero
        if result.valuation_margin is not None:
            bound_failures += result.valuation_margin < 0
            worst = result.valuation_margin if worst is None else min(worst, result.valuation_margin)
    anchor = ANCHORS["rho"] if with_anchor else None
    tag = f"l{ell}.n{level}"
    return [
        Record(f"rho.residual.{tag}", "pass" if residual_failures == 0 else "fail", None, anchor,
               detail=f"{samples} samples, {residual_failures} nonzero residuals"),
        Record(f"rho.bound.{tag}", "pass" if bound_failures == 0 else "fail", render_number(worst), anchor,
               detail=f"v(rho y) >= v(y) - c5 on {samples} samples"),
    ]


def vanish_records(
    ell: int, level: int, lam_text: str, samples: int, precision: int, seed: int, with_anchor: bool
) -> tuple[list[Record], dict]:
    import random

    config = _tower_config(ell, level, precision)
    lam = parse_lambda(lam_text, ell, precision)
    rng = random.Random(seed)
    anchor = ANCHORS["twisted"] if with_anchor else None
    results = []
    for _ in range(samples):
        y = random_element(ell, level, precision, rng)
        try:
            results.append(twisted_invert(config, lam, y))
        except NonInvertibleError as exc:
            raise UsageError(str(exc)) from exc
    tag = f"l{ell}.n{level}"
    residual_failures = sum(not r.residual_is_zero for r in results)
    records = [
        Record(f"twisted.residual.{tag}", "pass" if residual_failures == 0 else "fail", None, anchor,
               detail=f"{samples} samples, {residual_failures} nonzero residuals"),
    ]
    first = results[0]
    summary = {
        "ell": ell,
        "e": config.e,
        "level": level,
        "lambda": lam_text,
        "c6": first.c6,
        "c5_bound": render_number(c5_bound(ell, config.e).exact),
        "w": [render_number(w) for w in first.w_values],
        "margin": render_number(first.margin),
        "seed": seed,
        "samples": samples,
    }
    if first.margin is not None:
        records.append(
            Record(f"twisted.margin.{tag}", "pass" if first.margin > 0 else "fail", render_number(first.margin), anchor,
                   detail="w_c6 - c5 > 0")
        )
        observed = [r.contraction_observed for r in results if r.contraction_observed is not None]
        if observed:
            worst = min(observed)
            records.append(
                Record(f"twisted.contraction.{tag}", "pass" if worst > 0 else "fail", render_number(worst), anchor,
                       detail="v((lambda^(l^c6) - 1) rho(y)) - v(y) > 0")
            )
    summary["verdict"] = "fail" if any(r.verdict == "fail" for r in records) else "pass"
    return records, summary


def c6_records(ells: list[int], es: list[int] | None, with_anchor: bool) -> list[Record]:
    anchor = ANCHORS["c6"] if with_anchor else None
    records = []
    for ell in ells:
        for e in es if es is not None else [ell - 1]:
            value = c6(ell, e)
            check = check_le(f"c6.l{ell}.e{e}", value, 7 * e)
            data = {"ell": ell, "e": e, "c6": value, "c5_bound": render_number(c5_bound(ell, e).exact)}
            passed = check.passed and (value == 1 if ell >= 4 * e * e else True)
            records.append(Record(check.name, "pass" if passed else "fail", render_number(check.margin), anchor,
                                  detail=f"c6 = {value} <= 7e = {7 * e}", data=data))
    return records


# -- report all ----------------------------------------------------------------------------------------------


def bounds_exact_records(with_anchor: bool) -> list[Record]:
    """Exact values of the closed-form bounds against direct evaluation."""
    checks = []
    for g, expected in zip(range(1, 6), (2, 12, 60, 840, 2520)):
        checks.append(CheckResult(f"bounds.lcm.g{g}", serre_c_large_prime(g) == expected, f"lcm(1..{2 * g}) = {expected}"))
    checks.append(CheckResult("bounds.gl4_f3", general_linear_order(4, 3) == 24261120, "|GL_4(F_3)| = 24261120"))
    xi_value = xi(AbelianContext(g=1, degK=1, hF=Fraction(1)))
    checks.append(CheckResult("bounds.xi.g1", xi_value.is_exact and xi_value.exact == 7**16, "Xi = 7^16"))
    checks.append(CheckResult("bounds.m_exponent.l3.n2", m_exponent(3, 2) == 48, "m(3,2) = 48"))
    checks.append(
        CheckResult("bounds.field_extension_degrees.g1", field_extension_degrees(1) == (20736, 48, 216), "(20736, 48, 216)")
    )
    loglog = effective_prime_bound(2, Fraction(0), Fraction(1)).loglog10()
    checks.append(
        CheckResult(
            "bounds.effective_prime.g2.loglog10",
            Fraction(9263, 10) <= loglog.lo and loglog.hi <= Fraction(9265, 10),
            f"loglog10 in [{float(loglog.lo):.6f}, {float(loglog.hi):.6f}]",
        )
    )
    records = [_record_from_check(c, False) for c in checks]
    for link_index, link in enumerate(ker_log_chain(3, 2, 1, 2)):
        records.append(
            Record(f"ker_log.l3.f2.a1.link{link_index}", "pass" if link.holds else "fail",
                   paper_ref=ANCHORS["ker_log"] if with_anchor else None, detail=f"{link.divisor} | {link.multiple}")
        )
    return records


def _task(kind: str, kwargs: dict, timing: bool) -> list[Record]:
    start = time.perf_counter()
    if kind == "jumps":
        records, _ = jumps_records(**kwargs)
    elif kind == "trace":
        records = trace_records(**kwargs)
    elif kind == "rho":
        records = rho_records(**kwargs)
    elif kind == "vanish":
        records, _ = vanish_records(**kwargs)
    elif kind == "c6":
        records = c6_records(**kwargs)
    elif kind == "bounds":
        records = bounds_exact_records(**kwargs)
    else:
        raise ValueError(kind)
    if timing:
        elapsed = round((time.perf_counter() - start) * 1000, 3)
        records = [Record(**{**r.__dict__, "timing_ms": elapsed}) for r in records]
    return records


def run_tasks(tasks: list[tuple[str, dict]], timing: bool) -> list[Record]:
    threads = _thread_count()
    if threads == 1:
        return [r for kind, kwargs in tasks for r in _task(kind, kwargs, timing)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_task, kind, kwargs, timing) for kind, kwargs in tasks]
        return [r for f in futures for r in f.result()]


def report_all_tasks(seed: int, samples: int, precision: int, with_anchor: bool) -> list[tuple[str, dict]]:
    tasks: list[tuple[str, dict]] = []
    for ell, levels in ((3, 3), (5, 3), (7, 2)):
        tasks.append(("jumps", {"ell": ell, "levels": levels, "precision": precision, "with_anchor": with_anchor}))
    for ell, level in ((3, 1), (3, 2), (5, 1), (5, 2), (7, 1)):
        tasks.append(("trace", {"ell": ell, "level": level, "samples": samples, "precision": precision, "seed": seed,
                                "stated": True, "with_anchor": with_anchor}))
        tasks.append(("rho", {"ell": ell, "level": level, "samples": min(samples, 100), "precision": precision,
                              "seed": seed, "with_anchor": with_anchor}))
    for ell, level, lam in ((3, 2, "1 + 9"), (5, 1, "1 + 25"), (3, 1, "1 + 3*(zeta - 1)")):
        tasks.append(("vanish", {"ell": ell, "level": level, "lam_text": lam, "samples": 3, "precision": precision,
                                 "seed": seed, "with_anchor": with_anchor}))
    primes = [p for p in range(3, 60) if is_prime(p)]
    tasks.append(("c6", {"ells": primes, "es": None, "with_anchor": with_anchor}))
    tasks.append(("c6", {"ells": [37, 41, 43], "es": [3], "with_anchor": with_anchor}))
    tasks.append(("bounds", {"with_anchor": with_anchor}))
    return tasks


# -- argument parsing ------------------------------------------------------------------------------------------


def _command(args) -> list[str]:
    return list(args.argv_echo)


def _common(parser: argparse.ArgumentParser, seed: bool = False) -> None:
    parser.add_argument("--json", action="store_true", help="emit the JSON report")
    parser.add_argument("--paper-refs", action="store_true", help="annotate each record with the formula it checks")
    parser.add_argument("--timing", action="store_true", help="record wall-clock milliseconds (breaks byte determinism)")
    if seed:
        parser.add_argument("--seed", type=int, default=0)


def build_parser(config: dict | None = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="serre-bounds", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file of defaults; explicit flags take precedence")
    groups = parser.add_subparsers(dest="group", required=True)

    bounds = groups.add_parser("bounds", help="evaluate explicit global bounds")
    bounds_sub = bounds.add_subparsers(dest="action", required=True)
    evaluate = bounds_sub.add_parser("eval", help="evaluate bound operations on a context")
    evaluate.add_argument("--context", help="context JSON file")
    for name, help_text in CONTEXT_FLAGS.items():
        evaluate.add_argument(f"--{name}", dest=name, help=help_text)
    for name in CONTEXT_SWITCHES:
        evaluate.add_argument(f"--{name.replace('_', '-')}", dest=name, action=argparse.BooleanOptionalAction, default=None)
    which = evaluate.add_mutually_exclusive_group()
    which.add_argument("--all", action="store_true", help="every operation (default)")
    which.add_argument("--op", choices=sorted(OPERATIONS), help="a single operation")
    evaluate.add_argument("--format", choices=("json", "csv"), default="json")
    evaluate.add_argument("--paper-refs", action="store_true", help="annotate each row with the formula it evaluates")

    tower = groups.add_parser("tower", help="ramification and trace verifications")
    tower_sub = tower.add_subparsers(dest="action", required=True)
    jumps = tower_sub.add_parser("jumps", help="ramification profile and constants")
    jumps.add_argument("--ell", type=int, required=True)
    jumps.add_argument("--levels", type=int, required=True)
    jumps.add_argument("--precision", type=int, default=20)
    _common(jumps)
    trace = tower_sub.add_parser("trace-check", help="sampled trace and projector inequalities")
    trace.add_argument("--ell", type=int, required=True)
    trace.add_argument("--level", type=int, required=True)
    trace.add_argument("--samples", type=int, default=1000)
    trace.add_argument("--precision", type=int, default=20)
    trace.add_argument("--stated", action="store_true", help="also check the trace step in its literal stated form")
    _common(trace, seed=True)

    cohomology = groups.add_parser("cohomology", help="twisted-operator verifications")
    cohomology_sub = cohomology.add_subparsers(dest="action", required=True)
    c6_parser = cohomology_sub.add_parser("c6", help="the constant c6 (sweep over small primes by default)")
    c6_parser.add_argument("--ell", type=int)
    c6_parser.add_argument("--e", type=int)
    c6_parser.add_argument("--max-ell", type=int, default=60)
    _common(c6_parser)
    vanish = cohomology_sub.add_parser("vanish-check", help="invert sigma - lambda and certify the contraction")
    vanish.add_argument("--ell", type=int, required=True)
    vanish.add_argument("--level", type=int, required=True)
    vanish.add_argument("--lambda", dest="lam", required=True, help="expression in zeta and integers, e.g. '1 + 9'")
    vanish.add_argument("--samples", type=int, default=3)
    vanish.add_argument("--precision", type=int, default=20)
    _common(vanish, seed=True)

    report = groups.add_parser("report", help="full verification sweep")
    report_sub = report.add_subparsers(dest="action", required=True)
    report_all = report_sub.add_parser("all", help="run every verification")
    report_all.add_argument("--samples", type=int, default=200)
    report_all.add_argument("--precision", type=int, default=20)
    _common(report_all, seed=True)

    if config:
        for sub in (evaluate, jumps, trace, c6_parser, vanish, report_all):
            known = {a.dest for a in sub._actions}
            sub.set_defaults(**{k: v for k, v in config.items() if k in known})
    return parser


def _config_dests() -> set[str]:
    parser = build_parser()
    names = set()
    stack = [parser]
    while stack:
        p = stack.pop()
        for action in p._actions:
            names.add(action.dest)
            if isinstance(action, argparse._SubParsersAction):
                stack.extend(action.choices.values())
    return names - {"help", "version", "config", "group", "action"}


def _load_config(argv: list[str]) -> dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    try:
        with open(known.config, encoding="utf-8") as handle:
            config = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load config: {exc}") from exc
    if not isinstance(config, dict):
        raise UsageError("config must be a JSON object")
    config = {k.replace("-", "_"): v for k, v in config.items()}
    if "lambda" in config:
        config["lam"] = config.pop("lambda")
    unknown = set(config) - _config_dests()
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    return config


def _positive(value: int, flag: str) -> None:
    if value < 1:
        raise UsageError(f"{flag} must be positive")


def _text(report: RunReport, extra: str = "") -> str:
    lines = [extra] if extra else []
    for r in report.records:
        margin = f" margin={r.margin}" if r.margin is not None else ""
        ref = f"  [{r.paper_ref}]" if r.paper_ref else ""
        lines.append(f"{r.verdict.upper():4} {r.name}{margin}  {r.detail}{ref}".rstrip())
    lines.append(f"status: {report.status}")
    return "\n".join(lines) + "\n"


def dispatch(args) -> tuple[RunReport, str]:
    with_anchor = getattr(args, "paper_refs", False)
    timing = getattr(args, "timing", False)
    if args.group == "bounds":
        return cmd_bounds(args)
    if args.group == "tower" and args.action == "jumps":
        _positive(args.precision, "--precision")
        records, profile = jumps_records(args.ell, args.levels, args.precision, with_anchor)
        report = RunReport(command=_command(args), records=tuple(records), rows=(profile,))
        summary = f"l={profile['ell']} e={profile['e']} upper jumps={profile['upper_jumps']} kappa={profile['kappa']}"
        return report, report.to_json() if args.json else _text(report, summary)
    if args.group == "tower" and args.action == "trace-check":
        _positive(args.samples, "--samples")
        _positive(args.precision, "--precision")
        records = run_tasks(
            [("trace", {"ell": args.ell, "level": args.level, "samples": args.samples, "precision": args.precision,
                        "seed": args.seed, "stated": args.stated, "with_anchor": with_anchor})],
            timing,
        )
        report = RunReport(command=_command(args), seed=args.seed, records=tuple(records))
        return report, report.to_json() if args.json else _text(report)
    if args.group == "cohomology" and args.action == "c6":
        if args.ell is not None:
            if not is_prime(args.ell):
                raise UsageError("--ell must be a prime")
            ells = [args.ell]
        else:
            ells = [p for p in range(3, args.max_ell + 1) if is_prime(p)]
        es = None
        if args.e is not None:
            _positive(args.e, "--e")
            es = [args.e]
        report = RunReport(command=_command(args), records=tuple(c6_records(ells, es, with_anchor)))
        return report, report.to_json() if args.json else _text(report)
    if args.group == "cohomology" and args.action == "vanish-check":
        _positive(args.samples, "--samples")
        _positive(args.precision, "--precision")
        records, summary = vanish_records(
            args.ell, args.level, args.lam, args.samples, args.precision, args.seed, with_anchor
        )
        report = RunReport(command=_command(args), seed=args.seed, records=tuple(records), rows=(summary,))
        text = f"c6={summary['c6']} c5_bound={summary['c5_bound']} margin={summary['margin']}"
        return report, report.to_json() if args.json else _text(report, text)
    if args.group == "report" and args.action == "all":
        _positive(args.samples, "--samples")
        _positive(args.precision, "--precision")
        records = run_tasks(report_all_tasks(args.seed, args.samples, args.precision, with_anchor), timing)
        report = RunReport(command=_command(args), seed=args.seed, records=tuple(records))
        return report, report.to_json() if args.json else _text(report)
    raise UsageError("unknown command")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        config = _load_config(argv)
        args = build_parser(config).parse_args(argv)
        args.argv_echo = argv
        report, text = dispatch(args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    except (UsageError, ContextError, TowerSizeError, InsufficientLevelsError, NonInvertibleError, PrecisionError) as exc:
        print(f"serre-bounds: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
