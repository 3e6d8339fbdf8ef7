"""Command-line entry point.

Every subcommand builds a report ``{"config", "table", "verdict", "version"}``
(plus a few command-specific keys) and writes it as sorted-key JSON or as CSV
table rows.  Reports carry no timestamps, so a fixed configuration gives
byte-identical output.

Exit codes: 0 success, 2 parse error, 3 unsound truncation, 4 unsupported
comparison, 5 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass

from . import __version__
from .complexes import CohomologyTable
from .exactlin import GF, QQ, ZZ, Coefficients

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_TRUNCATION = 3
EXIT_UNSUPPORTED = 4
EXIT_INVARIANT = 5


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    command: str
    algebra: str | None = None
    p: int | None = None
    levels: int = 2
    prec: int = 8
    deg: int = 6
    over: str | None = None
    trunc: int = 5
    demo: str | None = None
    weights: int = 3
    seed: int = 0
    format: str = "json"

    def validate(self) -> None:
        for name in ("levels", "prec", "deg", "trunc", "weights"):
            if getattr(self, name) < 0 or (name in ("levels", "prec") and getattr(self, name) < 1):
                raise CliError(EXIT_PARSE, f"--{name} must be positive")
        if self.algebra is not None:
            uses_fp = self.algebra.strip().startswith("Fp")
            if uses_fp and self.p is None:
                raise CliError(EXIT_PARSE, "Fp algebras need --p")
            if not uses_fp and self.p is not None and not self.algebra.strip().startswith("F"):
                raise CliError(EXIT_PARSE, "--p is only meaningful for Fp algebras")

    def echo(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None and k != "format"}


def _table_rows(table: CohomologyTable) -> list[dict]:
    return table.rows()


def _report(config: RunConfig, table: list[dict], verdict, **extra) -> dict:
    out = {"config": config.echo(), "table": table, "verdict": verdict, "version": __version__}
    out.update(extra)
    return out


def _algebra(config: RunConfig):
    from .infcoh import GrammarError, parse_algebra

    if config.algebra is None:
        raise CliError(EXIT_PARSE, "--algebra is required")
    try:
        return parse_algebra(config.algebra, config.p)
    except GrammarError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None


def _ring(text: str, p: int | None) -> Coefficients:
    t = text.strip()
    if t == "Z":
        return ZZ
    if t == "Q":
        return QQ
    try:
        if t == "Fp":
            if p is None:
                raise CliError(EXIT_PARSE, "--over Fp needs --p")
            return GF(p)
        if t.startswith("F"):
            return GF(int(t[1:]))
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None
    raise CliError(EXIT_PARSE, f"cannot parse ring {text!r}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_infcoh(config: RunConfig) -> dict:
    from .infcoh import cech_alexander, inf_cohomology, spurious_kernel

    X = _algebra(config)
    if config.prec <= config.deg:
        tower = cech_alexander(X, config.levels, config.prec, config.deg)
        kernel = ", ".join(spurious_kernel(tower))
        raise CliError(
            EXIT_TRUNCATION,
            f"unsound truncation: prec {config.prec} <= D {config.deg}; "
            f"the degree-0 kernel at this truncation is spanned by [{kernel}] and no degree is trusted",
        )
    table = inf_cohomology(cech_alexander(X, config.levels, config.prec, config.deg))
    window = table.trusted_window
    return _report(config, _table_rows(table), None, trusted_window=list(window) if window else None)


def cmd_derham(config: RunConfig) -> dict:
    from .infcoh import de_rham_classes, de_rham_cohomology

    X = _algebra(config)
    table = de_rham_cohomology(X, config.deg)
    extra = {}
    if X.d == 1:
        extra["classes"] = {str(k): v for k, v in de_rham_classes(X, config.deg).items()}
    return _report(config, _table_rows(table), None, **extra)


def cmd_compare(config: RunConfig) -> dict:
    from .infcoh import UnsupportedComparison, compare_inf_derham

    X = _algebra(config)
    if config.prec <= config.deg:
        raise CliError(EXIT_TRUNCATION, f"unsound truncation: prec {config.prec} <= D {config.deg}")
    try:
        res = compare_inf_derham(X, config.levels, config.prec, config.deg)
    except UnsupportedComparison as exc:
        raise CliError(EXIT_UNSUPPORTED, f"{exc}; in characteristic p infinitesimal and de Rham cohomology differ") from None
    window = list(res.trusted_window) if res.trusted_window else None
    return _report(config, _table_rows(res.inf), res.verdict, derham=_table_rows(res.derham), trusted_window=window)


def cmd_redshift_demo(config: RunConfig) -> dict:
    from .complexes import cohomology
    from .cs_rings import tot_pi
    from .graded_mixed import zu_piece, zv_piece

    R = _ring(config.over or "Z", config.p)
    rows = []
    ok = True
    for n in range(config.weights + 1):
        for label, A in (("u", zu_piece(n, 2 * n + 2, 1, R)), ("v", zv_piece(n, 1, 2 * n + 2, R))):
            H = cohomology(tot_pi(A))
            expected = 2 * n if label == "u" else -2 * n
            nz = H.nonzero()
            good = set(nz) == {expected} and nz[expected].free_rank == 1 and not nz[expected].torsion and expected in H.trusted
            ok = ok and good
            rows.append(
                {
                    "weight": n if label == "u" else -n,
                    "piece": label,
                    "degree": expected,
                    "rank": H[expected].free_rank,
                    "torsion": list(H[expected].torsion),
                    "trusted": expected in H.trusted,
                    "other_degrees_zero": set(nz) <= {expected},
                }
            )
    return _report(config, rows, "pass" if ok else "fail")


def cmd_divided_power(config: RunConfig) -> dict:
    from .graded_mixed import check_negative_weight_product
    from .simplicial import TruncationError

    R = _ring(config.over or "Z", config.p)
    try:
        res = check_negative_weight_product(config.trunc, R)
    except TruncationError as exc:
        raise CliError(EXIT_TRUNCATION, str(exc)) from None
    scalar = int(res.scalar) if R.kind != "Q" else str(res.scalar)
    row = {
        "degree": -4,
        "rank": res.h4.free_rank,
        "torsion": list(res.h4.torsion),
        "trusted": True,
    }
    unit = R.is_field and not R.is_zero(res.scalar)
    return _report(config, [row], None, scalar=scalar, square_is_boundary=res.square_is_boundary, scalar_is_unit=unit)


DEMOS = ("unit", "pair-groupoid", "Ga", "Gm")


def cmd_integrate(config: RunConfig) -> dict:
    from .foliations import (
        FormalGroupoid,
        additive_formal_group,
        differentiate,
        foliation_cohomology,
        integrate,
        loop_space,
        multiplicative_formal_group,
        pair_groupoid,
        same_foliation,
        same_structure,
        unit_groupoid,
    )

    demo = config.demo or "pair-groupoid"
    if demo not in DEMOS:
        raise CliError(EXIT_PARSE, f"unknown demo {demo!r}; choose from {', '.join(DEMOS)}")
    if config.prec < 2:
        raise CliError(EXIT_TRUNCATION, "integration needs prec >= 2")
    if demo in ("unit", "pair-groupoid"):
        X = _algebra(config)
        G = unit_groupoid(X, config.prec) if demo == "unit" else pair_groupoid(X, config.prec)
    else:
        R = _ring(config.over or (config.algebra or "Q"), config.p)
        G = additive_formal_group(R, config.prec) if demo == "Ga" else multiplicative_formal_group(R, config.prec)
    F = differentiate(G, N=config.levels)
    H = integrate(F)
    forward = same_structure(G, H)
    backward = same_foliation(F, differentiate(H, N=config.levels))
    serial = same_structure(G, FormalGroupoid.from_json(json.loads(G.dumps())))
    if not (forward and backward and serial):
        raise CliError(EXIT_INVARIANT, f"round trip failed (integrate.differentiate {forward}, differentiate.integrate {backward}, json {serial})")
    table = foliation_cohomology(F)
    return _report(
        config,
        _table_rows(table),
        "pass",
        round_trip="pass",
        cotangent_rank=F.rank,
        groupoid=G.to_json(),
        arrow_functions=_table_rows(foliation_cohomology(loop_space(F).foliation)),
    )


COMMANDS = {
    "infcoh": cmd_infcoh,
    "derham": cmd_derham,
    "compare": cmd_compare,
    "redshift-demo": cmd_redshift_demo,
    "divided-power": cmd_divided_power,
    "integrate": cmd_integrate,
}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    rows = report["table"]
    buf = io.StringIO()
    keys = sorted({k for r in rows for k in r}) if rows else ["degree", "rank", "torsion", "trusted"]
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ";".join(map(str, v)) if isinstance(v, list) else v for k, v in r.items()})
    return buf.getvalue()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_PARSE, message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="infol", description="Infinitesimal cohomology, red-shift and foliation computations.")
    parser.add_argument("--version", action="version", version=f"infol {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--algebra", help='polynomial algebra, e.g. "Q[x,y]", "Z[x]", "Fp[x]" with --p')
        sp.add_argument("--p", type=int, help="prime for Fp")
        sp.add_argument("--levels", type=int, default=2, help="cosimplicial levels N")
        sp.add_argument("--prec", type=int, default=8, help="adic precision")
        sp.add_argument("--deg", type=int, default=6, help="total degree bound D")
        sp.add_argument("--over", help="coefficient ring: Z, Q, Fp (with --p) or F<prime>")
        sp.add_argument("--trunc", type=int, default=5, help="simplicial truncation level")
        sp.add_argument("--demo", help=f"groupoid family: {', '.join(DEMOS)}")
        sp.add_argument("--weights", type=int, default=3, help="largest weight for red-shift pieces")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--out", help="write the report here instead of stdout")
    return parser


def run(argv: list[str]) -> tuple[int, str, str]:
    """Returns (exit code, stdout text, stderr text)."""
    try:
        ns = build_parser().parse_args(argv)
        config = RunConfig(
            command=ns.command,
            algebra=ns.algebra,
            p=ns.p,
            levels=ns.levels,
            prec=ns.prec,
            deg=ns.deg,
            over=ns.over,
            trunc=ns.trunc,
            demo=ns.demo,
            weights=ns.weights,
            seed=ns.seed,
            format=ns.format,
        )
        config.validate()
        report = COMMANDS[ns.command](config)
        text = render(report, config.format)
    except CliError as exc:
        return exc.code, "", f"infol: {exc}\n"
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0), "", ""
    except Exception as exc:  # an internal invariant broke
        return EXIT_INVARIANT, "", f"infol: internal error: {type(exc).__name__}: {exc}\n"
    if ns.out:
        with open(ns.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        return EXIT_OK, "", ""
    return EXIT_OK, text, ""


def main(argv: list[str] | None = None) -> int:
    code, out, err = run(sys.argv[1:] if argv is None else argv)
    if out:
        sys.stdout.write(out)
    if err:
        sys.stderr.write(err)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
