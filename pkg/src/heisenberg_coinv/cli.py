"""Command-line entry point: ``heisenberg-coinv <command> [options]``.

Exit codes: 0 all checks passed, 2 configuration error, 3 truncation too
short, 4 invariant violated (the report carries a witness).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .checks import axioms_suites
from .coinvariants import CoinvariantProblem, coinvariant_dims, exp_series_terms, exponentiate, pi0_oracle
from .curves import curve_from_config, curve_outgoing, expand_functions, residue_isotropy_report
from .errors import (
    ConfigInvalid,
    InvariantViolation,
    LevelUnsupported,
    MarginTooSmall,
    NotNilpotent,
    SingularFactor,
    TruncationInsufficient,
)
from .fock import FockVector, pbw_basis_upto
from .lattice import lattice_from_config
from .ppav import extract_outgoing, point_from_config, sp_act, word_matrix

EXIT_OK, EXIT_CONFIG, EXIT_TRUNCATION, EXIT_VIOLATION = 0, 2, 3, 4

# how far past the requested margins the outgoing data is computed, so the
# stabilization passes (M_deg up to start + 4) stay certified
_AUTO_EXTRA_DEG = 4


@dataclass(frozen=True)
class RunConfig:
    command: str
    lattice: str
    level: int
    n_deg: int | None
    margins: tuple | None
    point: str | None
    curve: str | None
    word: str
    out: str | None
    fmt: str
    timing: bool

    def margin_values(self, n_deg: int) -> tuple[int, int, int]:
        if self.margins is None:
            return n_deg, 0, n_deg + _AUTO_EXTRA_DEG
        m_pole, m_deg, n_trunc = self.margins
        if m_pole < n_deg or n_trunc < n_deg + m_deg:
            raise ConfigInvalid(
                f"margins need M_pole >= N_deg and N_trunc >= N_deg + M_deg, got {self.margins} with N_deg={n_deg}"
            )
        return m_pole, m_deg, n_trunc


def _parse_margins(text: str | None):
    if text is None or text == "auto":
        return None
    try:
        parts = tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigInvalid(f"--margins expects M_pole,M_deg,N_trunc or 'auto', got {text!r}") from exc
    if len(parts) != 3 or min(parts) < 0:
        raise ConfigInvalid(f"--margins expects three nonnegative integers, got {text!r}")
    return parts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heisenberg-coinv", description="Exact Heisenberg coinvariant computations.")
    parser.add_argument("command", choices=["axioms", "coinv", "orbit", "curve-expand", "isotropy", "exp-check"])
    parser.add_argument("--lattice", default="A1", help="preset (A1, A2, A1^k), inline JSON Gram matrix, or JSON file")
    parser.add_argument("--level", type=int, default=1, choices=[0, 1])
    parser.add_argument("--ndeg", type=int, default=None, help="maximal Fock degree (axioms: depth; curve-expand/isotropy: trunc order)")
    parser.add_argument("--margins", default="auto", help="M_pole,M_deg,N_trunc or 'auto'")
    parser.add_argument("--point", help="point preset (zero-g1, zero-g2, phi11-g1) or JSON file")
    parser.add_argument("--curve", help="curve preset (elliptic-j0, genus2-bolza-like) or JSON file")
    parser.add_argument("--word", default="", help="Sp(2g,Z) word over S and T, applied left to right")
    parser.add_argument("--out", help="write the JSON report here instead of stdout")
    parser.add_argument("--format", dest="fmt", default="json", choices=["json", "table"])
    parser.add_argument("--timing", action="store_true", help="record elapsed_ms (reports are then not byte-stable)")
    return parser


def _config(ns: argparse.Namespace) -> RunConfig:
    if ns.ndeg is not None and ns.ndeg < 0:
        raise ConfigInvalid("--ndeg must be nonnegative")
    return RunConfig(
        ns.command, ns.lattice, ns.level, ns.ndeg, _parse_margins(ns.margins),
        ns.point, ns.curve, ns.word, ns.out, ns.fmt, ns.timing,
    )


# -- commands -------------------------------------------------------------------------

def cmd_axioms(cfg: RunConfig) -> tuple[int, dict]:
    lattice = lattice_from_config(cfg.lattice)
    depth = 6 if cfg.n_deg is None else cfg.n_deg
    suites = axioms_suites(lattice, depth)
    passed = all(s.passed for s in suites)
    report = {"lattice": lattice.to_json(), "depth": depth, "passed": passed, "suites": [s.to_json() for s in suites]}
    return (EXIT_OK if passed else EXIT_VIOLATION), report


def _outgoing_for(cfg: RunConfig, point, n_deg: int):
    m_pole, m_deg, n_trunc = cfg.margin_values(n_deg)
    margins = (m_pole, m_deg, n_trunc)
    if cfg.curve is not None:
        return curve_outgoing(curve_from_config(cfg.curve), m_pole, max(n_trunc, m_pole)), margins
    return extract_outgoing(point, max(m_pole, point.p_max + point.g), max(n_trunc, point.p_max)), margins


def _coinv_report(cfg: RunConfig, lattice, outgoing, margins, n_deg: int) -> dict:
    m_pole, m_deg, n_trunc = margins
    problem = CoinvariantProblem(lattice, cfg.level, outgoing, n_deg, m_pole, m_deg, n_trunc)
    max_m = m_deg + _AUTO_EXTRA_DEG if cfg.margins is None else None
    return coinvariant_dims(problem, max_m_deg=max_m, timing=cfg.timing).to_json()


def cmd_coinv(cfg: RunConfig) -> tuple[int, dict]:
    if (cfg.point is None) == (cfg.curve is None):
        raise ConfigInvalid("coinv needs exactly one of --point or --curve")
    lattice = lattice_from_config(cfg.lattice)
    n_deg = 6 if cfg.n_deg is None else cfg.n_deg
    point = None
    if cfg.point is not None:
        point = point_from_config(cfg.point)
        for sigma in word_matrix(cfg.word, point.g):
            point = sp_act(sigma, point)
    elif cfg.word:
        raise ConfigInvalid("--word acts on points, not curves")
    outgoing, margins = _outgoing_for(cfg, point, n_deg)
    report = _coinv_report(cfg, lattice, outgoing, margins, n_deg)
    status = EXIT_OK
    if cfg.level == 0:
        oracle = pi0_oracle(lattice, outgoing, n_deg)
        report["oracle_match"] = list(oracle.filtered_dims) == report["filtered_dims"]
        if not report["oracle_match"]:
            report["oracle_filtered_dims"] = list(oracle.filtered_dims)
            status = EXIT_VIOLATION
    return status, report


def cmd_orbit(cfg: RunConfig) -> tuple[int, dict]:
    if cfg.point is None:
        raise ConfigInvalid("orbit needs --point")
    lattice = lattice_from_config(cfg.lattice)
    n_deg = 6 if cfg.n_deg is None else cfg.n_deg
    before = point_from_config(cfg.point)
    after = before
    for sigma in word_matrix(cfg.word, before.g):
        after = sp_act(sigma, after)
    f_before, margins = _outgoing_for(cfg, before, n_deg)
    f_after, _ = _outgoing_for(cfg, after, n_deg)
    r_before = _coinv_report(cfg, lattice, f_before, margins, n_deg)
    r_after = _coinv_report(cfg, lattice, f_after, margins, n_deg)
    span_equal = f_before.span_equals(f_after)
    same = json.dumps(r_before, sort_keys=True) == json.dumps(r_after, sort_keys=True) if not cfg.timing else (
        r_before["filtered_dims"] == r_after["filtered_dims"]
    )
    report = {
        "word": cfg.word,
        "omega_before": before.to_json()["omega"],
        "omega_after": after.to_json()["omega"],
        "frame_after": after.to_json()["frame"],
        "span_equal": span_equal,
        "reports_equal": same,
        "report": r_after,
    }
    return (EXIT_OK if span_equal and same else EXIT_VIOLATION), report


def cmd_curve_expand(cfg: RunConfig) -> tuple[int, dict]:
    if cfg.curve is None:
        raise ConfigInvalid("curve-expand needs --curve")
    curve = curve_from_config(cfg.curve)
    N = 4 * curve.y_pole if cfg.n_deg is None else cfg.n_deg
    funcs = expand_functions(curve, N, N)
    names = {}
    for (a, e), f in funcs.items():
        label = ("x^%d" % a if a else "1") if not e else ("x^%d*y" % a if a else "y")
        names[label] = f.to_json()
    return EXIT_OK, {"curve": curve.to_json(), "trunc": N, "functions": names}


def cmd_isotropy(cfg: RunConfig) -> tuple[int, dict]:
    N = 40 if cfg.n_deg is None else cfg.n_deg
    if cfg.curve is not None:
        lattice = curve_outgoing(curve_from_config(cfg.curve), N, N)
    elif cfg.point is not None:
        point = point_from_config(cfg.point)
        lattice = extract_outgoing(point, N, max(N, point.p_max))
    else:
        raise ConfigInvalid("isotropy needs --curve or --point")
    rep = residue_isotropy_report(lattice)
    report = {"source": lattice.source, "gap_set": list(lattice.gap_set), "genus": lattice.genus, **rep.to_json()}
    if rep.needs_retry:
        return EXIT_TRUNCATION, report
    ok = rep.passed and lattice.is_complete()
    return (EXIT_OK if ok else EXIT_VIOLATION), report


def cmd_exp_check(cfg: RunConfig) -> tuple[int, dict]:
    lattice = lattice_from_config(cfg.lattice)
    depth = 6 if cfg.n_deg is None else cfg.n_deg
    pairs = [(m, n) for m in range(-2, 3) for n in range(m, 3) if not (m < 0 and n < 0) and m + n != 0]
    failures, checked = [], 0
    for mono in pbw_basis_upto(lattice.rank, depth):
        v = FockVector(lattice, 1, {mono: 1})
        deg = -sum(k for k, _ in mono)
        for m, n in pairs:
            checked += 1
            terms = exp_series_terms(m, n, v)
            if m + n > 0 and len(terms) > -(-deg // (m + n)) + 1:
                failures.append({"m": m, "n": n, "vector": v.to_json(), "issue": "term bound", "terms": len(terms)})
            if exponentiate(m, n, exponentiate(m, n, v), -1) != v:
                failures.append({"m": m, "n": n, "vector": v.to_json(), "issue": "exp(X)exp(-X) != id"})
    report = {"depth": depth, "generators": [list(p) for p in pairs], "checked": checked,
              "passed": not failures, "failures": failures}
    return (EXIT_OK if not failures else EXIT_VIOLATION), report


COMMANDS = {
    "axioms": cmd_axioms,
    "coinv": cmd_coinv,
    "orbit": cmd_orbit,
    "curve-expand": cmd_curve_expand,
    "isotropy": cmd_isotropy,
    "exp-check": cmd_exp_check,
}


# -- output -------------------------------------------------------------------------------

def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    lines = []
    width = max((len(k) for k in report), default=0)
    for key in sorted(report):
        val = report[key]
        if isinstance(val, (dict, list)):
            val = json.dumps(val, sort_keys=True)
        lines.append(f"{key.ljust(width)}  {val}")
    return "\n".join(lines) + "\n"


def run(argv: list[str] | None = None) -> tuple[int, str, str | None]:
    """Execute one command; returns (exit status, rendered report, path written or None)."""
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as exc:
        return (EXIT_CONFIG if exc.code else EXIT_OK), "", None
    try:
        cfg = _config(ns)
        status, report = COMMANDS[cfg.command](cfg)
    except (ConfigInvalid, LevelUnsupported, NotNilpotent) as exc:
        status, report = EXIT_CONFIG, {"error": type(exc).__name__, "message": str(exc)}
    except (TruncationInsufficient, MarginTooSmall) as exc:
        status, report = EXIT_TRUNCATION, {"error": type(exc).__name__, "message": str(exc)}
    except (InvariantViolation, SingularFactor) as exc:
        witness = getattr(exc, "witness", None)
        status, report = EXIT_VIOLATION, {"error": type(exc).__name__, "message": str(exc), "witness": repr(witness)}
    text = render(report, ns.fmt)
    if ns.out and "error" not in report:
        Path(ns.out).write_text(text)
        return status, text, ns.out
    return status, text, None


def main(argv: list[str] | None = None) -> int:
    status, text, written = run(argv)
    if written is None:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
