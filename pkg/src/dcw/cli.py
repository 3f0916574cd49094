"""Command-line surface: analytic tables, Monte-Carlo runs, verify suites.

Every command writes either CSV (column order frozen, versioned in the
leading comment line) or JSON (keys sorted), to --out or stdout.  Output
bytes depend only on the arguments and the seed; floats are printed with
repr so nothing is locale-dependent or truncated.

Exit codes: 0 ok, 2 usage, 3 regime, 4 check-failure, 5 resource.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .doping import DopingEnsemble, parse_ensemble
from .errors import (
    CheckFailure,
    ConditioningError,
    ConsistencyError,
    DcwError,
    RegimeError,
    ResourceLimitError,
    UsageError,
)
from .monomials import enumerate_monomials, monomial_count
from .predictions import (
    StateDesignReport,
    diagonal_excess_lower_bound,
    diagonal_excess_regime,
    envelope_crossing_time,
    excess_bracket,
    f_threshold,
    frame_potential,
    infinity_norm_lower_bound,
    min_doping_large_k,
    min_doping_relative_design,
    state_report,
)
from .simulator import McEstimate, mc_frame_potential, mc_state_purity

CSV_VERSION = "v1"

EXIT_FOR = (
    (UsageError, 2),
    (RegimeError, 3),
    (ResourceLimitError, 5),
    (CheckFailure, 4),
    (ConsistencyError, 4),
    (ConditioningError, 4),
)


@dataclass(frozen=True)
class RunConfig:
    command: str
    k: int | None
    n: int | None
    t: int
    t_max: int | None
    ensemble: str
    gate: str | None
    samples: int
    seed: int
    digits: int
    out: str | None
    format: str
    suite: str | None = None

    def t_range(self) -> range:
        if self.t_max is not None:
            if self.t_max < 0:
                raise UsageError(f"--t-max must be >= 0, got {self.t_max}")
            return range(0, self.t_max + 1)
        return range(self.t, self.t + 1)

    def doping(self) -> DopingEnsemble:
        text = self.ensemble
        if self.gate is not None:
            if text not in ("discrete", "discrete:tgate"):
                raise UsageError("--gate only makes sense with "
                                 "--ensemble discrete")
            text = f"discrete:{self.gate}"
        return parse_ensemble(text)


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        command=args.command,
        k=getattr(args, "k", None),
        n=getattr(args, "n", None),
        t=getattr(args, "t", 0),
        t_max=getattr(args, "t_max", None),
        ensemble=getattr(args, "ensemble", "diagonal"),
        gate=getattr(args, "gate", None),
        samples=getattr(args, "samples", 100000),
        seed=getattr(args, "seed", 0),
        digits=getattr(args, "digits", 50),
        out=getattr(args, "out", None),
        format=getattr(args, "format", "csv"),
        suite=getattr(args, "suite", None),
    )
    if cfg.format not in ("csv", "json"):
        raise UsageError(f"--format must be csv or json, got {cfg.format!r}")
    if cfg.samples < 2:
        raise UsageError(f"--samples must be >= 2, got {cfg.samples}")
    if cfg.digits < 1:
        raise UsageError(f"--digits must be >= 1, got {cfg.digits}")
    if cfg.seed < 0:
        raise UsageError(f"--seed must be >= 0, got {cfg.seed}")
    return cfg


def _write(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_table(cfg: RunConfig, name: str, columns: tuple,
                rows: list, json_payload) -> None:
    if cfg.format == "json":
        _write(cfg, json.dumps(json_payload, indent=2, sort_keys=True) + "\n")
        return
    buf = io.StringIO()
    buf.write(f"# dcw {name} csv {CSV_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    _write(cfg, buf.getvalue())


# ------------------------------------------------------------------ commands


def cmd_enumerate(cfg: RunConfig) -> int:
    k = cfg.k
    if k is None or not 2 <= k <= 7:
        raise UsageError(f"enumerate needs 2 <= k <= 7, got {k}")
    basis = enumerate_monomials(k)
    payload = basis.to_json_dict()
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"{len(basis)} monomials, "
          f"{len(basis.permutation_indices)} permutations")
    return 0


def cmd_gram(cfg: RunConfig) -> int:
    from .weingarten import z_normalization

    if cfg.k is None or cfg.n is None:
        raise UsageError("gram needs --k and --n")
    k, n = cfg.k, cfg.n
    if not 2 <= k <= 7:
        raise UsageError(f"gram needs 2 <= k <= 7, got {k}")
    basis = enumerate_monomials(k)
    zn = z_normalization(k, n)
    invertible = n >= k - 1
    columns = ("k", "n", "monomials", "permutations", "z_n", "invertible")
    row = [str(k), str(n), str(len(basis)),
           str(len(basis.permutation_indices)), str(zn),
           str(int(invertible))]
    payload = {"k": k, "n": n, "monomials": len(basis),
               "permutations": len(basis.permutation_indices),
               "z_n": str(zn), "invertible": invertible}
    _emit_table(cfg, "gram", columns, [row], payload)
    return 0


FRAME_COLUMNS = ("t", "f_t", "excess", "bracket_low", "bracket_high",
                 "in_bracket")


def cmd_frame_potential(cfg: RunConfig) -> int:
    if cfg.k is None or cfg.n is None:
        raise UsageError("frame-potential needs --k and --n")
    ens = cfg.doping()
    rows, payload = [], []
    for t in cfg.t_range():
        rep = frame_potential(cfg.n, cfg.k, t, ens, digits=cfg.digits)
        rows.append([
            str(t), repr(float(rep.f_t)), repr(float(rep.excess)),
            "" if rep.thm_lower is None else repr(rep.thm_lower),
            "" if rep.thm_upper is None else repr(rep.thm_upper),
            "" if rep.in_bracket is None else str(int(rep.in_bracket)),
        ])
        payload.append(rep.to_json_dict())
    _emit_table(cfg, "frame-potential", FRAME_COLUMNS, rows, payload)
    return 0


def cmd_state_design(cfg: RunConfig) -> int:
    if cfg.k is None or cfg.n is None:
        raise UsageError("state-design needs --k and --n")
    ens = cfg.doping()
    rows, payload = [], []
    for t in cfg.t_range():
        rep = state_report(cfg.n, cfg.k, t, ens, digits=cfg.digits)
        rows.append(rep.csv_row()[2:3] + rep.csv_row()[4:])
        payload.append(rep.to_json_dict())
    columns = StateDesignReport.CSV_COLUMNS[2:3] + \
        StateDesignReport.CSV_COLUMNS[4:]
    _emit_table(cfg, "state-design", columns, rows, payload)
    return 0


BOUND_COLUMNS = ("quantity", "k", "n", "t", "delta", "ensemble", "value",
                 "regime")
_DELTA_GRID = (1.0, 0.5, 0.25, 0.1)


def cmd_bounds(cfg: RunConfig) -> int:
    if cfg.k is None or cfg.n is None:
        raise UsageError("bounds needs --k and --n")
    k, n, t = cfg.k, cfg.n, cfg.t
    ens = cfg.doping()
    rows = []

    def add(quantity, value, delta="", regime="ok", with_t=False):
        rows.append([quantity, str(k), str(n), str(t) if with_t else "",
                     delta, ens.label if quantity.startswith("min_doping")
                     or quantity == "infinity_norm_lower" else "",
                     value, regime])

    def attempt(quantity, fn, delta="", with_t=False):
        try:
            add(quantity, repr(float(fn())), delta, "ok", with_t)
        except (RegimeError, UsageError) as err:
            add(quantity, "", delta, str(err), with_t)

    attempt("f_threshold", lambda: f_threshold(k, t), with_t=True)
    attempt("excess_bracket_low", lambda: excess_bracket(k, t)[0],
            with_t=True)
    attempt("excess_bracket_high", lambda: excess_bracket(k, t)[1],
            with_t=True)
    for delta in _DELTA_GRID:
        attempt("min_doping_relative",
                lambda d=delta: min_doping_relative_design(n, k, d, ens),
                delta=repr(delta))
    for delta in _DELTA_GRID:
        attempt("min_doping_large_k",
                lambda d=delta: min_doping_large_k(n, k, d),
                delta=repr(delta))
    attempt("infinity_norm_lower",
            lambda: infinity_norm_lower_bound(n, k, t, ens), with_t=True)
    attempt("diagonal_excess_floor",
            lambda: diagonal_excess_lower_bound(k, t), with_t=True)
    attempt("diagonal_excess_regime_n",
            lambda: diagonal_excess_regime(k))
    attempt("envelope_crossing_t", lambda: envelope_crossing_time())
    payload = [dict(zip(BOUND_COLUMNS, row)) for row in rows]
    _emit_table(cfg, "bounds", BOUND_COLUMNS, rows, payload)
    return 0


def cmd_montecarlo(cfg: RunConfig) -> int:
    if cfg.k is None or cfg.n is None:
        raise UsageError("montecarlo needs --k and --n")
    ens = cfg.doping()
    estimates = [
        mc_frame_potential(cfg.n, cfg.k, cfg.t, ens, samples=cfg.samples,
                           seed=cfg.seed),
        mc_state_purity(cfg.n, cfg.k, cfg.t, ens, samples=cfg.samples,
                        seed=cfg.seed),
    ]
    rows = [est.csv_row() for est in estimates]
    payload = [est.to_json_dict() for est in estimates]
    _emit_table(cfg, "montecarlo", McEstimate.CSV_COLUMNS, rows, payload)
    return 0


# ------------------------------------------------------------- verify suites


def _suite_counting(seed: int) -> list[dict]:
    from .simulator import sample_clifford

    checks = []
    expected = {2: 2, 3: 6, 4: 30, 5: 270, 6: 4590}
    perms = {2: 2, 3: 6, 4: 24, 5: 120}
    for k, want in expected.items():
        basis = enumerate_monomials(k)
        ok = len(basis) == want and monomial_count(k) == want
        if k in perms:
            ok = ok and len(basis.permutation_indices) == perms[k]
        checks.append({"name": f"monomial-count-k{k}", "passed": bool(ok),
                       "detail": f"{len(basis)} monomials"})
    basis3 = enumerate_monomials(3)
    checks.append({
        "name": "k3-all-permutations",
        "passed": len(basis3.permutation_indices) == len(basis3),
        "detail": f"{len(basis3.permutation_indices)} of {len(basis3)}",
    })
    rng = np.random.default_rng(seed)
    keys = {sample_clifford(1, rng).key() for _ in range(3000)}
    checks.append({"name": "clifford-n1-exhaustion",
                   "passed": len(keys) == 24,
                   "detail": f"{len(keys)} distinct tableaus"})
    return checks


def _suite_identities(seed: int) -> list[dict]:
    del seed
    checks = []
    for k, n in ((2, 2), (3, 3)):
        ens = DopingEnsemble.diagonal()
        rep = frame_potential(n, k, 0, ens)
        want = monomial_count(k)
        checks.append({
            "name": f"commutant-dimension-k{k}-n{n}",
            "passed": float(rep.f_t) == want,
            "detail": f"F_0 = {float(rep.f_t)!r}, expected {want}",
        })
        srep = state_report(n, k, 0, ens)
        from .weingarten import z_normalization
        exact = want / float(z_normalization(k, n))
        checks.append({
            "name": f"undoped-purity-k{k}-n{n}",
            "passed": abs(float(srep.purity_t) - exact) < 1e-14,
            "detail": f"purity {float(srep.purity_t)!r}",
        })
    return checks


def _sigma_check(name, est, want, gate=4.0):
    gap = abs(est.mean - want)
    limit = gate * max(est.std_error, 1e-15)
    return {"name": name, "passed": bool(gap <= limit),
            "detail": f"mean {est.mean!r}, target {want!r}, "
                      f"gap/sigma {gap / max(est.std_error, 1e-300):.2f}"}


def _suite_mc_vs_analytic(seed: int) -> list[dict]:
    from .predictions import analytic_twirl
    from .simulator import mc_twirl

    dia = DopingEnsemble.diagonal()
    checks = []
    est = mc_frame_potential(1, 2, 0, dia, samples=20000, seed=seed)
    checks.append(_sigma_check("frame-potential-n1-k2-t0", est, 2.0))
    est = mc_frame_potential(2, 2, 0, dia, samples=20000, seed=seed + 1)
    checks.append(_sigma_check("frame-potential-n2-k2-t0", est, 2.0))
    est = mc_state_purity(2, 2, 0, dia, samples=20000, seed=seed + 2)
    checks.append(_sigma_check("state-purity-n2-k2-t0", est, 0.1))
    want = float(state_report(2, 2, 1, dia).purity_t)
    est = mc_state_purity(2, 2, 1, dia, samples=20000, seed=seed + 3)
    checks.append(_sigma_check("state-purity-n2-k2-t1-diagonal", est, want))
    rng = np.random.default_rng(seed + 4)
    herm = rng.standard_normal((16, 16))
    herm = herm + herm.T
    ref = analytic_twirl(2, 2, 1, dia, herm)
    tw = mc_twirl(2, 2, 1, dia, herm, samples=8000, seed=seed + 5)
    sigma = tw.max_sigma_distance(ref, floor=1e-6)
    checks.append({"name": "twirl-n2-k2-t1-diagonal",
                   "passed": bool(sigma <= 4.0),
                   "detail": f"max entrywise sigma {sigma:.2f}"})
    return checks


SUITES = {
    "counting": _suite_counting,
    "identities": _suite_identities,
    "mc-vs-analytic": _suite_mc_vs_analytic,
}


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.suite not in SUITES:
        raise UsageError(
            f"unknown suite {cfg.suite!r}; available: "
            f"{', '.join(sorted(SUITES))}"
        )
    checks = SUITES[cfg.suite](cfg.seed)
    passed = all(c["passed"] for c in checks)
    report = {"suite": cfg.suite, "seed": cfg.seed, "passed": passed,
              "checks": checks}
    _write(cfg, json.dumps(report, indent=2, sort_keys=True) + "\n")
    if not passed:
        failing = ", ".join(c["name"] for c in checks if not c["passed"])
        raise CheckFailure(f"suite {cfg.suite!r} failed: {failing}")
    return 0


# ------------------------------------------------------------------- parsing


def _add_common(sub, *, k=False, n=False, t=False, t_max=False,
                ensemble=False, mc=False):
    if k:
        sub.add_argument("--k", type=int, required=True,
                         help="replica count (number of tensor copies)")
    if n:
        sub.add_argument("--n", type=int, required=True,
                         help="qubit count")
    if t:
        sub.add_argument("--t", type=int, default=0,
                         help="doping dose count (default 0)")
    if t_max:
        sub.add_argument("--t-max", dest="t_max", type=int, default=None,
                         help="emit rows for t = 0..t-max instead of --t")
    if ensemble:
        sub.add_argument("--ensemble", default="diagonal",
                         help="diagonal | haar | discrete[:tgate] "
                              "(default diagonal)")
        sub.add_argument("--gate", default=None,
                         help="2x2 gate literal for the discrete ensemble")
    if mc:
        sub.add_argument("--samples", type=int, default=100000,
                         help="Monte-Carlo sample count (default 100000)")
    sub.add_argument("--seed", type=int, default=0,
                     help="RNG seed (default 0)")
    sub.add_argument("--digits", type=int, default=50,
                     help="working precision for the mp mode (default 50)")
    sub.add_argument("--out", default=None,
                     help="output file (default stdout)")
    sub.add_argument("--format", default="csv", choices=("csv", "json"),
                     help="output format (default csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcw",
        description="Commutant calculus of doped Clifford circuits: exact "
                    "tables and Monte-Carlo cross-checks.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("enumerate", help="write the monomial basis")
    _add_common(sub, k=True)

    sub = subs.add_parser("gram", help="Gram/normalization facts for (k, n)")
    _add_common(sub, k=True, n=True)

    sub = subs.add_parser("frame-potential",
                          help="analytic frame potential over a t range")
    _add_common(sub, k=True, n=True, t=True, t_max=True, ensemble=True)

    sub = subs.add_parser("state-design",
                          help="purity and design-distance reports")
    _add_common(sub, k=True, n=True, t=True, t_max=True, ensemble=True)

    sub = subs.add_parser("bounds", help="bound evaluators at (k, n, t)")
    _add_common(sub, k=True, n=True, t=True, ensemble=True)

    sub = subs.add_parser("montecarlo",
                          help="frame-potential and purity estimators")
    _add_common(sub, k=True, n=True, t=True, ensemble=True, mc=True)

    sub = subs.add_parser("verify", help="run a named verification suite")
    sub.add_argument("suite", choices=sorted(SUITES),
                     help="suite to run")
    _add_common(sub)

    return parser


HANDLERS = {
    "enumerate": cmd_enumerate,
    "gram": cmd_gram,
    "frame-potential": cmd_frame_potential,
    "state-design": cmd_state_design,
    "bounds": cmd_bounds,
    "montecarlo": cmd_montecarlo,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        return HANDLERS[cfg.command](cfg)
    except DcwError as err:
        print(f"dcw: {err}", file=sys.stderr)
        for cls, code in EXIT_FOR:
            if isinstance(err, cls):
                return code
        return 4
