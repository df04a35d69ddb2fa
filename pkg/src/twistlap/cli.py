"""Command-line front end.

Examples:
  twistlap eigen --alpha 1,0 --beta 0,2
  twistlap norms --input gaussian.json --p 4
  twistlap sweep --candidate zbar --d 2 --p 4 --k 100:10000:dyadic
  twistlap dispersive --d 2 --k 4,8,16,32,64 --output disp.json --format json
  twistlap selftest

Every output embeds the resolved configuration and its hash, so identical
configurations give byte-identical files.  Exit codes: 0 success, 1 bad input,
2 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import asymptotics, opnorm
from .eigenbasis import EigenLabel, build_eigenfunction, build_radial, exact_l2_norm_sq
from .hermite_core import GaussianFn
from .moments import lp_norm_exact_even
from .projection import expand, project
from .quadrature import FULL_SPACE, Ball, QuadratureError, QuadSpec, lp_norm_numeric

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2

QUAD_KEYS = [f for f in QuadSpec.__dataclass_fields__]

GLOBAL_DEFAULTS = {"format": "csv", "seed": 0, "threads": 1, "quad": QuadSpec().to_dict()}

COMMAND_DEFAULTS = {
    "eigen": {"alpha": None, "beta": None, "radial_n": None, "radial_k": None},
    "norms": {"input": None, "alpha": None, "beta": None, "p": ["2", "4"], "center": None, "radius": None},
    "project": {"input": None, "k": None},
    "opnorm": {
        "method": "power",
        "n": 1,
        "k": 4,
        "p": "6",
        "B": 2,
        "tol": 1e-10,
        "max_iter": 500,
        "restarts": 5,
    },
    "sweep": {"candidate": "zbar", "d": 2, "p": "4", "k": "100:10000:dyadic", "regressor": "log-k", "B": 2},
    "dispersive": {"d": 2, "k": [4, 8, 16, 32, 64], "B": 2, "n_angles": 2, "outer_factor": 2.0},
    "heisenberg": {"input": None, "alpha": None, "beta": None, "m": [4, 9], "p": [4, 6]},
    "selftest": {},
}


class InputError(ValueError):
    pass


class NonConvergence(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# value parsing


def parse_int_list(s) -> list[int]:
    if isinstance(s, (list, tuple)):
        return [int(x) for x in s]
    if isinstance(s, int):
        return [s]
    s = str(s).strip()
    if not s:
        return []
    return [int(x) for x in s.split(",")]


def parse_p(s) -> float:
    """``4``, ``10/3``, ``2.5`` or ``inf``."""
    text = str(s).strip().lower()
    if text in ("inf", "infinity"):
        return math.inf
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad exponent p={s!r}") from exc


def canon_p(s) -> str:
    p = parse_p(s)
    if math.isinf(p):
        return "inf"
    return str(Fraction(str(s).strip())) if not isinstance(s, float) else repr(s)


def parse_k_range(s) -> list[int]:
    """``lo:hi:dyadic``, ``lo:hi:step`` or a comma list."""
    if isinstance(s, (list, tuple, int)):
        return parse_int_list(s)
    s = str(s).strip()
    if ":" in s:
        parts = s.split(":")
        if len(parts) != 3:
            raise InputError(f"k range must be lo:hi:dyadic or lo:hi:step, got {s!r}")
        lo, hi = int(parts[0]), int(parts[1])
        if parts[2] == "dyadic":
            return asymptotics.dyadic(lo, hi)
        step = int(parts[2])
        if step < 1:
            raise InputError("k step must be positive")
        return list(range(lo, hi + 1, step))
    return parse_int_list(s)


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(_canonical(config).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# output documents


def render(command: str, config: dict, rows: list[dict], summary: dict, fmt: str) -> str:
    header = {"command": command, "config": config, "config_hash": config_hash(config)}
    if fmt == "json":
        doc = dict(header, summary=summary, rows=rows)
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    for key in ("command", "config", "config_hash"):
        buf.write(f"# {key}: {_canonical(header[key])}\n")
    buf.write(f"# summary: {_canonical(summary)}\n")
    fields = list(rows[0]) if rows else []
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    if fields:
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(v) for k, v in row.items()})
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple, dict)):
        return _canonical(v)
    return v


def parse_output(text: str) -> dict:
    """Inverse of :func:`render`; CSV cells come back as strings."""
    if text.lstrip().startswith("{"):
        return json.loads(text)
    meta, body = {}, []
    for line in text.splitlines(keepends=True):
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = json.loads(value)
        else:
            body.append(line)
    meta["rows"] = list(csv.DictReader(io.StringIO("".join(body))))
    return meta


# ---------------------------------------------------------------------------
# function inputs


def _load_function(cfg: dict) -> GaussianFn:
    if cfg.get("input"):
        try:
            data = json.loads(Path(cfg["input"]).read_text())
        except FileNotFoundError as exc:
            raise InputError(f"input file not found: {cfg['input']}") from exc
        if "alpha" in data and "terms" not in data:
            return build_eigenfunction(EigenLabel.from_dict(data)).fn
        return GaussianFn.from_dict(data)
    if cfg.get("alpha") is not None and cfg.get("beta") is not None:
        return build_eigenfunction(EigenLabel(tuple(cfg["alpha"]), tuple(cfg["beta"]))).fn
    raise InputError("give --input FILE or both --alpha and --beta")


def _fn_rows(g: GaussianFn) -> list[dict]:
    return [
        {"a": list(a), "b": list(b), "re": str(c.re), "im": str(c.im)} for (a, b), c in g.poly.items()
    ]


# ---------------------------------------------------------------------------
# commands; each returns (rows, summary, exit_code)


def cmd_eigen(cfg, spec):
    if cfg["radial_n"] is not None:
        n, k = int(cfg["radial_n"]), int(cfg["radial_k"] or 0)
        g = build_radial(n, k)
        return _fn_rows(g), {"n": n, "k": k, "eigenvalue": n + 2 * k, "t": str(g.t), "radial": True}, EXIT_OK
    if cfg["alpha"] is None or cfg["beta"] is None:
        raise InputError("eigen needs --alpha and --beta, or --radial-n")
    label = EigenLabel(tuple(cfg["alpha"]), tuple(cfg["beta"]))
    ef = build_eigenfunction(label, check=True)
    summary = {
        "label": label.to_dict(),
        "eigenvalue": ef.eigenvalue,
        "l2_norm_sq": exact_l2_norm_sq(label).to_dict(),
        "t": str(ef.fn.t),
    }
    return _fn_rows(ef.fn), summary, EXIT_OK


def cmd_norms(cfg, spec):
    g = _load_function(cfg)
    dom = FULL_SPACE
    if cfg["radius"] is not None:
        center = cfg["center"] or [0.0] * (2 * g.n)
        dom = Ball(tuple(float(c) for c in center), float(cfg["radius"]))
    rows = []
    for ps in cfg["p"]:
        p = parse_p(ps)
        row = {"p": canon_p(ps), "exact_rational": "", "exact_pi_power": "", "exact_pow": "", "numeric_pow": "", "rel_diff": ""}
        num = lp_norm_numeric(g, p, dom, spec)
        row["numeric_pow"] = num.value**p
        if dom is FULL_SPACE and float(p).is_integer() and int(p) % 2 == 0:
            ex = lp_norm_exact_even(g, int(p))
            row["exact_rational"] = str(ex.rational)
            row["exact_pi_power"] = ex.pi_power
            row["exact_pow"] = float(ex)
            row["rel_diff"] = abs(row["numeric_pow"] - float(ex)) / abs(float(ex)) if float(ex) else 0.0
        row["numeric_rel_err"] = num.rel_err
        rows.append(row)
    return rows, {"n": g.n, "domain": "full" if dom is FULL_SPACE else "ball"}, EXIT_OK


def cmd_project(cfg, spec):
    g = _load_function(cfg)
    exp = expand(g)
    rows = [
        {"alpha": list(L.alpha), "beta": list(L.beta), "k": L.k, "re": str(c.re), "im": str(c.im)}
        for L, c in exp.entries
    ]
    summary = {"n": g.n, "levels": exp.levels(), "l2_norm_sq": exp.l2_norm_sq().to_dict()}
    if cfg["k"] is not None:
        summary["projection"] = project(g, int(cfg["k"])).to_dict()
    return rows, summary, EXIT_OK


def cmd_opnorm(cfg, spec):
    n, k, p = int(cfg["n"]), int(cfg["k"]), parse_p(cfg["p"])
    method = cfg["method"]
    if method == "twoinfty":
        est = opnorm.norm_2_to_infty(n, k)
    elif method == "zbar":
        est = opnorm.candidate_ratio_zbar(n, k, p)
    elif method == "radial":
        est = opnorm.candidate_ratio_radial(n, k, p, spec)
    elif method == "power":
        est = opnorm.norm_2_to_p_lower_power(
            n, k, p, int(cfg["B"]), tol=float(cfg["tol"]), max_iter=int(cfg["max_iter"]),
            spec=spec, seed=int(cfg["seed"]), restarts=int(cfg["restarts"]),
        )
    else:
        raise InputError(f"unknown method {method!r}")
    summary = {"converged": est.converged, "value": est.value}
    return [est.csv_row()], summary, EXIT_OK if est.converged else EXIT_NUMERIC


def _n_from_d(d) -> int:
    d = int(d)
    if d < 2 or d % 2:
        raise InputError(f"d must be even and >= 2, got {d}")
    return d // 2


def cmd_sweep(cfg, spec):
    n = _n_from_d(cfg["d"])
    p = parse_p(cfg["p"])
    ks = parse_k_range(cfg["k"])
    fit = asymptotics.sweep_fit(
        cfg["candidate"], n, p, ks, cfg["regressor"], spec, B=int(cfg["B"]),
        seed=int(cfg["seed"]), threads=int(cfg["threads"]),
    )
    rows = [
        {"k": r.k, "log_k": math.log(r.k), "log_lambda": r.log_lambda, "value_log": r.value_log, "fit": fit.fitted(r)}
        for r in fit.rows
    ]
    theory = asymptotics.theory_exponents(2 * n, p)
    expected = theory.rho if cfg["regressor"] == "log-lambda" else theory.rho / 2
    summary = {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "residual": fit.residual,
        "theory_slope": expected,
        "skipped": [list(s) for s in fit.skipped],
    }
    return rows, summary, EXIT_NUMERIC if fit.skipped else EXIT_OK


def cmd_dispersive(cfg, spec):
    n = _n_from_d(cfg["d"])
    rep = asymptotics.dispersive_check(
        n, parse_int_list(cfg["k"]), spec, seed=int(cfg["seed"]), B=int(cfg["B"]),
        n_angles=int(cfg["n_angles"]), outer_factor=float(cfg["outer_factor"]),
    )
    rows = [
        {
            "k": r.k,
            "lambda": r.lam,
            "function": r.function,
            "center": [list(c) for c in r.center],
            "ratio": r.ratio,
            "rel_err": r.rel_err,
        }
        for r in rep.rows
    ]
    summary = {
        "sup": rep.sup,
        "sup_by_k": {str(k): v for k, v in sorted(rep.sup_by_k.items())},
        "slope_log_sup": rep.slope_log_sup,
        "failures": [[f[0], f[1], str(f[2]), f[3]] for f in rep.failures],
    }
    return rows, summary, EXIT_NUMERIC if rep.failures else EXIT_OK


def cmd_heisenberg(cfg, spec):
    g = _load_function(cfg)
    rows = []
    for m in parse_int_list(cfg["m"]):
        for p in parse_int_list(cfg["p"]):
            h = asymptotics.heisenberg_check(g, m, p)
            rows.append(
                {
                    "m": m,
                    "p": p,
                    "sigma": h["sigma"],
                    "dilation_lp": h["dilation_lp"],
                    "dilation_l2": h["dilation_l2"],
                    "ratio_law": h["ratio_law"],
                    "ratio_law_lhs": str(h["ratio_law_lhs"]),
                    "ratio_law_rhs": str(h["ratio_law_rhs"]),
                }
            )
    ok = all(r["dilation_lp"] and r["dilation_l2"] and r["ratio_law"] for r in rows)
    return rows, {"n": g.n, "all_exact": ok}, EXIT_OK


def cmd_selftest(cfg, spec):
    from .selftest import run_all

    results = run_all()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=sys.stderr)
    rows = [{"check": name, "ok": ok, "detail": detail} for name, ok, detail in results]
    passed = all(ok for _, ok, _ in results)
    return rows, {"passed": passed, "count": len(results)}, EXIT_OK if passed else EXIT_NUMERIC


COMMANDS = {
    "eigen": cmd_eigen,
    "norms": cmd_norms,
    "project": cmd_project,
    "opnorm": cmd_opnorm,
    "sweep": cmd_sweep,
    "dispersive": cmd_dispersive,
    "heisenberg": cmd_heisenberg,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------------------
# argument parsing and config resolution


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global")
    g.add_argument("--output", "-o", default=None, help="output file (default: stdout)")
    g.add_argument("--format", choices=["csv", "json"], default=None)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--config", default=None, help="TOML or JSON config file")
    g.add_argument("--threads", type=int, default=None, help="sweep parallelism")
    for key in QUAD_KEYS:
        typ = float if key in ("tail_radius_multiplier", "target_rel_err") else int
        g.add_argument("--" + key.replace("_", "-"), type=typ, default=None, dest="quad_" + key)

    ap = argparse.ArgumentParser(prog="twistlap", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help):
        return sub.add_parser(name, parents=[common], help=help)

    s = add("eigen", "emit the coefficients of f_{alpha,beta} or of the radial f_k")
    s.add_argument("--alpha", type=parse_int_list)
    s.add_argument("--beta", type=parse_int_list)
    s.add_argument("--radial-n", type=int)
    s.add_argument("--radial-k", type=int)

    s = add("norms", "exact vs quadrature L^p norms")
    s.add_argument("--input", help="GaussianFn JSON or an eigen label JSON")
    s.add_argument("--alpha", type=parse_int_list)
    s.add_argument("--beta", type=parse_int_list)
    s.add_argument("--p", nargs="+")
    s.add_argument("--center", type=lambda s: [float(x) for x in s.split(",")], help="x1..xn,y1..yn")
    s.add_argument("--radius", type=float, help="integrate over a ball instead of R^{2n}")

    s = add("project", "expand in the eigenbasis, optionally project onto level k")
    s.add_argument("--input")
    s.add_argument("--k", type=int)

    s = add("opnorm", "2->p operator norm estimates")
    s.add_argument("--method", choices=["twoinfty", "zbar", "radial", "power"])
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--p")
    s.add_argument("--B", type=int)
    s.add_argument("--tol", type=float)
    s.add_argument("--max-iter", type=int)
    s.add_argument("--restarts", type=int)

    s = add("sweep", "log-log slope fit of a norm family")
    s.add_argument("--candidate", choices=[c.value for c in asymptotics.Candidate])
    s.add_argument("--d", type=int)
    s.add_argument("--p")
    s.add_argument("--k", help="lo:hi:dyadic, lo:hi:step or a comma list")
    s.add_argument("--regressor", choices=["log-k", "log-lambda"])
    s.add_argument("--B", type=int)

    s = add("dispersive", "local dispersive ratio table")
    s.add_argument("--d", type=int)
    s.add_argument("--k", type=parse_int_list)
    s.add_argument("--B", type=int)
    s.add_argument("--n-angles", type=int)
    s.add_argument("--outer-factor", type=float)

    s = add("heisenberg", "exact dilation-law verification")
    s.add_argument("--input")
    s.add_argument("--alpha", type=parse_int_list)
    s.add_argument("--beta", type=parse_int_list)
    s.add_argument("--m", type=parse_int_list)
    s.add_argument("--p", type=parse_int_list)

    add("selftest", "closed-form oracle suite")
    return ap


def _read_config_file(path: str) -> dict:
    try:
        text = Path(path).read_bytes()
    except FileNotFoundError as exc:
        raise InputError(f"config file not found: {path}") from exc
    if path.endswith(".json"):
        return json.loads(text)
    return tomllib.loads(text.decode())


def resolve_config(args: argparse.Namespace) -> dict:
    """defaults < config file < flags."""
    command = args.command
    cfg = {k: v for k, v in GLOBAL_DEFAULTS.items() if k != "quad"}
    cfg.update(COMMAND_DEFAULTS[command])
    quad = dict(GLOBAL_DEFAULTS["quad"])
    if args.config:
        data = _read_config_file(args.config)
        quad.update(data.get("quad", {}))
        for key in ("format", "seed", "threads"):
            if key in data:
                cfg[key] = data[key]
        section = data.get(command, {})
        unknown = set(section) - set(COMMAND_DEFAULTS[command])
        if unknown:
            raise InputError(f"unknown keys for {command}: {sorted(unknown)}")
        cfg.update(section)
    for key, value in vars(args).items():
        if value is None or key in ("command", "config", "output"):
            continue
        if key.startswith("quad_"):
            quad[key[5:]] = value
        else:
            cfg[key] = value
    cfg["quad"] = QuadSpec(**quad).to_dict()
    # canonical forms so equal configs hash equally
    if "p" in cfg and command in ("opnorm", "sweep"):
        cfg["p"] = canon_p(cfg["p"])
    if command == "norms":
        cfg["p"] = [canon_p(p) for p in cfg["p"]]
    if command == "sweep":
        cfg["k"] = parse_k_range(cfg["k"])
    for key in ("alpha", "beta"):
        if cfg.get(key) is not None:
            cfg[key] = parse_int_list(cfg[key])
    return cfg


def _fail(kind: str, exc: Exception, code: int) -> int:
    print(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        cfg = resolve_config(args)
        spec = QuadSpec(**cfg["quad"])
        rows, summary, code = COMMANDS[args.command](cfg, spec)
    except (QuadratureError, NonConvergence, ArithmeticError, RuntimeError) as exc:
        return _fail("numerical", exc, EXIT_NUMERIC)
    except (InputError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        return _fail("validation", exc, EXIT_INPUT)
    text = render(args.command, cfg, rows, summary, cfg["format"])
    if args.output:
        Path(args.output).write_text(text)
        print(json.dumps({"command": args.command, "output": args.output, "summary": summary}, sort_keys=True))
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
