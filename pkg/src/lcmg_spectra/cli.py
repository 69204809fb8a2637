"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 a built-in check
failed, 3 a resource cap was hit.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ExperimentConfig, element_from_spec, parse_model_flag
from .convergence import run_chain
from .errors import LcmgSpectraError, ResourceCapError
from .groups import IntegerLattice, injectivity_radius
from .lcmg import cayley_ball, cayley_lcmg_finite, metric_D
from .oracle import torus_moment, torus_sdf, torus_trace_moment
from .ring import gram, power_trace, project_ring, symmetrize
from .spectral import counting_measure, quotient_operator, sdf_from_measure, walk_moments_cayley

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_CAP = 0, 1, 2, 3
MOMENT_RTOL = 1e-9

log = logging.getLogger("lcmg_spectra")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config; flags override it")
    p.add_argument("--model", help="lattice:<d> or heisenberg")
    p.add_argument("--w", help='element w, e.g. "1 - t"; the operator studied is w w*')
    p.add_argument("--z", help='self-adjoint element used directly, e.g. "2 - t - t^-1"')
    p.add_argument("--levels", type=int, help="number of levels in the powers schedule")
    p.add_argument("--base", type=int, help="base of the powers schedule (default 2)")
    p.add_argument("--moduli", help="explicit schedule, comma separated (each divides the next)")
    p.add_argument("--grid", help="lambda grid min,max,count")
    p.add_argument("--k", type=int, help="largest moment order")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=("json", "csv", "text"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lcmg-spectra", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("moments", help="walk / trace / Fourier moment table")
    _common(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("converge", help="run a quotient chain and compare with the limit")
    _common(p)
    p.add_argument("--radius", type=int, help="largest ball radius to certify (default k)")
    p.add_argument("--tol", type=float, help="allowed final SDF/Betti deviation (default 0.05)")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("graph", help="compare a quotient Cayley lcmg with the infinite ball")
    _common(p)
    p.add_argument("--level", type=int)
    p.add_argument("--modulus", type=int)
    p.add_argument("--radius", "--r", dest="radius", type=int, help="largest radius compared (default 3)")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("sdf", help="tabulate a spectral density function")
    _common(p)
    p.add_argument("--level", type=int, help="quotient level; omit for the lattice oracle")
    p.add_argument("--modulus", type=int)
    p.set_defaults(func=cmd_sdf)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if args.model:
        group = parse_model_flag(args.model)
        for key in ("schedule", "base", "levels", "moduli"):
            if key in cfg.group:
                group[key] = cfg.group[key]
        cfg.group = group
    if args.levels is not None:
        cfg.group["levels"] = args.levels
    if args.base is not None:
        cfg.group["base"] = args.base
    if args.moduli:
        cfg.group["schedule"] = "explicit"
        cfg.group["moduli"] = [int(x) for x in args.moduli.split(",")]
    if args.grid:
        parts = args.grid.split(",")
        if len(parts) != 3:
            raise LcmgSpectraError("--grid expects min,max,count")
        cfg.grid = (float(parts[0]), float(parts[1]), int(parts[2]))
    for key in ("w", "z", "k", "out", "format", "radius", "level", "modulus"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if getattr(args, "tol", None) is not None:
        cfg.sdf_tol = args.tol
    return cfg


def _emit(cfg: ExperimentConfig, filename: str, text: str, stdout: bool = True) -> None:
    if stdout:
        sys.stdout.write(text)
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / filename).write_text(text)


def _elements(cfg: ExperimentConfig, need_w: bool = False):
    model = cfg.model()
    w = element_from_spec(cfg.w, model) if cfg.w is not None else None
    if need_w and w is None:
        raise LcmgSpectraError("this command needs --w")
    if cfg.z is not None:
        z = element_from_spec(cfg.z, model)
    elif w is not None:
        z = gram(w)
    else:
        raise LcmgSpectraError("give --w or --z")
    return model, w, z


def _level(cfg: ExperimentConfig, chain) -> int:
    if cfg.modulus is not None:
        return chain.level_of_modulus(cfg.modulus)
    if cfg.level is not None:
        chain.quotient(cfg.level)
        return cfg.level
    raise LcmgSpectraError("give --level or --modulus")


def _fmt(x: float) -> str:
    return format(x, ".12g")


def cmd_moments(cfg: ExperimentConfig) -> int:
    model, w, z = _elements(cfg)
    sym = symmetrize(z)
    walks = walk_moments_cayley(model, sym, cfg.k)
    rows = []
    ok = True
    for k in range(cfg.k + 1):
        walk = walks[k].real
        trace = power_trace(z, k).real
        row = {"k": k, "walks": walk, "trace": trace}
        scale = max(1.0, abs(trace))
        ok &= abs(walk - trace) <= MOMENT_RTOL * scale
        if isinstance(model, IntegerLattice) and model.dim <= 3:
            if cfg.z is None:
                ov = torus_moment(w, k)
            else:
                ov = torus_trace_moment(z, k)
            value, delta = ov.value, ov.refinement_delta
            row["torus"] = value
            row["torus_delta"] = delta
            ok &= abs(value - trace) <= max(delta, MOMENT_RTOL * scale)
        rows.append(row)
    payload = {"json": json.dumps({"moments": rows, "agree": bool(ok)}, sort_keys=True, indent=2) + "\n"}
    cols = ["k", "walks", "trace"] + (["torus"] if rows and "torus" in rows[0] else [])
    payload["csv"] = ",".join(cols) + "\n" + "".join(
        ",".join(str(r[c]) if c == "k" else repr(r[c]) for c in cols) + "\n" for r in rows
    )
    lines = ["".join(f"{c:>20}" for c in cols)]
    lines += ["".join(f"{(str(r[c]) if c == 'k' else _fmt(r[c])):>20}" for c in cols) for r in rows]
    lines.append(f"agreement: {'PASS' if ok else 'FAIL'}")
    payload["text"] = "\n".join(lines) + "\n"
    _emit(cfg, f"moments.{cfg.format if cfg.format != 'text' else 'txt'}", payload[cfg.format])
    return EXIT_OK if ok else EXIT_CHECK


def cmd_converge(cfg: ExperimentConfig) -> int:
    model, w, _ = _elements(cfg, need_w=True)
    chain = cfg.chain()
    report = run_chain(
        chain,
        w,
        levels=cfg.levels,
        grid=cfg.grid_values(),
        k_moments=cfg.k,
        radius_cap=cfg.radius,
        sdf_tol=cfg.sdf_tol,
    )
    text = report.to_text()
    js = report.dumps() + "\n"
    first_done = next((r for r in report.levels if r.error is None), None)
    csv_text = report.sdf_csv(report.levels[-1].level) if report.levels[-1].error is None else ""
    stdout = {"text": text, "json": js, "csv": csv_text}[cfg.format]
    sys.stdout.write(stdout)
    if cfg.out:
        _emit(cfg, "report.json", js, stdout=False)
        _emit(cfg, "summary.txt", text, stdout=False)
        for r in report.levels:
            if r.error is None:
                _emit(cfg, f"sdf_level_{r.level}.csv", report.sdf_csv(r.level), stdout=False)
    if first_done is None:
        return EXIT_CHECK
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_graph(cfg: ExperimentConfig) -> int:
    model, _, z = _elements(cfg)
    chain = cfg.chain()
    level = _level(cfg, chain)
    r = 3 if cfg.radius is None else cfg.radius
    sym = symmetrize(z)
    quotient = cayley_lcmg_finite(chain, level, sym)
    ball = cayley_ball(model, sym, r)
    mv = metric_D(quotient, ball, r)
    bound = injectivity_radius(chain, level, sym.generators, r)
    if mv.radius < 0:
        msg = "balls differ at r=0, D = 1"
    elif mv.capped:
        msg = f"isomorphic through r={mv.radius}, D <= {mv.value}"
    else:
        msg = f"isomorphic through r={mv.radius} only, D = {mv.value}"
    text = f"level {level} (order {chain.order(level)}): {msg}\nword-length bound radius: {bound}\n"
    payload = {
        "level": level,
        "radius": mv.radius,
        "capped": mv.capped,
        "D": str(mv.value),
        "word_bound_radius": bound,
    }
    out = {"text": text, "json": json.dumps(payload, sort_keys=True) + "\n", "csv": ""}
    out["csv"] = "level,radius,capped,D,word_bound_radius\n" + ",".join(
        str(payload[k]) for k in ("level", "radius", "capped", "D", "word_bound_radius")
    ) + "\n"
    sys.stdout.write(out[cfg.format])
    if cfg.out:
        _emit(cfg, f"quotient_level_{level}.json", quotient.dumps() + "\n", stdout=False)
        _emit(cfg, f"infinite_ball_r{r}.json", ball.graph.dumps() + "\n", stdout=False)
        _emit(cfg, "graph.json", out["json"], stdout=False)
    return EXIT_OK


def cmd_sdf(cfg: ExperimentConfig) -> int:
    model, w, z = _elements(cfg)
    grid = cfg.grid_values()
    if cfg.level is None and cfg.modulus is None:
        if w is None or not isinstance(model, IntegerLattice):
            raise LcmgSpectraError("the oracle SDF needs a lattice model and --w; otherwise give --level")
        ov = torus_sdf(w, grid)
        values = ov.value
        atoms = None
    else:
        chain = cfg.chain()
        level = _level(cfg, chain)
        zn = project_ring(chain, level, z)
        mu = counting_measure(quotient_operator(chain, level, zn))
        sdf = sdf_from_measure(mu)
        values = sdf(grid)
        atoms = sdf.measure.to_json()
    rows = [(float(x), float(v)) for x, v in zip(grid, values)]
    text = "".join(f"{x:>12.6f} {v:>14.10f}\n" for x, v in rows)
    csv_text = "lambda,F\n" + "".join(f"{x!r},{v!r}\n" for x, v in rows)
    js = json.dumps({"sdf": [list(r) for r in rows], "measure": atoms}, sort_keys=True) + "\n"
    sys.stdout.write({"text": text, "csv": csv_text, "json": js}[cfg.format])
    if cfg.out:
        _emit(cfg, "sdf.csv", csv_text, stdout=False)
        _emit(cfg, "sdf.json", js, stdout=False)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = config_from_args(args)
        cfg.validate()
        return args.func(cfg)
    except ResourceCapError as exc:
        sys.stderr.write(f"resource cap: {exc}\n")
        return EXIT_CAP
    except (LcmgSpectraError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
