"""Command-line interface.

All indices in input and output files are 1-based.  Every command writes
JSON (or CSV) to ``--out`` or standard output; with ``--out`` a run
manifest ``<out>.manifest.json`` is written next to it, and
``tentmle replay <manifest>`` re-runs the command.

Exit codes: 0 success, 1 other library error, 2 bad input, 3 not
converged (output still written), 4 size limit exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .duality import cone_membership, normal_cone_generators, realize_subdivision, weights_from_heights
from .errors import InvalidInput, NotConverged, TentError, TooLarge
from .experiments import (
    HEXAGON,
    Distribution,
    alpha_heights_check,
    d_plus_2_check,
    d_plus_3_construction,
    records_to_csv,
    stratum_frequency_experiment,
    table1_experiment,
)
from .geometry import PointConfiguration, Subdivision, enumerate_regular_triangulations, gkz_vector
from .hfunc import h_eval
from .quadrature import normalize_heights, total_mass
from .solver import SolverOptions, WeightVector, solve_mle

EXIT_OK, EXIT_ERROR, EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_TOO_LARGE = 0, 1, 2, 3, 4


@dataclass
class RunManifest:
    """What is needed to reproduce one command's output."""

    tool_version: str
    subcommand: str
    options: dict
    seed: int | None
    input_digests: dict
    wall_clock_seconds: float

    def to_json(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# input helpers


def _read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise InvalidInput(f"{path}: expected a JSON object")
    return obj


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _vector(obj: dict, key: str, n: int) -> np.ndarray:
    if key not in obj:
        raise InvalidInput(f'input needs a "{key}" array')
    try:
        v = np.asarray(obj[key], dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f'"{key}" must be an array of numbers') from exc
    if v.size != n:
        raise InvalidInput(f'"{key}" has {v.size} entries, expected {n}')
    if not np.all(np.isfinite(v)):
        raise InvalidInput(f'"{key}" entries must be finite')
    return v


def _config(obj: dict) -> PointConfiguration:
    return PointConfiguration.from_json(obj)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# figures


def _svg_header(width: int, height: int) -> list[str]:
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">', f'<rect width="{width}" height="{height}" fill="white"/>']


def subdivision_svg(config: PointConfiguration, heights, subdivision: Subdivision, size: int = 480) -> str:
    """Planar subdivision with cells shaded by mean density (darker = denser).

    For ``d = 1`` the profile ``log f`` is drawn as a polyline instead.
    """
    y = np.asarray(heights, dtype=float)
    pad = 20
    if config.d == 1:
        x = config.points[:, 0]
        order = np.argsort(x)
        xs, ys = x[order], y[order]
        sx = (size - 2 * pad) / max(float(np.ptp(xs)), 1e-300)
        sy = (size / 2 - 2 * pad) / max(float(np.ptp(ys)), 1e-12)
        pts = " ".join(f"{pad + (a - xs[0]) * sx:.3f},{size / 2 - pad - (b - ys.min()) * sy:.3f}" for a, b in zip(xs, ys))
        lines = _svg_header(size, size // 2)
        lines.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>')
        lines.append("</svg>")
        return "\n".join(lines) + "\n"
    if config.d != 2:
        raise InvalidInput("figures are drawn only for d = 1 or d = 2")
    lo = config.points.min(axis=0)
    scale = (size - 2 * pad) / max(float(np.max(np.ptp(config.points, axis=0))), 1e-300)

    def xy(p):
        return pad + (p[0] - lo[0]) * scale, size - pad - (p[1] - lo[1]) * scale

    dens = [float(np.mean(np.exp(y[[i - 1 for i in cell]]))) for cell in subdivision.cells]
    top = max(dens) if dens else 1.0
    lines = _svg_header(size, size)
    for cell, dv in zip(subdivision.cells, dens):
        pts = config.points[[i - 1 for i in cell]]
        centre = pts.mean(axis=0)
        ring = sorted(range(len(cell)), key=lambda k: math.atan2(pts[k, 1] - centre[1], pts[k, 0] - centre[0]))
        coords = " ".join("{:.3f},{:.3f}".format(*xy(pts[k])) for k in ring)
        shade = int(round(235 - 175 * dv / top))
        lines.append(f'<polygon points="{coords}" fill="rgb({shade},{shade},{shade})" stroke="black" stroke-width="1"/>')
    for i, p in enumerate(config.points):
        cx, cy = xy(p)
        lines.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="3" fill="black"/>')
        lines.append(f'<text x="{cx + 5:.3f}" y="{cy - 5:.3f}" font-size="12">{i + 1}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands; each returns (text, exit code)


def _options(args) -> SolverOptions:
    return SolverOptions(grad_tol=args.grad_tol, max_iters=args.max_iters, seed=args.seed)


def cmd_solve(args):
    obj = _read_json(args.input)
    config = _config(obj)
    w = WeightVector(_vector(obj, "weights", config.n)) if "weights" in obj else WeightVector.uniform(config.n)
    result = solve_mle(config, w, _options(args))
    if args.svg:
        Path(args.svg).write_text(subdivision_svg(config, result.heights, result.subdivision), encoding="utf-8")
    return _dumps(result.to_json()), EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_mass(args):
    obj = _read_json(args.input)
    config = _config(obj)
    return _dumps(total_mass(config, _vector(obj, "heights", config.n)).to_json()), EXIT_OK


def cmd_h_eval(args):
    return _dumps({"u": list(args.u), "H": h_eval(np.asarray(args.u, dtype=float))}), EXIT_OK


def cmd_weights(args):
    obj = _read_json(args.input)
    config = _config(obj)
    y = _vector(obj, "heights", config.n)
    if args.normalize:
        y = normalize_heights(config, y)
    if "triangulation" in obj:
        tri = Subdivision.from_json(obj["triangulation"])
        return _dumps({"heights": list(map(float, y)), "weights": list(map(float, weights_from_heights(config, y, tri)))}), EXIT_OK
    return _dumps(normal_cone_generators(config, y).to_json()), EXIT_OK


def cmd_realize(args):
    obj = _read_json(args.input)
    config = _config(obj)
    sub = Subdivision.from_json(obj.get("subdivision", obj.get("cells")))
    w = realize_subdivision(config, sub, seed=args.seed, options=_options(args))
    return _dumps({"subdivision": sub.to_json()["cells"], "weights": list(map(float, w.weights))}), EXIT_OK


def cmd_cone_test(args):
    obj = _read_json(args.input)
    config = _config(obj)
    y = _vector(obj, "heights", config.n)
    if args.normalize:
        y = normalize_heights(config, y)
    w = _vector(obj, "weights", config.n)
    gens = normal_cone_generators(config, y)
    return _dumps({"member": bool(cone_membership(w, gens)), "generators": len(gens)}), EXIT_OK


def cmd_secondary(args):
    config = _config(_read_json(args.input))
    out = [{"triangulation": t.to_json()["cells"], "gkz": list(map(float, gkz_vector(config, t)))}
           for t in enumerate_regular_triangulations(config)]
    return _dumps({"count": len(out), "triangulations": out}), EXIT_OK


def cmd_experiment(args):
    kind = args.kind
    if kind == "stratum":
        config = _config(_read_json(args.input)) if args.input else PointConfiguration(HEXAGON)
        rep = stratum_frequency_experiment(config, args.trials, args.seed, grad_tol=args.grad_tol)
        return _dumps(rep.to_json()), EXIT_OK
    if kind == "table1":
        records, table = table1_experiment(Distribution.parse(args.dist), args.trials, args.seed, grad_tol=args.grad_tol)
        if args.csv:
            return records_to_csv(records), EXIT_OK
        body = table.to_json()
        body.update(dist=str(Distribution.parse(args.dist)), seed=args.seed, trivial_share=table.trivial_share(),
                    mean_cells=table.mean_cells())
        return _dumps(body), EXIT_OK
    if kind == "dplus2":
        rep = d_plus_2_check(args.d, args.trials, args.seed, n=args.n, grad_tol=args.grad_tol)
        return _dumps(rep.to_json()), EXIT_OK
    if kind == "dplus3":
        con = d_plus_3_construction(args.d, args.ratio, split=args.split)
        result = solve_mle(con.config, con.weights, _options(args))
        body = {
            "points": con.config.points.tolist(),
            "weights": list(map(float, con.weights.weights)),
            "expected": con.expected.to_json()["cells"] if con.expected else None,
            "result": result.to_json(),
        }
        return _dumps(body), EXIT_OK if result.converged else EXIT_NOT_CONVERGED
    if kind == "alpha":
        rep = alpha_heights_check(args.d, args.alpha, grad_tol=args.grad_tol)
        body = rep.to_json()
        body["passed"] = rep.passed()
        return _dumps(body), EXIT_OK
    raise InvalidInput(f"unknown experiment kind {kind!r}")


COMMANDS = {
    "solve": cmd_solve,
    "mass": cmd_mass,
    "h-eval": cmd_h_eval,
    "weights": cmd_weights,
    "realize": cmd_realize,
    "cone-test": cmd_cone_test,
    "secondary": cmd_secondary,
    "experiment": cmd_experiment,
}


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tentmle", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True, solver=False):
        p.add_argument("--input", required=needs_input, help="input JSON file")
        p.add_argument("--out", help="output file (default: standard output)")
        p.add_argument("--seed", type=int, default=0)
        if solver:
            p.add_argument("--grad-tol", type=float, default=1e-8)
            p.add_argument("--max-iters", type=int, default=10000)
        return p

    p = common(sub.add_parser("solve", help="maximum-likelihood heights for points and weights"), solver=True)
    p.add_argument("--svg", help="write a figure of the optimal subdivision (d = 1 or 2)")
    common(sub.add_parser("mass", help="integral of exp of the tent function"))
    p = sub.add_parser("h-eval", help="evaluate H(u)")
    p.add_argument("--u", type=float, nargs="+", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p = common(sub.add_parser("weights", help="normal-cone generators at heights"))
    p.add_argument("--normalize", action="store_true", help="normalize the heights first")
    common(sub.add_parser("realize", help="weights realizing a regular subdivision"), solver=True)
    p = common(sub.add_parser("cone-test", help="is a weight vector in the normal cone at heights?"))
    p.add_argument("--normalize", action="store_true", help="normalize the heights first")
    common(sub.add_parser("secondary", help="regular triangulations with GKZ vectors"))
    p = common(sub.add_parser("experiment", help="sampling experiments"), needs_input=False, solver=True)
    p.add_argument("--kind", choices=["stratum", "table1", "dplus2", "dplus3", "alpha"], required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--dist", default="gaussian", help="gaussian or circular:a")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n", type=int, default=None, help="points per configuration (dplus2)")
    p.add_argument("--ratio", type=float, default=2.0)
    p.add_argument("--split", type=float, default=None)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--csv", action="store_true", help="table1: one CSV row per trial")
    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="output file (default: the recorded one)")
    return parser


def _run(args) -> int:
    start = time.perf_counter()
    text, code = COMMANDS[args.command](args)
    _emit(text, args.out)
    if args.out:
        options = {k: v for k, v in vars(args).items() if k != "command"}
        digests = {args.input: _digest(args.input)} if getattr(args, "input", None) else {}
        manifest = RunManifest(__version__, args.command, options, getattr(args, "seed", None), digests,
                               time.perf_counter() - start)
        Path(args.out + ".manifest.json").write_text(_dumps(manifest.to_json()), encoding="utf-8")
    return code


def _replay(args) -> int:
    manifest = _read_json(args.manifest)
    if manifest.get("tool_version") != __version__:
        print(f"warning: manifest from version {manifest.get('tool_version')}", file=sys.stderr)
    ns = argparse.Namespace(command=manifest["subcommand"], **manifest["options"])
    if args.out:
        ns.out = args.out
    for path, digest in manifest.get("input_digests", {}).items():
        if _digest(path) != digest:
            raise InvalidInput(f"input {path} changed since the manifest was written")
    return _run(ns)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "replay":
            return _replay(args)
        return _run(args)
    except TooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TentError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
