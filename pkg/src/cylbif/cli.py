"""Command-line entry point.

Subcommands: check-f, solve-1d, spectrum-1d, base-eigs, morse,
bifurcation-points, verify-decomposition, continue.  Every run reads one
JSON configuration file, writes its artifacts (CSV plus summary.json with
provenance) into the output directory, and exits 0 on success, 2 on
validation failure, 3 on numerical non-convergence, 4 when no
solution/branch exists, 64 on usage errors.

Identical configurations produce bitwise-identical CSV output: iteration
orders are fixed and nothing is seeded from the clock.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .base_spectrum import (
    BaseDomain,
    Disk,
    Interval,
    domain_from_dict,
    neumann_eigenvalues,
    scale_spectrum,
)
from .errors import (
    CylbifError,
    NoSolutionError,
    NonConvergenceError,
    ValidationError,
)
from .morse_bifurcation import degeneracy_times, ground_state_flag, morse_index, morse_vs_t
from .nonlinearity import (
    NonlinearityModel,
    check_hypotheses,
    default_hypothesis_samples,
    eval_F,
    eval_f,
    eval_fprime,
    model_from_dict,
)
from .ode_shooting import ShootingConfig, find_one_dim_solution
from .pde_rectangle import (
    Grid2D,
    assemble_linearized,
    backtrack_branch,
    continue_branch,
    discrete_bifurcation_scaling,
    embed_one_dim,
    eval_energy,
    make_branch_context,
    smallest_eigenvalues,
)
from .sturm_liouville import (
    linearized_spectrum,
    nondegeneracy_margin,
    one_dim_morse,
    oscillation_check,
    richardson_extrapolate,
)
from .ode_shooting import integrate_ivp

log = logging.getLogger("cylbif.cli")

SUBCOMMANDS = (
    "check-f",
    "solve-1d",
    "spectrum-1d",
    "base-eigs",
    "morse",
    "bifurcation-points",
    "verify-decomposition",
    "continue",
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NONCONVERGENCE = 3
EXIT_NO_SOLUTION = 4
EXIT_USAGE = 64

SCHEMA_VERSION = 1

# single defaults table; every entry can be overridden per run
DEFAULT_GRIDS = {"ode_M": 2000, "eig_M": 2000, "nx": 200, "ny": 200}
DEFAULT_TOLERANCES = {
    "tol_terminal": 1e-10,
    "tol_amplitude": 1e-12,
    "newton_tol": 1e-8,
    "deviation_floor": 1e-3,
}
DEFAULT_OPTIONS = {
    "cutoff": 120.0,
    "k_eigs": 12,
    "emit_eigenfunctions": False,
    "t_verify": 1.0,
    "rotation_invariant": False,
    "branch_steps": 10,
    "dump_solutions": True,
    "max_modes": 200_000,
}


@dataclass
class RunConfig:
    model: NonlinearityModel
    base: BaseDomain
    nodal_n: int
    grids: dict
    tolerances: dict
    t_range: tuple[float, float, int]
    output_dir: Path
    options: dict
    alphas: list[float] | None = None
    seed: int = 0
    raw: dict = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def load_config(path: str, out_override: str | None = None, seed_override: int | None = None) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError("config root must be a JSON object")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {version!r}; this build reads {SCHEMA_VERSION}")

    known = {
        "schema_version",
        "model",
        "base",
        "nodal_n",
        "grids",
        "tolerances",
        "t_range",
        "output_dir",
        "options",
        "alphas",
        "seed",
    }
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")

    model = model_from_dict(raw.get("model", {"type": "lane_emden", "p": 4.0}))
    base = domain_from_dict(raw.get("base", {"type": "interval", "length": 1.0}))
    nodal_n = int(raw.get("nodal_n", 1))
    if nodal_n < 1:
        raise ValidationError(f"nodal_n must be >= 1, got {nodal_n}")

    grids = dict(DEFAULT_GRIDS)
    grids.update(raw.get("grids", {}))
    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(raw.get("tolerances", {}))
    if any(v <= 0 for v in tolerances.values()):
        raise ValidationError("all tolerances must be positive")
    options = dict(DEFAULT_OPTIONS)
    options.update(raw.get("options", {}))

    tr = raw.get("t_range", {"t_min": 0.5, "t_max": 3.0, "samples": 40})
    try:
        t_range = (float(tr["t_min"]), float(tr["t_max"]), int(tr["samples"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"t_range must provide t_min, t_max, samples: {exc}") from exc
    if not (0.0 < t_range[0] < t_range[1]) or t_range[2] < 2:
        raise ValidationError(f"need 0 < t_min < t_max and samples >= 2, got {t_range}")

    alphas = raw.get("alphas")
    if alphas is not None:
        alphas = [float(a) for a in alphas]
        if sorted(alphas) != alphas:
            raise ValidationError("config alphas must be sorted ascending")

    out_dir = Path(out_override) if out_override else Path(raw.get("output_dir", "out"))
    seed = int(seed_override if seed_override is not None else raw.get("seed", 0))
    return RunConfig(
        model=model,
        base=base,
        nodal_n=nodal_n,
        grids=grids,
        tolerances=tolerances,
        t_range=t_range,
        output_dir=out_dir,
        options=options,
        alphas=alphas,
        seed=seed,
        raw=raw,
    )


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if not isinstance(v, str) else v for v in row) + "\n")


def write_summary(cfg: RunConfig, subcommand: str, results: dict) -> None:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "subcommand": subcommand,
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        "grids": cfg.grids,
        "tolerances": cfg.tolerances,
        "results": results,
    }
    with open(cfg.output_dir / "summary.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj)}")


def _shooting_config(cfg: RunConfig) -> ShootingConfig:
    return ShootingConfig(
        steps=int(cfg.grids["ode_M"]),
        tol_terminal=cfg.tolerances["tol_terminal"],
        tol_amplitude=cfg.tolerances["tol_amplitude"],
    )


def _alphas_for(cfg: RunConfig, k: int | None = None) -> np.ndarray:
    """Synthetic alphas from the config if given, otherwise solve and extrapolate."""
    if cfg.alphas is not None:
        return np.asarray(cfg.alphas, dtype=float)
    sol = find_one_dim_solution(cfg.model, cfg.nodal_n, _shooting_config(cfg))
    k = k or int(cfg.options["k_eigs"])
    base_m = int(cfg.grids["eig_M"])
    per_m = [linearized_spectrum(cfg.model, sol.amplitude, m, k).alphas for m in (base_m // 4, base_m // 2, base_m)]
    return np.array([richardson_extrapolate([per_m[0][i], per_m[1][i], per_m[2][i]]) for i in range(k)])


def _interval_length(cfg: RunConfig) -> float:
    if not isinstance(cfg.base, Interval):
        raise ValidationError("this subcommand needs an interval base")
    return cfg.base.length


def cmd_check_f(cfg: RunConfig) -> dict:
    samples = default_hypothesis_samples()
    report = check_hypotheses(cfg.model, samples)
    rows = [
        (s, eval_f(cfg.model, s), eval_fprime(cfg.model, s), eval_F(cfg.model, s))
        for s in samples
    ]
    write_csv(cfg.output_dir / "check-f.csv", ["s", "f", "fprime", "F"], rows)
    return {
        "superlinear": report.superlinear,
        "sign": report.sign,
        "superlinear_failures": report.superlinear_failures,
        "sign_failures": report.sign_failures,
    }


def cmd_solve_1d(cfg: RunConfig) -> dict:
    sol = find_one_dim_solution(cfg.model, cfg.nodal_n, _shooting_config(cfg))
    rows = zip(sol.grid, sol.values, sol.derivative_values)
    write_csv(cfg.output_dir / "solve-1d.csv", ["x", "u", "uprime"], rows)
    return {
        "amplitude": sol.amplitude,
        "nodal_count": sol.nodal_count,
        "residual": sol.residual,
    }


def cmd_spectrum_1d(cfg: RunConfig) -> dict:
    sol = find_one_dim_solution(cfg.model, cfg.nodal_n, _shooting_config(cfg))
    k = int(cfg.options["k_eigs"])
    spec = linearized_spectrum(cfg.model, sol.amplitude, int(cfg.grids["eig_M"]), k)
    rows = [(i + 1, spec.alphas[i], int(spec.zero_counts[i])) for i in range(k)]
    write_csv(cfg.output_dir / "spectrum-1d.csv", ["i", "alpha_i", "zero_count_i"], rows)
    if cfg.options["emit_eigenfunctions"]:
        nodes = np.linspace(0.0, 1.0, spec.grid_size + 1)
        for i in range(k):
            write_csv(
                cfg.output_dir / f"eigenfunction_{i + 1}.csv",
                ["x", "z"],
                zip(nodes, spec.eigenfunctions[i]),
            )
    return {
        "amplitude": sol.amplitude,
        "alphas": list(spec.alphas),
        "m_xn": one_dim_morse(spec),
        "nondegeneracy_margin": nondegeneracy_margin(spec),
        "oscillation_ok": oscillation_check(spec),
    }


def cmd_base_eigs(cfg: RunConfig) -> dict:
    spec = neumann_eigenvalues(
        cfg.base,
        float(cfg.options["cutoff"]),
        max_modes=int(cfg.options["max_modes"]),
        rotation_invariant=bool(cfg.options["rotation_invariant"]),
    )
    rows = [
        (j, lam, int(mult), "|".join(str(lab) for lab in labs))
        for j, (lam, mult, labs) in enumerate(zip(spec.lambdas, spec.multiplicities, spec.labels))
    ]
    write_csv(cfg.output_dir / "base-eigs.csv", ["j", "lambda_j", "multiplicity", "label"], rows)
    return {"count": len(spec.lambdas), "total_multiplicity": int(spec.multiplicities.sum())}


def _base_with_coverage(cfg: RunConfig, alphas: np.ndarray) -> tuple:
    t_min, t_max, _ = cfg.t_range
    needed = max(float(cfg.options["cutoff"]), 1.05 * (-float(alphas[0])) * t_max**2, 1.0)
    base = neumann_eigenvalues(
        cfg.base,
        needed,
        max_modes=int(cfg.options["max_modes"]),
        rotation_invariant=bool(cfg.options["rotation_invariant"]),
    )
    return base, needed


def cmd_morse(cfg: RunConfig, threads: int = 1) -> dict:
    alphas = _alphas_for(cfg)
    base, _ = _base_with_coverage(cfg, alphas)
    report = morse_index(alphas, base)
    t_min, t_max, samples = cfg.t_range
    ts = np.linspace(t_min, t_max, samples)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda t: morse_index(alphas, scale_spectrum(base, float(t))), ts))
        sweep = [(float(t), r.m, r.degenerate) for t, r in zip(ts, results)]
    else:
        sweep = [(s.t, s.m, s.degenerate) for s in morse_vs_t(alphas, base, ts)]
    write_csv(cfg.output_dir / "morse.csv", ["t", "m", "degenerate"], sweep)
    return {
        "m": report.m,
        "m_xn": report.m_xn,
        "contributions": report.contributions,
        "degenerate": report.degenerate,
        "zero_multiplicity": report.zero_multiplicity,
        "ground_state_flag": ground_state_flag(alphas, base) if alphas[0] < 0 else False,
    }


def cmd_bifurcation_points(cfg: RunConfig) -> dict:
    alphas = _alphas_for(cfg)
    _, t_max, _ = cfg.t_range
    needed = max(1.05 * max(0.0, -float(alphas[0])) * t_max**2, float(cfg.options["cutoff"]))
    base = neumann_eigenvalues(
        cfg.base,
        needed,
        max_modes=int(cfg.options["max_modes"]),
        rotation_invariant=bool(cfg.options["rotation_invariant"]),
    )
    points = degeneracy_times(alphas, base, t_max)
    rows = []
    for p in points:
        for i, j in p.pairs:
            rows.append((p.t_bar, i, j, p.kernel_multiplicity, p.simple))
    write_csv(
        cfg.output_dir / "bifurcation-points.csv",
        ["t_bar", "i", "j", "multiplicity", "simple"],
        rows,
    )
    return {"count": len(points), "t_bars": [p.t_bar for p in points]}


def cmd_verify_decomposition(cfg: RunConfig) -> dict:
    length = _interval_length(cfg)
    t = float(cfg.options["t_verify"])
    sol = find_one_dim_solution(cfg.model, cfg.nodal_n, _shooting_config(cfg))
    alphas = _alphas_for(cfg)
    k = 10
    cutoff = float(alphas[-1])
    base = neumann_eigenvalues(Interval(length), cutoff=max(2.0 * cutoff, 50.0) * t**2 + 1.0)
    scaled = scale_spectrum(base, t)
    composed = []
    for a in alphas:
        for lam, mult in zip(scaled.lambdas, scaled.multiplicities):
            composed.extend([float(a) + float(lam)] * int(mult))
    composed = np.sort(np.array(composed))[:k]

    grid = Grid2D(int(cfg.grids["nx"]), int(cfg.grids["ny"]))
    u1d, _ = integrate_ivp(cfg.model, sol.amplitude, grid.ny - 1)
    op = assemble_linearized(embed_one_dim(u1d, grid), t, cfg.model, grid, length)
    direct = smallest_eigenvalues(op, k)
    rel = np.abs(direct - composed) / np.abs(composed)
    rows = [(i + 1, composed[i], direct[i], rel[i]) for i in range(k)]
    write_csv(
        cfg.output_dir / "verify-decomposition.csv",
        ["idx", "composed", "direct_2d", "rel_mismatch"],
        rows,
    )
    return {"t": t, "max_rel_mismatch": float(np.max(rel)), "k": k}


def cmd_continue(cfg: RunConfig) -> dict:
    length = _interval_length(cfg)
    sol = find_one_dim_solution(cfg.model, cfg.nodal_n, _shooting_config(cfg))
    alphas = _alphas_for(cfg)
    _, t_max, _ = cfg.t_range
    base = neumann_eigenvalues(Interval(length), cutoff=1.05 * (-float(alphas[0])) * t_max**2 + 1.0)
    points = degeneracy_times(alphas, base, t_max)
    simple_points = [p for p in points if p.simple]
    if not simple_points:
        raise NoSolutionError(f"no simple degeneracy scaling below t_max = {t_max}")
    point = simple_points[0]
    k_index = points.index(point) + 1
    log.info("switching at t_bar = %.8g (pair %s)", point.t_bar, point.pairs[0])

    grid = Grid2D(int(cfg.grids["nx"]), int(cfg.grids["ny"]))
    i, j = point.pairs[0]
    spec_grid = linearized_spectrum(cfg.model, sol.amplitude, grid.ny - 1, max(i + 2, 6))
    ctx = make_branch_context(
        cfg.model,
        grid,
        length,
        sol.amplitude,
        spec_grid,
        i=i,
        j=j,
        tol=cfg.tolerances["newton_tol"],
    )
    t_bar_h = discrete_bifurcation_scaling(ctx, i, j)
    steps = int(cfg.options["branch_steps"])
    energy_ref = eval_energy(ctx.u_ref, point.t_bar, cfg.model, grid, length)

    results = {
        "t_bar": point.t_bar,
        "t_bar_discrete": t_bar_h,
        "kernel_pair": [i, j],
        "energy_one_dim": energy_ref,
    }
    eps0 = 1e-1 * ctx.ref_norm
    branches = {}
    for sign_name, eps in (("plus", eps0), ("minus", -eps0)):
        try:
            branch = continue_branch(ctx, point, direction=+1, steps=steps, eps0=eps)
        except NoSolutionError:
            branch = []
        branches[sign_name] = branch
        rows = [
            (
                bp.t,
                bp.deviation,
                bp.distance_to_1d,
                bp.nodal_count_2d,
                bp.newton_iters,
                eval_energy(bp.solution, bp.t, cfg.model, grid, length),
            )
            for bp in branch
        ]
        write_csv(
            cfg.output_dir / f"branch_{sign_name}_{k_index}.csv",
            ["t", "deviation", "distance_to_1d", "nodal_count", "newton_iters", "energy"],
            rows,
        )
        if cfg.options["dump_solutions"]:
            xs = grid.x_nodes()
            ys = grid.y_nodes()
            for idx, bp in enumerate(branch):
                dump_rows = (
                    (xs[ix], ys[iy], bp.solution[iy, ix])
                    for iy in range(grid.ny)
                    for ix in range(grid.nx)
                )
                write_csv(
                    cfg.output_dir / f"solution_{sign_name}_{k_index}_{idx}.csv",
                    ["xprime", "xn", "u"],
                    dump_rows,
                )
        if branch:
            last_t = branch[-1].t
            outcome = "reached_t_limit" if last_t + 1e-12 >= min(t_max, point.t_bar + steps * 1e-2 * point.t_bar) else "stalled"
            if branch[-1].distance_to_1d < 10 * ctx.tol:
                outcome = "returned_to_one_dimensional"
            results[f"outcome_{sign_name}"] = outcome
            results[f"deviation_first_{sign_name}"] = branch[0].deviation
            results[f"points_{sign_name}"] = len(branch)
        else:
            results[f"outcome_{sign_name}"] = "branch_not_found"

    plus, minus = branches["plus"], branches["minus"]
    if plus and minus:
        refl = plus[0].solution[:, ::-1]
        scale = float(np.max(np.abs(refl)))
        results["half_branches_are_reflections"] = bool(
            np.max(np.abs(minus[0].solution - refl)) / scale < 1e-6
        )
    if plus:
        back = backtrack_branch(ctx, plus[0], t_bar_h, n_offsets=5)
        results["backtrack_distances"] = [bp.distance_to_1d for bp in back]
    if not plus and not minus:
        raise NoSolutionError("no bifurcating branch found on either half-branch")
    return results


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cylbif",
        description="Height-only solutions on bounded cylinders: Morse indices, "
        "degeneracy scalings, and symmetry-breaking branches.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="path to the JSON run configuration")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for independent samples")
    parser.add_argument("--seed", type=int, default=None, help="seed recorded in the provenance block")
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    level = os.environ.get("CYLBIF_LOG", "info").lower()
    if level not in ("error", "info", "debug"):
        level = "info"
    logging.basicConfig(level=getattr(logging, level.upper()), stream=sys.stderr, format="%(name)s: %(message)s")

    positional = [a for a in argv if not a.startswith("-")]
    if not positional or positional[0] not in SUBCOMMANDS:
        print(
            f"usage: cylbif {{{','.join(SUBCOMMANDS)}}} --config CONFIG [--out DIR] [--threads K] [--seed N]",
            file=sys.stderr,
        )
        return EXIT_USAGE

    try:
        args = build_parser().parse_args(argv)
    except SystemExit:
        return EXIT_USAGE

    try:
        cfg = load_config(args.config, out_override=args.out, seed_override=args.seed)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        if args.threads < 1:
            raise ValidationError("--threads must be >= 1")
        log.info("running %s into %s", args.subcommand, cfg.output_dir)
        if args.subcommand == "check-f":
            results = cmd_check_f(cfg)
        elif args.subcommand == "solve-1d":
            results = cmd_solve_1d(cfg)
        elif args.subcommand == "spectrum-1d":
            results = cmd_spectrum_1d(cfg)
        elif args.subcommand == "base-eigs":
            results = cmd_base_eigs(cfg)
        elif args.subcommand == "morse":
            results = cmd_morse(cfg, threads=args.threads)
        elif args.subcommand == "bifurcation-points":
            results = cmd_bifurcation_points(cfg)
        elif args.subcommand == "verify-decomposition":
            results = cmd_verify_decomposition(cfg)
        else:
            results = cmd_continue(cfg)
        write_summary(cfg, args.subcommand, results)
    except ValidationError as exc:
        log.error("validation failure: %s", exc)
        return EXIT_VALIDATION
    except NonConvergenceError as exc:
        log.error("non-convergence: %s", exc)
        return EXIT_NONCONVERGENCE
    except NoSolutionError as exc:
        log.error("no solution: %s", exc)
        return EXIT_NO_SOLUTION
    except CylbifError as exc:
        log.error("error: %s", exc)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
