"""Command-line interface.

Subcommands: `bases gen`, `simulate`, `reconstruct`, `witness`, and
`experiment <fig1|fig2|fig3|fig4>`. Exit codes: 0 success, 1 usage error,
2 numerical failure.

BLAS thread pools are pinned to one thread before numpy loads so that
`--threads` (process-level parallelism) changes wall time only, never any
numeric output.
"""

from __future__ import annotations

import os

for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import argparse
import json
import sys

import numpy as np


class _UsageError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vqtomo",
        description="Variational quantum state tomography via semidefinite programming",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bases = sub.add_parser("bases", help="measurement-set construction")
    bases_sub = p_bases.add_subparsers(dest="bases_command", required=True)
    p_gen = bases_sub.add_parser("gen", help="generate a projector set")
    p_gen.add_argument("--dim", type=int, required=True)
    p_gen.add_argument(
        "--kind", choices=["mub", "gellmann"], default="mub",
        help="mutually unbiased bases (prime-power dim) or Gell-Mann eigenbases",
    )
    p_gen.add_argument("--out", required=True)

    p_sim = sub.add_parser("simulate", help="simulate measurement records")
    p_sim.add_argument("--state", choices=["werner", "pure", "mixed"], required=True)
    p_sim.add_argument("--beta", type=float, default=-0.8)
    p_sim.add_argument("--dim", type=int, help="Hilbert-space dimension (werner default 9)")
    p_sim.add_argument("--rank", type=int, help="rank for --state mixed")
    p_sim.add_argument("--noise", type=float, default=0.0)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--basis", default="auto", help="projector-set JSON, or 'auto' for MUBs")
    p_sim.add_argument("--basis-out", help="also write the basis used to this path")
    p_sim.add_argument("--out", required=True)

    p_rec = sub.add_parser("reconstruct", help="reconstruct a state from records")
    p_rec.add_argument("--records", required=True)
    p_rec.add_argument("--basis", required=True)
    p_rec.add_argument("--out", required=True)
    p_rec.add_argument("--detect", action="store_true", help="run incompatibility detection")
    p_rec.add_argument("--gap-tol", type=float, default=1e-8)
    p_rec.add_argument("--feas-tol", type=float, default=1e-8)

    p_wit = sub.add_parser("witness", help="optimal decomposable witness of a state")
    p_wit.add_argument("--input", required=True, help="TomographyResult JSON or {'matrix': ...} JSON")
    p_wit.add_argument("--dims", type=int, nargs=2, required=True, metavar=("DA", "DB"))
    p_wit.add_argument("--out", required=True)

    p_exp = sub.add_parser("experiment", help="run a benchmark experiment")
    p_exp.add_argument("name", choices=["fig1", "fig2", "fig3", "fig4"])
    p_exp.add_argument("--config", help="JSON config or a previous manifest.json")
    p_exp.add_argument("--out", help="output directory (overrides config)")
    p_exp.add_argument("--seed", type=int, help="base seed override")
    p_exp.add_argument("--noise", type=float, help="noise level override")
    p_exp.add_argument("--threads", type=int, help="worker processes")

    return parser


def _cmd_bases(args) -> int:
    from .bases import gell_mann_observables, mub, observables_to_projectors, save_projector_set

    if args.kind == "mub":
        ps = mub(args.dim)
    else:
        ps = observables_to_projectors(gell_mann_observables(args.dim))
    save_projector_set(ps, args.out)
    print(f"wrote {ps.n_classes} classes x {ps.dim} projectors to {args.out}")
    return 0


def _make_state(args) -> np.ndarray:
    from . import states

    if args.state == "werner":
        dim = args.dim or 9
        d_local = int(round(np.sqrt(dim)))
        if d_local * d_local != dim:
            raise _UsageError("werner state needs a square --dim")
        return states.werner_state(args.beta, d_local)
    if args.dim is None:
        raise _UsageError(f"--dim is required for --state {args.state}")
    if args.state == "pure":
        return states.random_pure(args.dim, args.seed)
    if args.rank is None:
        raise _UsageError("--rank is required for --state mixed")
    return states.random_density(args.dim, args.rank, args.seed)


def _cmd_simulate(args) -> int:
    from . import states
    from .bases import load_projector_set, mub, save_projector_set

    rho = _make_state(args)
    d = rho.shape[0]
    if args.basis == "auto":
        ps = mub(d)
    else:
        ps = load_projector_set(args.basis)
        if ps.dim != d:
            raise _UsageError(f"basis dimension {ps.dim} does not match state {d}")
    probs = states.exact_probabilities(rho, ps)
    kind = "none" if args.noise == 0 else "uniform-multiplicative"
    records = states.noisy_frequencies(
        probs, states.NoiseModel(kind=kind, level=args.noise, seed=args.seed)
    )
    states.save_records(records, args.out)
    if args.basis_out:
        save_projector_set(ps, args.basis_out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _cmd_reconstruct(args) -> int:
    from .bases import load_projector_set
    from .solver import SolverSettings
    from .states import load_records
    from .tomography import problem_from_records, reconstruct, save_result

    ps = load_projector_set(args.basis)
    records = load_records(args.records)
    tp = problem_from_records(ps, records)
    res = reconstruct(
        tp,
        settings=SolverSettings(gap_tol=args.gap_tol, feas_tol=args.feas_tol),
        detect=args.detect,
    )
    save_result(res, args.out)
    print(
        f"status {res.solver_status}, objective {res.objective:.6g}, "
        f"{len(res.incompatible)} flagged; wrote {args.out}"
    )
    return 0


def _cmd_witness(args) -> int:
    from .tomography import _matrix_to_json, matrix_from_json
    from .witness import decomposable_witness

    with open(args.input) as fh:
        data = json.load(fh)
    key = "estimate" if "estimate" in data else "matrix"
    if key not in data:
        raise _UsageError("input JSON must carry 'estimate' or 'matrix'")
    rho = matrix_from_json(data[key])
    result = decomposable_witness(rho, tuple(args.dims))
    out = {
        "witness": _matrix_to_json(result.witness),
        "value": result.value,
        "entanglement": result.entanglement,
        "gap": result.gap,
        "status": result.solver_status,
    }
    with open(args.out, "w") as fh:
        json.dump(out, fh, sort_keys=True)
    print(f"witness value {result.value:.6g}; wrote {args.out}")
    return 0


def _cmd_experiment(args) -> int:
    from .experiments import config_from_json, default_config, run_experiment

    if args.config:
        with open(args.config) as fh:
            cfg = config_from_json(json.load(fh))
        if cfg.experiment != args.name:
            raise _UsageError(
                f"config is for {cfg.experiment!r}, requested {args.name!r}"
            )
    else:
        cfg = default_config(args.name)
    if args.out:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.base_seed = args.seed
        cfg.seeds = list(range(args.seed, args.seed + max(len(cfg.seeds), 1)))
    if args.noise is not None:
        cfg.noise_level = args.noise
    if args.threads is not None:
        cfg.threads = args.threads
    summary = run_experiment(cfg)
    print(f"{args.name} complete; outputs in {cfg.out_dir}")
    return 0 if summary is not None else 2


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    from .linalg import InvalidInputError
    from .tomography import ReconstructionFailedError
    from .witness import WitnessFailedError

    handler = {
        "bases": _cmd_bases,
        "simulate": _cmd_simulate,
        "reconstruct": _cmd_reconstruct,
        "witness": _cmd_witness,
        "experiment": _cmd_experiment,
    }[args.command]
    try:
        return handler(args)
    except (_UsageError, InvalidInputError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ReconstructionFailedError, WitnessFailedError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
