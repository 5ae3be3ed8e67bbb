"""Command-line interface.

Subcommands: `spectrum` classifies the eigenvalues of a preset model,
`steady` solves one randomly perturbed steady state, `phase-dist` exports
the reduced phase density of a steady state or sector mixture, `sweep`
drives a seeded ensemble from a TOML config, `aggregate` recomputes the
per-eta summaries of an existing run, and `selftest` exercises a handful
of frozen invariants without pytest.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .harness import ConfigError, aggregate_run, load_config, perturbation_rng, run_sweep
from .liouvillian import (
    classify_decay_free,
    default_tolerances,
    export_spectrum_csv,
    full_spectrum,
    steady_state,
)
from .models import PRESETS, build_preset, mixture_state, pair_oscillating_mode
from .models import coherence_eigenvalue, pair_dark_states, spin_half_pair
from .phasespace import (
    DEFAULT_GRID_N,
    export_sd_csv,
    phase_distribution,
    sync_measure,
)
from .randliouv import random_liouvillian, trace_preservation_defect
from .syncstats import chi

# optional model parameters exposed as flags; each preset validates its own
_MODEL_FLAGS = (
    ("--n", int, "n"),
    ("--omega", float, "omega"),
    ("--j", float, "j"),
    ("--delta", float, "delta"),
    ("--b", float, "b"),
    ("--gamma", float, "gamma"),
    ("--gamma1-gain", float, "gamma1_gain"),
    ("--gamma2-decay", float, "gamma2_decay"),
)


def _add_model_flags(parser):
    parser.add_argument("--model", required=True, choices=sorted(PRESETS))
    for flag, typ, dest in _MODEL_FLAGS:
        parser.add_argument(flag, type=typ, dest=dest, default=None)


def _build_model(args):
    params = {
        dest: getattr(args, dest)
        for _, _, dest in _MODEL_FLAGS
        if getattr(args, dest) is not None
    }
    return build_preset(args.model, **params), params


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_cli_manifest(manifest_path, command, parameters, outputs):
    manifest = {
        "tool": "spinsync",
        "version": __version__,
        "command": command,
        "parameters": parameters,
        "outputs": {
            name: {"path": os.path.basename(path), "sha256": _sha256(path)}
            for name, path in outputs.items()
        },
        "written_at": datetime.now(timezone.utc).isoformat(),
    }
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_rho_csv(rho, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row", "col", "re", "im"])
        for r in range(rho.shape[0]):
            for c in range(rho.shape[1]):
                writer.writerow(
                    [r, c, repr(float(rho[r, c].real)),
                     repr(float(rho[r, c].imag))]
                )


def _perturbed_steady(model, eta, seed):
    base = model.superoperator()
    pert = random_liouvillian(model.dim, perturbation_rng(seed, 0))
    return steady_state(base + eta * pert)


def cmd_spectrum(args):
    model, params = _build_model(args)
    dec = full_spectrum(model.superoperator())
    tol_real, tol_imag = default_tolerances(dec.norm_scale)
    zero = int(
        np.sum(
            (np.abs(dec.eigenvalues.real) <= tol_real)
            & (np.abs(dec.eigenvalues.imag) <= tol_imag)
        )
    )
    if args.out:
        export_spectrum_csv(dec, args.out)
        manifest_path = args.out + ".manifest.json"
        _write_cli_manifest(
            manifest_path,
            "spectrum",
            {"model": args.model, **params},
            {"spectrum": args.out},
        )
        print(f"wrote {args.out} ({dec.dim} eigenvalues, {zero} zero modes)")
        print(f"wrote {manifest_path}")
    else:
        export_spectrum_csv(dec, sys.stdout)
    return 0


def cmd_steady(args):
    model, params = _build_model(args)
    result = _perturbed_steady(model, args.eta, args.seed)
    if result.multiplicity != 1:
        print(
            f"error: steady state is not unique (kernel dimension "
            f"{result.multiplicity}); nothing written",
            file=sys.stderr,
        )
        return 1
    poly = phase_distribution(result.rho, model.spins).reduce_over_global_phase()
    measure = sync_measure(poly, args.grid)
    rho_path = args.out_prefix + "_rho.csv"
    sd_path = args.out_prefix + "_sd.csv"
    _write_rho_csv(result.rho, rho_path)
    export_sd_csv(poly.grid(args.grid), sd_path)
    manifest_path = args.out_prefix + "_manifest.json"
    _write_cli_manifest(
        manifest_path,
        "steady",
        {
            "model": args.model,
            **params,
            "eta": args.eta,
            "seed": args.seed,
            "grid": args.grid,
        },
        {"rho": rho_path, "sd": sd_path},
    )
    print(f"steady state residual: {result.residual:.3e}")
    print(f"s_max: {measure.s_max!r}")
    for point in measure.argmax:
        print("argmax: " + " ".join(repr(float(x)) for x in point))
    print(f"wrote {rho_path}")
    print(f"wrote {sd_path}")
    print(f"wrote {manifest_path}")
    return 0


def _parse_mixture(text):
    weights = {}
    for piece in text.split(","):
        if "=" not in piece:
            raise ConfigError(f"bad mixture term {piece!r}; use LABEL=WEIGHT")
        label, value = piece.split("=", 1)
        weights[label.strip()] = float(value)
    return weights


def cmd_phase_dist(args):
    model, params = _build_model(args)
    if (args.mixture is None) == (args.eta is None):
        raise ConfigError("pass exactly one of --mixture or --eta/--seed")
    if args.mixture is not None:
        if args.model != "spin1_chain":
            raise ConfigError("--mixture applies to the spin1_chain preset")
        weights = _parse_mixture(args.mixture)
        rho = mixture_state(params.get("n", 3), weights)
        source = {"mixture": weights}
    else:
        if args.seed is None:
            raise ConfigError("--eta needs --seed")
        result = _perturbed_steady(model, args.eta, args.seed)
        if result.multiplicity != 1:
            print(
                f"error: steady state is not unique (kernel dimension "
                f"{result.multiplicity}); nothing written",
                file=sys.stderr,
            )
            return 1
        rho = result.rho
        source = {"eta": args.eta, "seed": args.seed}
    poly = phase_distribution(rho, model.spins).reduce_over_global_phase()
    measure = sync_measure(poly, args.grid)
    export_sd_csv(poly.grid(args.grid), args.out)
    manifest_path = args.out + ".manifest.json"
    _write_cli_manifest(
        manifest_path,
        "phase-dist",
        {"model": args.model, **params, **source, "grid": args.grid},
        {"sd": args.out},
    )
    print(f"s_max: {measure.s_max!r}")
    for point in measure.argmax:
        print("argmax: " + " ".join(repr(float(x)) for x in point))
    print(f"wrote {args.out}")
    print(f"wrote {manifest_path}")
    return 0


def _print_aggregate(rows):
    if not rows:
        print("no aggregate rows")
        return
    cols = list(rows[0].keys())
    print("\t".join(cols))
    for row in rows:
        print("\t".join(str(row[c]) for c in cols))


def cmd_sweep(args):
    config = load_config(args.config)

    def progress(done, total):
        if done == total or done % max(1, total // 20) == 0:
            print(f"  {done}/{total} records", file=sys.stderr)

    summary = run_sweep(config, args.out, workers=args.workers, progress=progress)
    print(
        f"computed {summary.n_computed} records "
        f"({summary.n_skipped} already present) in {summary.out_dir}"
    )
    _print_aggregate(summary.aggregate_rows)
    return 0


def cmd_aggregate(args):
    rows = aggregate_run(args.run_dir)
    _print_aggregate(rows)
    return 0


def cmd_selftest(args):
    checks = []

    chain = build_preset("spin1_chain", n=3, omega=1.0, j=0.5, delta=0.5, gamma=2.0)
    dec = full_spectrum(chain.superoperator())
    modes = classify_decay_free(dec)
    checks.append(("spin-1 chain has 8 decay-free stationary sectors", len(modes.steady) == 8))
    freqs = sorted(abs(f) for _, f in modes.oscillating)
    checks.append(
        ("chain coherence frequencies are 2, 4, 6 in units of omega",
         np.allclose(freqs, [2, 2, 4, 4, 6, 6], atol=1e-8)),
    )

    pair = spin_half_pair()
    lam, residual = coherence_eigenvalue(pair, pair_oscillating_mode())
    checks.append(
        ("spin-1/2 pair coherence rotates at J + 2 Delta - 2 B",
         residual < 1e-10 and abs(lam - (-2.4j)) < 1e-10),
    )
    v_plus, v_minus = pair_dark_states()
    checks.append(
        ("pair dark states are annihilated by the collective jump",
         np.linalg.norm(pair.jumps[0] @ v_plus) < 1e-12
         and np.linalg.norm(pair.jumps[0] @ v_minus) < 1e-12),
    )

    sop = random_liouvillian(4, np.random.default_rng(0))
    checks.append(
        ("random Liouvillian preserves the trace", trace_preservation_defect(sop) < 1e-12)
    )

    checks.append(
        ("lock measure hand values",
         chi((0.0, 0.0, 0.0)) == 0.0
         and abs(chi((0.0, 0.0, np.pi)) - 1.0) < 1e-12
         and abs(chi((0.0, np.pi / 3, -np.pi / 3)) - 0.25) < 1e-12),
    )

    failures = 0
    for label, ok in checks:
        print(("ok: " if ok else "FAIL: ") + label)
        failures += 0 if ok else 1
    print(f"{len(checks) - failures}/{len(checks)} checks passed")
    return 1 if failures else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spinsync",
        description="Spin-system Liouvillian spectra, steady states, and "
        "phase-locking diagnostics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="classify eigenvalues of a preset model")
    _add_model_flags(p)
    p.add_argument("--out", default=None, help="CSV path; stdout when omitted")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("steady", help="solve one randomly perturbed steady state")
    _add_model_flags(p)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--grid", type=int, default=DEFAULT_GRID_N)
    p.add_argument("--out-prefix", default="steady", help="prefix for output files")
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser(
        "phase-dist", help="export the reduced phase density of a state"
    )
    _add_model_flags(p)
    p.add_argument("--mixture", default=None, help="e.g. M0+=0.75,M0-=0.25")
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--grid", type=int, default=DEFAULT_GRID_N)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_phase_dist)

    p = sub.add_parser("sweep", help="run or resume a seeded ensemble sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("aggregate", help="recompute summaries for a finished run")
    p.add_argument("--run-dir", required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("selftest", help="check frozen invariants")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
