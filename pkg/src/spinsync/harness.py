"""Seeded ensemble sweeps over randomly perturbed spin Liouvillians.

A sweep takes a model preset, a list of perturbation strengths eta, and a
sample count, then for every (eta, sample) pair solves the perturbed steady
state and records the peak of its reduced phase density plus sampled lock
statistics. All randomness is derived from numpy SeedSequence streams:

* perturbation draw for sample s: SeedSequence([master_seed, s, 0])
* phase sampling for (s, eta index e): SeedSequence([master_seed, s, 1 + e])
* bootstrap for eta index e: SeedSequence([master_seed, 2**20 + e])

so every record is a pure function of the config, independent of worker
count and of interruption/resume order. Rows are written sorted by
(sample_id, eta index); a resumed run reproduces the byte-identical files
of an uninterrupted one.

Outputs in the run directory:

* records.csv: one row per (sample, eta); reason codes mark exclusions
* chi.csv: sampled lock statistics, chi_samples_per_record rows per record
* records.jsonl: full per-record payloads (all argmax points, residuals)
* aggregate.csv: per-eta summary statistics with bootstrap uncertainties
* chi_hist_eta<k>.csv: 64-bin density histogram of the pooled lock values
* run_manifest.json: config echo and file inventory
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from math import nan

import numpy as np
import tomli

from . import __version__
from .liouvillian import steady_state
from .models import PRESETS, build_preset
from .phasespace import (
    DEFAULT_GRID_N,
    DEFAULT_THRESHOLD,
    phase_distribution,
    sample_phases,
    sync_measure,
)
from .randliouv import random_liouvillian
from .syncstats import (
    bootstrap_summary,
    chi2,
    chi_from_relative,
    cluster_bootstrap,
    export_histogram_csv,
    family_ratio,
    interval_probabilities,
)

RECORD_FIELDS = (
    "sample_id",
    "eta",
    "seed",
    "s_max",
    "multiplicity",
    "reason_code",
    "argmax_phi1p",
    "argmax_phi2p",
)
CHI_FIELDS = ("sample_id", "eta", "chi")
AGGREGATE_FIELDS = (
    "eta",
    "n_records",
    "n_excluded",
    "mean_s_max",
    "sem_s_max",
    "p1",
    "p2",
    "p3",
    "p1_sigma",
    "p2_sigma",
    "p3_sigma",
    "ratio",
    "ratio_ci_lo",
    "ratio_ci_hi",
)

REASON_OK = "ok"
REASON_DEGENERATE = "degenerate_kernel"
REASON_FLAT = "flat_density"

MANIFEST_NAME = "run_manifest.json"
_BOOTSTRAP_TAG = 2**20


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    preset: str
    params: dict
    master_seed: int
    etas: tuple
    samples_per_eta: int
    label: str = ""
    chi_samples_per_record: int = 1000
    grid_n: int = DEFAULT_GRID_N
    threshold: float = DEFAULT_THRESHOLD
    bootstrap_resamples: int = 1000

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")
        if not self.etas:
            raise ConfigError("etas must be a nonempty list")
        if any(e < 0 for e in self.etas):
            raise ConfigError("etas must be nonnegative")
        if len(set(self.etas)) != len(self.etas):
            raise ConfigError("etas must be distinct")
        for name, low in [
            ("samples_per_eta", 1),
            ("chi_samples_per_record", 1),
            ("grid_n", 8),
            ("bootstrap_resamples", 1),
        ]:
            if getattr(self, name) < low:
                raise ConfigError(f"{name} must be at least {low}")
        if not 0 < self.threshold <= 1:
            raise ConfigError("threshold must lie in (0, 1]")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be nonnegative")


_RUN_KEYS = {
    "label",
    "master_seed",
    "etas",
    "samples_per_eta",
    "chi_samples_per_record",
    "grid_n",
    "threshold",
    "bootstrap_resamples",
}


def load_config(path):
    """Parse and validate a sweep config; see README for the TOML layout."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        try:
            raw = tomli.load(fh)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    run = raw.get("run")
    model = raw.get("model")
    if not isinstance(run, dict) or not isinstance(model, dict):
        raise ConfigError("config needs [run] and [model] tables")
    unknown = set(run) - _RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown [run] keys: {sorted(unknown)}")
    unknown = set(model) - {"preset", "params"}
    if unknown:
        raise ConfigError(f"unknown [model] keys: {sorted(unknown)}")
    if "preset" not in model:
        raise ConfigError("[model] needs a preset name")
    for key in ("master_seed", "etas", "samples_per_eta"):
        if key not in run:
            raise ConfigError(f"[run] needs {key}")
    kwargs = dict(run)
    kwargs["etas"] = tuple(float(e) for e in kwargs["etas"])
    return SweepConfig(
        preset=model["preset"], params=dict(model.get("params", {})), **kwargs
    )


def perturbation_rng(master_seed, sample_id):
    return np.random.default_rng(np.random.SeedSequence([master_seed, sample_id, 0]))


def _chi_rng(master_seed, sample_id, eta_index):
    return np.random.default_rng(
        np.random.SeedSequence([master_seed, sample_id, 1 + eta_index])
    )


def _bootstrap_rng(master_seed, eta_index):
    return np.random.default_rng(
        np.random.SeedSequence([master_seed, _BOOTSTRAP_TAG + eta_index])
    )


def _record_seed(master_seed, sample_id):
    """First generated word of the perturbation stream, for external replay."""
    return int(
        np.random.SeedSequence([master_seed, sample_id, 0]).generate_state(1)[0]
    )


# base models and the latest perturbation are cached per process: the same
# sample's draw is reused across consecutive eta values
_BASE_CACHE = {}
_PERT_CACHE = {"key": None, "value": None}


def _base(config):
    key = (config.preset, tuple(sorted(config.params.items())))
    if key not in _BASE_CACHE:
        model = build_preset(config.preset, **config.params)
        _BASE_CACHE[key] = (model, model.superoperator())
    return _BASE_CACHE[key]


def _perturbation(config, sample_id):
    key = (config.master_seed, sample_id, config.preset)
    if _PERT_CACHE["key"] != key:
        model, _ = _base(config)
        rng = perturbation_rng(config.master_seed, sample_id)
        _PERT_CACHE["key"] = key
        _PERT_CACHE["value"] = random_liouvillian(model.dim, rng)
    return _PERT_CACHE["value"]


def chi_kind_for(model):
    """Lock statistic written to chi.csv: chi needs three or more sites."""
    return "chi" if len(model.spins) >= 3 else "chi2"


def compute_record(config, eta_index, sample_id):
    """One (sample, eta) cell: returns (record row, chi values, payload)."""
    model, base = _base(config)
    eta = config.etas[eta_index]
    pert = _perturbation(config, sample_id)
    seed_word = _record_seed(config.master_seed, sample_id)
    row = {
        "sample_id": sample_id,
        "eta": repr(float(eta)),
        "seed": seed_word,
        "s_max": "",
        "multiplicity": "",
        "reason_code": REASON_OK,
        "argmax_phi1p": "",
        "argmax_phi2p": "",
    }
    payload = {
        "sample_id": sample_id,
        "eta": float(eta),
        "eta_index": eta_index,
        "seed": seed_word,
        "label": config.label,
    }
    result = steady_state(base + eta * pert)
    row["multiplicity"] = result.multiplicity
    payload["multiplicity"] = result.multiplicity
    if result.multiplicity != 1:
        row["reason_code"] = REASON_DEGENERATE
        payload["reason_code"] = REASON_DEGENERATE
        return row, np.empty(0), payload
    poly = phase_distribution(result.rho, model.spins).reduce_over_global_phase()
    measure = sync_measure(poly, config.grid_n)
    row["s_max"] = repr(float(measure.s_max))
    if measure.degenerate:
        row["reason_code"] = REASON_FLAT
    else:
        row["argmax_phi1p"] = repr(float(measure.argmax[0][0]))
        if poly.n_axes >= 2:
            row["argmax_phi2p"] = repr(float(measure.argmax[0][1]))
    grid = poly.grid(config.grid_n)
    rng = _chi_rng(config.master_seed, sample_id, eta_index)
    samples = sample_phases(grid, config.chi_samples_per_record, rng, config.threshold)
    if poly.n_axes >= 2:
        chi_vals = chi_from_relative(samples)
    else:
        chi_vals = chi2(samples[:, 0])
    payload.update(
        {
            "reason_code": row["reason_code"],
            "s_max": float(measure.s_max),
            "argmax": [list(map(float, p)) for p in measure.argmax],
            "steady_residual": result.residual,
            "hermiticity_defect": result.hermiticity_defect,
            "min_eigenvalue": result.min_eigenvalue,
            "n_chi_samples": int(len(chi_vals)),
        }
    )
    return row, np.asarray(chi_vals), payload


def _compute_star(args):
    return compute_record(*args)


class _SweepWriter:
    """Append-only writers with crash-safe resume.

    records.csv is the commit log: chi and jsonl rows are written first, so
    on resume any rows belonging to (sample, eta) keys that never reached
    records.csv are dropped before continuing.
    """

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.records = os.path.join(out_dir, "records.csv")
        self.chi = os.path.join(out_dir, "chi.csv")
        self.jsonl = os.path.join(out_dir, "records.jsonl")

    @staticmethod
    def _rewrite(path, header, rows):
        tmp = path + ".tmp"
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        os.replace(tmp, path)

    def load_completed(self):
        """Keys of fully committed records; prunes orphans from side files."""
        completed = []
        if os.path.exists(self.records):
            with open(self.records, newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader, None)
                if header is not None and list(header) != list(RECORD_FIELDS):
                    raise ConfigError(f"{self.records} has an unexpected header")
                rows = []
                for row in reader:
                    if len(row) != len(RECORD_FIELDS):
                        continue  # partial trailing line from an interruption
                    rows.append(row)
                    completed.append((int(row[0]), row[1]))
            self._rewrite(self.records, RECORD_FIELDS, rows)
        done = set(completed)
        if os.path.exists(self.chi):
            with open(self.chi, newline="") as fh:
                reader = csv.reader(fh)
                next(reader, None)
                rows = [
                    row
                    for row in reader
                    if len(row) == len(CHI_FIELDS) and (int(row[0]), row[1]) in done
                ]
            self._rewrite(self.chi, CHI_FIELDS, rows)
        if os.path.exists(self.jsonl):
            kept = []
            with open(self.jsonl) as fh:
                for line in fh:
                    try:
                        obj = json.loads(line)
                    except json.JSONDecodeError:
                        continue
                    if (obj["sample_id"], repr(float(obj["eta"]))) in done:
                        kept.append(line)
            tmp = self.jsonl + ".tmp"
            with open(tmp, "w") as fh:
                fh.writelines(kept)
            os.replace(tmp, self.jsonl)
        return done

    def _ensure_headers(self):
        for path, fields in [(self.records, RECORD_FIELDS), (self.chi, CHI_FIELDS)]:
            if not os.path.exists(path):
                with open(path, "w", newline="") as fh:
                    csv.writer(fh, lineterminator="\n").writerow(fields)
        if not os.path.exists(self.jsonl):
            open(self.jsonl, "w").close()

    def append(self, row, chi_vals, payload):
        self._ensure_headers()
        with open(self.chi, "a", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            for v in chi_vals:
                writer.writerow([row["sample_id"], row["eta"], repr(float(v))])
            fh.flush()
        with open(self.jsonl, "a") as fh:
            fh.write(json.dumps(payload, sort_keys=True) + "\n")
            fh.flush()
        with open(self.records, "a", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow([row[k] for k in RECORD_FIELDS])
            fh.flush()


@dataclass(frozen=True)
class SweepSummary:
    out_dir: str
    n_computed: int
    n_skipped: int
    aggregate_rows: list
    manifest_path: str


def write_run_manifest(config, out_dir, chi_kind):
    manifest = {
        "tool": "spinsync",
        "version": __version__,
        "written_at": datetime.now(timezone.utc).isoformat(),
        "config": asdict(config),
        "chi_kind": chi_kind,
        "files": {
            "records": "records.csv",
            "chi": "chi.csv",
            "jsonl": "records.jsonl",
            "aggregate": "aggregate.csv",
            "histograms": [
                f"chi_hist_eta{k}.csv" for k in range(len(config.etas))
            ],
        },
    }
    path = os.path.join(out_dir, MANIFEST_NAME)
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
    return path


def config_from_manifest(out_dir):
    path = os.path.join(out_dir, MANIFEST_NAME)
    if not os.path.exists(path):
        raise ConfigError(f"no {MANIFEST_NAME} in {out_dir}")
    with open(path) as fh:
        raw = json.load(fh)["config"]
    raw["etas"] = tuple(raw["etas"])
    return SweepConfig(**raw)


def run_sweep(config, out_dir, workers=None, progress=None):
    """Execute (or resume) a sweep and aggregate its outputs.

    Worker count comes from the SPINSYNC_WORKERS environment variable when
    not given; output bytes do not depend on it.
    """
    if workers is None:
        workers = int(os.environ.get("SPINSYNC_WORKERS", "1"))
    if workers < 1:
        raise ConfigError("workers must be positive")
    os.makedirs(out_dir, exist_ok=True)
    model, _ = _base(config)
    chi_kind = chi_kind_for(model)
    writer = _SweepWriter(out_dir)
    done = writer.load_completed()
    tasks = [
        (sample_id, eta_index)
        for sample_id in range(config.samples_per_eta)
        for eta_index in range(len(config.etas))
        if (sample_id, repr(float(config.etas[eta_index]))) not in done
    ]
    n_computed = 0
    if workers > 1 and tasks:
        args = [(config, eta_index, sample_id) for sample_id, eta_index in tasks]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for out in pool.map(_compute_star, args, chunksize=1):
                writer.append(*out)
                n_computed += 1
                if progress:
                    progress(n_computed, len(tasks))
    else:
        for sample_id, eta_index in tasks:
            writer.append(*compute_record(config, eta_index, sample_id))
            n_computed += 1
            if progress:
                progress(n_computed, len(tasks))
    manifest_path = write_run_manifest(config, out_dir, chi_kind)
    rows = aggregate_run(out_dir, config)
    return SweepSummary(
        out_dir=out_dir,
        n_computed=n_computed,
        n_skipped=len(done),
        aggregate_rows=rows,
        manifest_path=manifest_path,
    )


def _read_records(out_dir):
    path = os.path.join(out_dir, "records.csv")
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _read_chi_clusters(out_dir):
    """chi values grouped by (sample_id, eta string)."""
    path = os.path.join(out_dir, "chi.csv")
    clusters = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (int(row["sample_id"]), row["eta"])
            clusters.setdefault(key, []).append(float(row["chi"]))
    return {k: np.array(v) for k, v in clusters.items()}


def aggregate_run(out_dir, config=None):
    """Recompute aggregate.csv and the histograms from the files on disk."""
    if config is None:
        config = config_from_manifest(out_dir)
    records = _read_records(out_dir)
    clusters = _read_chi_clusters(out_dir)
    rows = []
    for eta_index, eta in enumerate(config.etas):
        eta_key = repr(float(eta))
        recs = [r for r in records if r["eta"] == eta_key]
        kept = [r for r in recs if r["reason_code"] != REASON_DEGENERATE]
        excluded = len(recs) - len(kept)
        out = {
            "eta": eta_key,
            "n_records": len(kept),
            "n_excluded": excluded,
        }
        s_vals = np.array([float(r["s_max"]) for r in kept if r["s_max"] != ""])
        if s_vals.size:
            out["mean_s_max"] = repr(float(s_vals.mean()))
            sem = s_vals.std(ddof=1) / np.sqrt(s_vals.size) if s_vals.size > 1 else 0.0
            out["sem_s_max"] = repr(float(sem))
        else:
            out["mean_s_max"] = out["sem_s_max"] = repr(nan)
        cluster_list = [
            clusters[(int(r["sample_id"]), eta_key)]
            for r in kept
            if (int(r["sample_id"]), eta_key) in clusters
        ]
        pooled = (
            np.concatenate(cluster_list) if cluster_list else np.empty(0)
        )
        if pooled.size:
            p1, p2, p3 = interval_probabilities(pooled)
            draws = cluster_bootstrap(
                cluster_list,
                lambda v: np.array(interval_probabilities(v)),
                config.bootstrap_resamples,
                _bootstrap_rng(config.master_seed, eta_index),
            )
            sig = draws.std(axis=0)
            ratio = family_ratio(p1, p2)
            ratio_draws = [family_ratio(a, b) for a, b, _ in draws]
            _, _, ci_lo, ci_hi = bootstrap_summary(ratio_draws)
            out.update(
                p1=repr(p1),
                p2=repr(p2),
                p3=repr(p3),
                p1_sigma=repr(float(sig[0])),
                p2_sigma=repr(float(sig[1])),
                p3_sigma=repr(float(sig[2])),
                ratio=repr(float(ratio)),
                ratio_ci_lo=repr(float(ci_lo)),
                ratio_ci_hi=repr(float(ci_hi)),
            )
        else:
            for key in AGGREGATE_FIELDS[5:]:
                out[key] = repr(nan)
        rows.append(out)
        hist_path = os.path.join(out_dir, f"chi_hist_eta{eta_index}.csv")
        if pooled.size:
            export_histogram_csv(pooled, hist_path)
        elif os.path.exists(hist_path):
            os.remove(hist_path)
    agg_path = os.path.join(out_dir, "aggregate.csv")
    tmp = agg_path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=AGGREGATE_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    os.replace(tmp, agg_path)
    return rows
