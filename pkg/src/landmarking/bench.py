"""Repeated-trial regression benchmark of landmark selectors.

Each trial draws a fresh dataset, builds one graph and alignment matrix that
every selector shares, then for every ``(method, L)`` cell times the
selector, runs the learner, and records the relative error and the
Gershgorin-motivated error bound of the selected set.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from .alignment import build_alignment, regularize_alignment
from .data import NoiseSpec, add_noise, generate_synthetic, load_dataset, pca
from .exceptions import InvalidArgumentError
from .graph import knn_graph
from .landmark import SELECTORS, select_landmarks
from .spectral import error_bound
from .ssml import ls_learn, spec_learn

log = logging.getLogger(__name__)

Z_95 = 1.96


def relative_error(predicted, truth) -> float:
    """``||predicted - truth||_F / ||truth||_F`` in percent."""
    p = np.asarray(predicted, dtype=float)
    t = np.asarray(truth, dtype=float)
    if p.shape != t.shape:
        raise InvalidArgumentError(f"shape mismatch {p.shape} vs {t.shape}")
    norm = np.linalg.norm(t)
    if norm == 0:
        raise InvalidArgumentError("relative error undefined for an all-zero truth")
    return float(np.linalg.norm(p - t) / norm * 100.0)


def confidence_interval(samples):
    """Mean and Gaussian 95% half-width ``1.96 * std(ddof=1) / sqrt(n)``."""
    x = np.asarray(list(samples), dtype=float)
    if x.size == 0:
        raise InvalidArgumentError("confidence interval of an empty sample")
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(Z_95 * x.std(ddof=1) / math.sqrt(x.size))


@dataclass
class ExperimentConfig:
    dataset: dict = field(default_factory=lambda: {"kind": "swiss_roll", "n": 500})
    k: int = 30
    alignment: dict = field(default_factory=lambda: {"method": "LE"})
    methods: List[str] = field(default_factory=lambda: ["gcls", "random"])
    landmark_counts: List[int] = field(default_factory=lambda: [100, 150, 200])
    trials: int = 20
    noise: Optional[dict] = None
    learner: dict = field(default_factory=lambda: {"kind": "LS", "gamma": 0.0})
    master_seed: int = 0
    tau: Optional[float] = None
    exact_eval: bool = False
    pca_dim: Optional[int] = None
    timing: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidArgumentError("trials must be >= 1")
        if not self.methods:
            raise InvalidArgumentError("methods must be nonempty")
        for m in self.methods:
            if m.lower() not in SELECTORS + ("nystrom_column",):
                raise InvalidArgumentError(f"unknown selector {m!r}")
        if not self.landmark_counts or min(self.landmark_counts) < 1:
            raise InvalidArgumentError("landmark_counts must be positive")
        n = self.dataset.get("n")
        if n is not None and max(self.landmark_counts) >= n:
            raise InvalidArgumentError(f"every L must be < N={n}")
        if self.learner.get("kind", "LS").upper() not in ("LS", "SPEC"):
            raise InvalidArgumentError(f"unknown learner {self.learner.get('kind')!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise InvalidArgumentError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ReportRow:
    method: str
    L: int
    errors: List[Optional[float]]
    runtimes: List[Optional[float]]
    bounds: List[Optional[float]]
    messages: List[Optional[str]]
    mean_error: Optional[float] = None
    ci: Optional[float] = None
    mean_runtime: Optional[float] = None
    mean_bound: Optional[float] = None
    status: str = "ok"

    def aggregate(self) -> None:
        ok = [e for e in self.errors if e is not None]
        failed = len(self.errors) - len(ok)
        self.status = "ok" if failed == 0 else ("error" if not ok else "partial")
        if ok:
            self.mean_error, self.ci = confidence_interval(ok)
        runtimes = [t for t in self.runtimes if t is not None]
        self.mean_runtime = float(np.mean(runtimes)) if runtimes else None
        bounds = [b for b in self.bounds if b is not None]
        self.mean_bound = float(np.mean(bounds)) if bounds else None


@dataclass
class ExperimentReport:
    config: dict
    rows: List[ReportRow]

    def row(self, method: str, L: int) -> ReportRow:
        for r in self.rows:
            if r.method == method and r.L == L:
                return r
        raise KeyError((method, L))

    def to_dict(self) -> dict:
        return {"config": self.config, "rows": [_encode_row(r) for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(d["config"], [_decode_row(r) for r in d["rows"]])


def _enc(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def _dec(v):
    return float(v) if isinstance(v, str) else v


_FLOAT_FIELDS = ("mean_error", "ci", "mean_runtime", "mean_bound")
_LIST_FIELDS = ("errors", "runtimes", "bounds")


def _encode_row(r: ReportRow) -> dict:
    d = asdict(r)
    for k in _LIST_FIELDS:
        d[k] = [_enc(v) for v in d[k]]
    for k in _FLOAT_FIELDS:
        d[k] = _enc(d[k])
    return d


def _decode_row(d: dict) -> ReportRow:
    d = dict(d)
    for k in _LIST_FIELDS:
        d[k] = [_dec(v) for v in d[k]]
    for k in _FLOAT_FIELDS:
        d[k] = _dec(d[k])
    return ReportRow(**d)


def trial_seed(master_seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([master_seed, trial]).generate_state(1)[0])


def _trial_dataset(cfg: ExperimentConfig, seed: int):
    spec = dict(cfg.dataset)
    if "path" in spec:
        ds = load_dataset(spec["path"], has_labels=True, label_dim=spec.get("label_dim"))
        n = spec.get("n")
        if n is not None and n < ds.n_samples:
            pick = np.sort(np.random.default_rng(seed).choice(ds.n_samples, n, replace=False))
            ds = type(ds)(ds.samples[:, pick], ds.labels[:, pick], ds.name, seed)
    else:
        ds = generate_synthetic(spec.get("kind", "swiss_roll"), spec.get("n", 500), seed,
                                spec.get("ambient_noise", 0.0))
    if cfg.noise and cfg.noise.get("variance", 0) > 0:
        ds = add_noise(ds, NoiseSpec(cfg.noise["variance"], seed + 1))
    if cfg.pca_dim:
        ds = pca(ds, cfg.pca_dim)
    return ds


def _alignment(ds, g, spec: dict):
    return build_alignment(ds, g, spec.get("method", "LE"), d=spec.get("d"),
                           lle_reg=spec.get("lle_reg", 1e-3),
                           le_weight=spec.get("le_weight", "distance"))


def run_trial(cfg: ExperimentConfig, t: int) -> dict:
    """One trial: ``{(method, L): (error, runtime, bound, message)}``."""
    seed = trial_seed(cfg.master_seed, t)
    out = {}
    try:
        ds = _trial_dataset(cfg, seed)
        g = knn_graph(ds, cfg.k)
        a = _alignment(ds, g, cfg.alignment)
        reg = regularize_alignment(a, cfg.tau)
        learner = cfg.learner.get("kind", "LS").upper()
        learn_a = _alignment(ds, g, cfg.learner["alignment"]) if "alignment" in cfg.learner else a
    except Exception as exc:  # whole trial failed: every cell records it
        msg = f"{type(exc).__name__}: {exc}"
        return {(m, L): (None, None, None, msg) for m in cfg.methods for L in cfg.landmark_counts}

    for mi, method in enumerate(cfg.methods):
        for L in cfg.landmark_counts:
            sel_seed = trial_seed(seed, mi)
            try:
                start = time.perf_counter()
                sel = select_landmarks(method, L, sel_seed, reg=reg, alignment=a, dataset=ds,
                                       graph=g, exact_eval=cfg.exact_eval)
                runtime = time.perf_counter() - start
                lm = np.asarray(sel.landmarks)
                z_l = ds.labels[:, lm]
                if learner == "LS":
                    res = ls_learn(learn_a, z_l, lm, cfg.learner.get("gamma", 0.0))
                else:
                    res = spec_learn(learn_a, z_l, lm, cfg.learner.get("gamma", 1.0),
                                     cfg.learner.get("d"))
                err = relative_error(res.predicted_values, ds.labels[:, res.unlabeled_indices])
                bound = error_bound(reg.matrix, lm)
                out[(method, L)] = (err, round(runtime, 6) if cfg.timing else None, bound, None)
            except Exception as exc:
                log.warning("trial %d, %s, L=%d failed: %s", t, method, L, exc)
                out[(method, L)] = (None, None, None, f"{type(exc).__name__}: {exc}")
    return out


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    """Run every trial and aggregate per ``(method, L)`` row in config order."""
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trials = list(pool.map(run_trial, [cfg] * cfg.trials, range(cfg.trials)))
    else:
        trials = [run_trial(cfg, t) for t in range(cfg.trials)]
    rows = []
    for method in cfg.methods:
        for L in cfg.landmark_counts:
            cells = [tr[(method, L)] for tr in trials]
            row = ReportRow(method, int(L), [c[0] for c in cells], [c[1] for c in cells],
                            [c[2] for c in cells], [c[3] for c in cells])
            row.aggregate()
            rows.append(row)
    return ExperimentReport(cfg.to_dict(), rows)


CSV_COLUMNS = ("method", "L", "mean_error", "ci", "mean_runtime", "mean_bound", "status")


def report_json(report: ExperimentReport) -> str:
    return json.dumps(report.to_dict(), indent=1, sort_keys=True)


def emit_report(report: ExperimentReport, path: str | os.PathLike, format: str = "json") -> None:
    """Write the report as JSON (full) or CSV (one aggregate row per ``(method, L)``)."""
    if format == "json":
        with open(path, "w") as fh:
            fh.write(report_json(report))
            fh.write("\n")
    elif format == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in report.rows:
                enc = _encode_row(r)
                w.writerow(["" if enc[c] is None else enc[c] for c in CSV_COLUMNS])
    else:
        raise InvalidArgumentError(f"unknown report format {format!r}")


def load_report(path: str | os.PathLike) -> ExperimentReport:
    with open(path) as fh:
        return ExperimentReport.from_dict(json.load(fh))
