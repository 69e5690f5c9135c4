"""End-to-end experiment orchestration from a TOML config.

Three experiments are provided: the feature-set ablation, the semantic/
syntactic group substitution with significance tests, and the PCA variance
sweep. Reports are written as deterministic JSON (full resolved config and
seed embedded, no timestamps) plus a human-readable Markdown or CSV view,
so re-running a config reproduces the files byte for byte.
"""

from __future__ import annotations

import dataclasses
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .corpus import PROFILES, load_manifest, segment
from .dataset import MODES, PCA_PERCENTAGES, assemble
from .embeddings import align, load_embeddings
from .errors import ConfigError
from .evaluation import (
    cross_validate,
    mann_whitney_u,
    stratified_kfold,
    variance_equality,
)
from .features import (
    GROUPS,
    bundled_lexicon_path,
    default_registry,
    extract_corpus,
    load_lexicon,
    tag_pos,
)
from .models import ALGORITHMS, ModelSpec

EXPECTED_EMBEDDING_DIM = 768

MODE_LABELS = {
    "ling_only": "Linguistic features",
    "emb_only": "Embeddings",
    "combined": "Combined (ling + emb)",
}

PAIRINGS = ("per_fold", "algorithm_means")


@dataclass(frozen=True)
class ExperimentConfig:
    corpus: str
    embeddings: str
    profile: str = "english"
    algorithms: tuple[str, ...] = ALGORITHMS
    modes: tuple[str, ...] = MODES
    k: int = 5
    seed: int = 0
    pca_percentages: tuple[int, ...] = PCA_PERCENTAGES
    removed_groups: tuple[str, ...] = ("SEM", "SYN")
    substitution_pairing: str = "per_fold"
    lexicon: str | None = None
    out_dir: str = "reports"

    def validate(self) -> None:
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}")
        if not self.algorithms or not set(self.algorithms) <= set(ALGORITHMS):
            raise ConfigError(f"algorithms must be a non-empty subset of {ALGORITHMS}")
        if not self.modes or not set(self.modes) <= set(MODES):
            raise ConfigError(f"modes must be a non-empty subset of {MODES}")
        if self.k < 2:
            raise ConfigError("k must be at least 2")
        if not self.pca_percentages or not set(self.pca_percentages) <= set(
            PCA_PERCENTAGES
        ):
            raise ConfigError(
                f"pca_percentages must be a non-empty subset of {PCA_PERCENTAGES}"
            )
        if not set(self.removed_groups) <= set(GROUPS):
            raise ConfigError(f"removed_groups must be a subset of {GROUPS}")
        if self.substitution_pairing not in PAIRINGS:
            raise ConfigError(f"substitution_pairing must be one of {PAIRINGS}")
        for label, path in (("corpus", self.corpus), ("embeddings", self.embeddings)):
            if not Path(path).is_file():
                raise ConfigError(f"{label} path does not exist: {path}")
        if self.lexicon is not None and not Path(self.lexicon).is_file():
            raise ConfigError(f"lexicon path does not exist: {self.lexicon}")

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key in ("algorithms", "modes", "pca_percentages", "removed_groups"):
            out[key] = list(out[key])
        return out


_CONFIG_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)}
_PATH_KEYS = ("corpus", "embeddings", "lexicon", "out_dir")


def load_config(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    """Read a TOML config; relative paths resolve against the config directory."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("corpus", "embeddings"):
        if key not in raw:
            raise ConfigError(f"config is missing required key {key!r}")
    base = path.parent.resolve()
    for key in _PATH_KEYS:
        if key in raw and raw[key] is not None:
            p = Path(raw[key])
            raw[key] = str(p if p.is_absolute() else (base / p).resolve())
    for key in ("algorithms", "modes", "pca_percentages", "removed_groups"):
        if key in raw:
            raw[key] = tuple(raw[key])
    try:
        config = ExperimentConfig(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    config.validate()
    return config


def _max_workers(n_jobs: int) -> int:
    env = os.environ.get("READABILITY_LAB_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ConfigError(f"READABILITY_LAB_THREADS must be an integer: {env!r}") from exc
    else:
        cap = min(4, os.cpu_count() or 1)
    return max(1, min(cap, n_jobs))


def _run_cells(cells, runner):
    """Run independent experiment cells on a bounded pool, joined in order."""
    workers = _max_workers(len(cells))
    if workers == 1:
        return [runner(cell) for cell in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(runner, cells))


@dataclass
class PreparedExperiment:
    """Corpus-level inputs shared by every experiment cell."""

    corpus: object
    registry: object
    ling: np.ndarray
    emb: np.ndarray
    y: np.ndarray
    plan: object
    notes: list = field(default_factory=list)


def prepare(config: ExperimentConfig) -> PreparedExperiment:
    config.validate()
    corpus = load_manifest(config.corpus)
    table = load_embeddings(config.embeddings)
    notes = []
    if table.dim != EXPECTED_EMBEDDING_DIM:
        note = (
            f"embedding dim is {table.dim}, not the default-expected "
            f"{EXPECTED_EMBEDDING_DIM}"
        )
        notes.append(note)
        warnings.warn(note, stacklevel=2)
    notes.append(f"embedding granularity: {table.granularity}")
    emb = align(table, corpus)

    registry = default_registry(config.profile)
    lexicon_path = config.lexicon or str(bundled_lexicon_path(config.profile))
    lexicon = load_lexicon(lexicon_path)
    segmented = [segment(doc, config.profile) for doc in corpus.documents]
    annotations = [tag_pos(seg, lexicon) for seg in segmented]
    ling = extract_corpus(segmented, registry, annotations)
    y = np.asarray(corpus.labels(), dtype=int)
    plan = stratified_kfold(y, config.k, config.seed)
    return PreparedExperiment(
        corpus=corpus, registry=registry, ling=ling, emb=emb, y=y, plan=plan, notes=notes
    )


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )


def _fmt(score: float | None) -> str:
    return "n/a" if score is None else f"{score:.3f}"


def _out_dir(config: ExperimentConfig, out_dir: str | Path | None) -> Path:
    out = Path(out_dir) if out_dir is not None else Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_ablation(config: ExperimentConfig, out_dir: str | Path | None = None) -> dict:
    """Evaluate every algorithm under each feature mode; write JSON + Markdown."""
    prep = prepare(config)
    datasets = {
        mode: assemble(
            prep.ling, prep.emb, prep.y, mode=mode, ling_names=prep.registry.ids()
        )
        for mode in config.modes
    }
    cells = [(algo, mode) for algo in config.algorithms for mode in config.modes]

    def run_cell(cell):
        algo, mode = cell
        spec = ModelSpec(algorithm=algo, seed=config.seed)
        report = cross_validate(datasets[mode], spec, prep.plan)
        report.setup["mode"] = mode
        return report

    reports = _run_cells(cells, run_cell)
    results: dict = {algo: {} for algo in config.algorithms}
    for (algo, mode), report in zip(cells, reports):
        results[algo][mode] = report.to_dict()
    best = {}
    for algo in config.algorithms:
        scored = [
            (mode, results[algo][mode]["mean_f1"])
            for mode in config.modes
            if results[algo][mode]["mean_f1"] is not None
        ]
        best[algo] = max(scored, key=lambda t: t[1])[0] if scored else None

    payload = {
        "experiment": "ablation",
        "config": config.to_dict(),
        "class_names": list(prep.corpus.class_names),
        "notes": prep.notes,
        "results": results,
        "best_mode_per_algorithm": best,
    }
    out = _out_dir(config, out_dir)
    json_path = out / "ablation.json"
    _write_json(json_path, payload)

    lines = ["# Feature-set ablation", ""]
    corpus_name = Path(config.corpus).stem
    for algo in config.algorithms:
        lines += [f"## {algo}", "", f"| Method | {corpus_name} |", "| --- | --- |"]
        for mode in config.modes:
            cell = _fmt(results[algo][mode]["mean_f1"])
            label = MODE_LABELS[mode]
            if mode == best[algo]:
                label, cell = f"**{label}**", f"**{cell}**"
            lines.append(f"| {label} | {cell} |")
        lines.append("")
    md_path = out / "ablation.md"
    md_path.write_text("\n".join(lines), encoding="utf-8")
    return {"json": json_path, "markdown": md_path}


def _collect_scores(reports: dict, pairing: str) -> list[float]:
    if pairing == "per_fold":
        return [
            s for report in reports.values() for s in report["fold_scores"] if s is not None
        ]
    return [
        report["mean_f1"] for report in reports.values() if report["mean_f1"] is not None
    ]


def run_substitution(config: ExperimentConfig, out_dir: str | Path | None = None) -> dict:
    """Compare full combined features against combined features with the
    configured groups removed, with rank and variance significance tests."""
    prep = prepare(config)
    full_registry = prep.registry
    reduced_registry = full_registry.remove_groups(config.removed_groups)
    if len(reduced_registry) == 0:
        raise ConfigError("removed groups leave an empty linguistic registry")
    if len(reduced_registry) == len(full_registry):
        raise ConfigError(
            f"no registry features belong to the removed groups {config.removed_groups}"
        )
    retained_idx = [
        i for i, spec in enumerate(full_registry) if spec.group not in set(config.removed_groups)
    ]
    reduced_ling = prep.ling[:, retained_idx]

    full_ds = assemble(
        prep.ling, prep.emb, prep.y, mode="combined", ling_names=full_registry.ids()
    )
    reduced_ds = assemble(
        reduced_ling, prep.emb, prep.y, mode="combined", ling_names=reduced_registry.ids()
    )

    cells = [(algo, arm) for algo in config.algorithms for arm in ("full", "reduced")]

    def run_cell(cell):
        algo, arm = cell
        spec = ModelSpec(algorithm=algo, seed=config.seed)
        ds = full_ds if arm == "full" else reduced_ds
        report = cross_validate(ds, spec, prep.plan)
        report.setup["arm"] = arm
        return report

    reports = _run_cells(cells, run_cell)
    full_reports: dict = {}
    reduced_reports: dict = {}
    for (algo, arm), report in zip(cells, reports):
        (full_reports if arm == "full" else reduced_reports)[algo] = report.to_dict()

    full_scores = _collect_scores(full_reports, config.substitution_pairing)
    reduced_scores = _collect_scores(reduced_reports, config.substitution_pairing)
    mwu = mann_whitney_u(full_scores, reduced_scores)
    var_eq = variance_equality(full_scores, reduced_scores)

    payload = {
        "experiment": "substitution",
        "config": config.to_dict(),
        "class_names": list(prep.corpus.class_names),
        "notes": prep.notes,
        "removed_groups": sorted(config.removed_groups),
        "removed_feature_ids": [
            s.id for s in full_registry if s.group in set(config.removed_groups)
        ],
        "full": full_reports,
        "reduced": reduced_reports,
        "score_pairing": config.substitution_pairing,
        "difference_test": {
            "statistic": mwu.statistic,
            "p_value": mwu.p_value,
            "method": mwu.method,
            "sample_sizes": list(mwu.sample_sizes),
        },
        "variance_test": {
            "statistic": var_eq.statistic,
            "p_value": var_eq.p_value,
            "method": var_eq.method,
            "sample_sizes": list(var_eq.sample_sizes),
        },
    }
    out = _out_dir(config, out_dir)
    json_path = out / "substitution.json"
    _write_json(json_path, payload)

    corpus_name = Path(config.corpus).stem
    best_full = max(
        (r["mean_f1"] for r in full_reports.values() if r["mean_f1"] is not None),
        default=None,
    )
    lines = [
        "# Semantic/syntactic substitution",
        "",
        f"Removed groups: {', '.join(sorted(config.removed_groups))}"
        f" ({len(full_registry) - len(reduced_registry)} features)",
        "",
        f"| Model (reduced features) | {corpus_name} |",
        "| --- | --- |",
    ]
    for algo in config.algorithms:
        lines.append(f"| {algo} | {_fmt(reduced_reports[algo]['mean_f1'])} |")
    lines += [
        f"| Full model (combined) | {_fmt(best_full)} |",
        "",
        f"Score difference (Mann-Whitney U, two-tailed, {config.substitution_pairing}):"
        f" U = {mwu.statistic:g}, p = {mwu.p_value:.3f} [{mwu.method}]",
        "",
        f"Variance equality ({var_eq.method}): statistic = {var_eq.statistic:.3g},"
        f" p = {var_eq.p_value:.3f}",
        "",
    ]
    md_path = out / "substitution.md"
    md_path.write_text("\n".join(lines), encoding="utf-8")
    return {"json": json_path, "markdown": md_path}


def run_pca_sweep(config: ExperimentConfig, out_dir: str | Path | None = None) -> dict:
    """Cross-validate the combined features under each PCA variance target.

    A target of 100 means no decomposition at all (the full combined feature
    set), so its reported retained dimension is the full column count.
    """
    prep = prepare(config)
    dataset = assemble(
        prep.ling, prep.emb, prep.y, mode="combined", ling_names=prep.registry.ids()
    )
    pcts = sorted(config.pca_percentages)
    cells = [(algo, pct) for algo in config.algorithms for pct in pcts]

    def run_cell(cell):
        algo, pct = cell
        spec = ModelSpec(algorithm=algo, seed=config.seed)
        report = cross_validate(
            dataset, spec, prep.plan, pca_pct=None if pct == 100 else pct
        )
        report.setup["variance_pct"] = pct
        return report

    reports = _run_cells(cells, run_cell)
    rows = []
    results: dict = {algo: {} for algo in config.algorithms}
    for (algo, pct), report in zip(cells, reports):
        rep = report.to_dict()
        results[algo][str(pct)] = rep
        if pct == 100:
            retained = float(dataset.n_features)
        else:
            dims = [
                f["retained_dims"]
                for f in rep["folds"]
                if not f.get("skipped") and f.get("retained_dims") is not None
            ]
            retained = float(np.mean(dims)) if dims else float("nan")
        rows.append((algo, pct, rep["mean_f1"], retained))

    payload = {
        "experiment": "pca_sweep",
        "config": config.to_dict(),
        "class_names": list(prep.corpus.class_names),
        "notes": prep.notes + ["PCA is fitted per training fold (leakage-free)"],
        "results": results,
    }
    out = _out_dir(config, out_dir)
    json_path = out / "pca_sweep.json"
    _write_json(json_path, payload)

    csv_lines = ["algorithm,variance_pct,mean_weighted_f1,retained_dims"]
    for algo, pct, mean_f1, retained in rows:
        f1_txt = "" if mean_f1 is None else repr(float(mean_f1))
        csv_lines.append(f"{algo},{pct},{f1_txt},{retained:g}")
    csv_path = out / "pca_sweep.csv"
    csv_path.write_text("\n".join(csv_lines) + "\n", encoding="utf-8")
    return {"json": json_path, "csv": csv_path}
