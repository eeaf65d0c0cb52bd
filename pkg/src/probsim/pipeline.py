"""End-to-end experiment: sample, evaluate, assemble, embed, classify, render.

Every random decision derives from the config's root seed through keyed
streams, so reruns with the same config produce byte-identical artifacts
regardless of worker count.  Accuracy grids are cached on disk keyed by
(grid-config digest, instance id); the downstream stages can be re-run
without re-fitting the 3600 models.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import multiprocessing
import os
import time

import numpy as np

from .config import BUILTIN_SUITE, PipelineConfig
from .embedding import (
    Embedding2D,
    mds_embed,
    pairwise_distances,
    read_embedding_csv,
    tsne_best,
    write_embedding_csv,
    write_embedding_sidecar,
)
from .kernels import TREE_BACKEND
from .metaeval import confusion, learning_curve_detail, write_confusion_csv, write_learning_curves_csv
from .metafeatures import AccuracyGrid, assemble_meta, evaluate_grid, read_meta_csv, write_meta_csv
from .problems import ClassificationProblem, DatasetInstance, load_problem_csv, subject_split
from .rng import RngStream
from .synthetic import builtin_suite

EMBED_METHODS = ("mds", "tsne")


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str, instance_id: str | None = None):
        self.stage = stage
        self.instance_id = instance_id
        where = f"{stage}" + (f" ({instance_id})" if instance_id else "")
        super().__init__(f"[{where}] {message}")


def load_problems(config: PipelineConfig) -> list[ClassificationProblem]:
    if config.problems == BUILTIN_SUITE:
        return builtin_suite(config.root_seed)
    return [load_problem_csv(p) for p in config.problems]


def make_instances(
    config: PipelineConfig, problems: list[ClassificationProblem]
) -> list[tuple[int, DatasetInstance]]:
    """(problem index, instance) in canonical row order: problem, then repeat."""
    root = RngStream(config.root_seed)
    out = []
    for p_idx, problem in enumerate(problems):
        for rep in range(config.repeats):
            stream = root.child("split", p_idx).child("repeat", rep)
            out.append((p_idx, subject_split(problem, config.train_fraction, stream, rep)))
    return out


def _grid_stream(config: PipelineConfig, p_idx: int, rep: int) -> RngStream:
    return RngStream(config.root_seed).child("grid", p_idx).child("repeat", rep)


def _cache_path(out_dir: str, digest: str, instance_id: str) -> str:
    return os.path.join(out_dir, "cache", "grids", f"{digest[:16]}-{instance_id}.json")


def _compute_grid(config: PipelineConfig, problems, p_idx: int, instance: DatasetInstance) -> AccuracyGrid:
    return evaluate_grid(
        instance,
        problems[p_idx],
        config.classifiers,
        sizes=config.train_sizes,
        test_size=config.test_size,
        rng=_grid_stream(config, p_idx, instance.repeat_index),
    )


_WORKER: dict = {}


def _worker_init(config_doc: dict):
    os.environ.setdefault("OMP_NUM_THREADS", "1")
    config = PipelineConfig.from_dict(config_doc)
    _WORKER["config"] = config
    _WORKER["problems"] = load_problems(config)


def _worker_eval(task):
    p_idx, instance = task
    grid = _compute_grid(_WORKER["config"], _WORKER["problems"], p_idx, instance)
    return instance.instance_id, grid.values.tolist()


def compute_grids(
    config: PipelineConfig,
    problems: list[ClassificationProblem],
    instances: list[tuple[int, DatasetInstance]],
) -> list[AccuracyGrid]:
    """Evaluate all instances, using the on-disk cache and a process pool."""
    digest = config.grid_digest()
    os.makedirs(os.path.join(config.out_dir, "cache", "grids"), exist_ok=True)
    grids: list[AccuracyGrid | None] = [None] * len(instances)
    pending = []
    for i, (p_idx, inst) in enumerate(instances):
        path = _cache_path(config.out_dir, digest, inst.instance_id)
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
            grids[i] = AccuracyGrid(
                values=np.array(doc["values"]), instance_id=inst.instance_id,
                problem_name=inst.problem_name,
            )
        else:
            pending.append(i)

    workers = config.workers or os.cpu_count() or 1
    if pending:
        results: dict[str, list] = {}
        if workers > 1:
            ctx = multiprocessing.get_context("spawn")
            with concurrent.futures.ProcessPoolExecutor(
                max_workers=workers, mp_context=ctx,
                initializer=_worker_init, initargs=(config.to_dict(),),
            ) as pool:
                futures = {pool.submit(_worker_eval, instances[i]): i for i in pending}
                for fut in concurrent.futures.as_completed(futures):
                    iid, values = fut.result()
                    results[iid] = values
        else:
            for i in pending:
                p_idx, inst = instances[i]
                grid = _compute_grid(config, problems, p_idx, inst)
                results[inst.instance_id] = grid.values.tolist()
        for i in pending:
            p_idx, inst = instances[i]
            values = results[inst.instance_id]
            grids[i] = AccuracyGrid(
                values=np.array(values), instance_id=inst.instance_id,
                problem_name=inst.problem_name,
            )
            with open(_cache_path(config.out_dir, digest, inst.instance_id), "w", encoding="utf-8") as fh:
                json.dump({"instance_id": inst.instance_id, "problem": inst.problem_name,
                           "values": values}, fh)
    return grids  # type: ignore[return-value]


def write_grids_csv(grids: list[AccuracyGrid], config: PipelineConfig, path) -> None:
    import csv

    with open(str(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance_id", "problem", "train_size", "classifier", "accuracy"])
        for grid in grids:
            for si, size in enumerate(config.train_sizes):
                for ci, spec in enumerate(config.classifiers):
                    writer.writerow(
                        [grid.instance_id, grid.problem_name, size, spec.kind,
                         format(grid.values[si, ci], ".17g")]
                    )


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


class RunManifest:
    """Config echo, per-artifact content digests and per-stage wall-clock."""

    def __init__(self, config: PipelineConfig):
        self.config = config.to_dict()
        self.artifacts: dict[str, str] = {}
        self.timings: dict[str, float] = {}
        self.tree_backend = TREE_BACKEND

    def add(self, out_dir: str, name: str) -> None:
        self.artifacts[name] = _sha256(os.path.join(out_dir, name))

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "artifacts": dict(sorted(self.artifacts.items())),
            "timings": {k: round(v, 3) for k, v in self.timings.items()},
            "tree_backend": self.tree_backend,
        }

    def save(self, path) -> None:
        with open(str(path), "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _confusion_choice(config: PipelineConfig) -> tuple[str, str]:
    variant = "N" if "N" in config.variants else config.variants[0]
    return variant, "tsne"


def run_pipeline(config: PipelineConfig) -> RunManifest:
    """Run everything; on error, partial (non-cache) artifacts are removed."""
    out_dir = config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest(config)
    written: list[str] = []
    root = RngStream(config.root_seed)

    def emit(name: str) -> str:
        written.append(name)
        return os.path.join(out_dir, name)

    stage = "sample"
    try:
        t0 = time.perf_counter()
        problems = load_problems(config)
        instances = make_instances(config, problems)
        manifest.timings["sample"] = time.perf_counter() - t0

        stage = "evaluate"
        t0 = time.perf_counter()
        grids = compute_grids(config, problems, instances)
        write_grids_csv(grids, config, emit("accuracy_grids.csv"))
        manifest.timings["evaluate"] = time.perf_counter() - t0

        stage = "meta"
        t0 = time.perf_counter()
        metas = {}
        for variant in config.variants:
            metas[variant] = assemble_meta(grids, variant)
            write_meta_csv(metas[variant], emit(f"meta_{variant}.csv"))
        manifest.timings["meta"] = time.perf_counter() - t0

        stage = "embed"
        t0 = time.perf_counter()
        embeddings: dict[tuple[str, str], Embedding2D] = {}
        for v_idx, variant in enumerate(config.variants):
            meta = metas[variant]
            embeddings[(variant, "mds")] = mds_embed(
                pairwise_distances(meta), variant, seed=config.root_seed
            )
            embeddings[(variant, "tsne")] = tsne_best(
                meta, config.tsne, root.child("tsne", v_idx)
            )
            for method in EMBED_METHODS:
                emb = embeddings[(variant, method)]
                write_embedding_csv(emb, meta, emit(f"embedding_{variant}_{method}.csv"))
                write_embedding_sidecar(
                    emb, config.tsne if method == "tsne" else None,
                    emit(f"embedding_{variant}_{method}.json"),
                )
        manifest.timings["embed"] = time.perf_counter() - t0

        stage = "classify"
        t0 = time.perf_counter()
        curve_rows = []
        conf_variant, conf_method = _confusion_choice(config)
        conf_matrix = None
        problem_names = [p.name for p in problems]
        for v_idx, variant in enumerate(config.variants):
            for m_idx, method in enumerate(EMBED_METHODS):
                emb = embeddings[(variant, method)]
                labels = np.array(metas[variant].meta_labels)
                curve, cells = learning_curve_detail(
                    emb.coords, labels, config.meta_sizes, config.meta_repeats,
                    rng=root.child("curve", v_idx * len(EMBED_METHODS) + m_idx),
                )
                for si, size in enumerate(config.meta_sizes):
                    for rep in range(config.meta_repeats):
                        curve_rows.append((method, variant, size, rep, curve.accuracies[si, rep]))
                if variant == conf_variant and method == conf_method:
                    si = len(config.meta_sizes) - 1
                    truth = np.concatenate([cells[(si, r)][0] for r in range(config.meta_repeats)])
                    pred = np.concatenate([cells[(si, r)][1] for r in range(config.meta_repeats)])
                    conf_matrix = confusion(truth, pred, problem_names)
        write_learning_curves_csv(curve_rows, emit("learning_curve.csv"))
        if conf_matrix is not None:
            write_confusion_csv(conf_matrix, emit("confusion.csv"))
        manifest.timings["classify"] = time.perf_counter() - t0

        stage = "render"
        t0 = time.perf_counter()
        from .svgplot import render_scatter

        for (variant, method), emb in embeddings.items():
            svg = render_scatter(
                emb.coords, metas[variant].meta_labels, title=f"{variant} / {method}"
            )
            with open(emit(f"embedding_{variant}_{method}.svg"), "w", encoding="utf-8") as fh:
                fh.write(svg)
        manifest.timings["render"] = time.perf_counter() - t0

        stage = "manifest"
        for name in written:
            manifest.add(out_dir, name)
        manifest.save(os.path.join(out_dir, "manifest.json"))
        return manifest
    except StageError:
        _cleanup(out_dir, written)
        raise
    except Exception as exc:
        _cleanup(out_dir, written)
        raise StageError(stage, str(exc)) from exc


def _cleanup(out_dir: str, written: list[str]) -> None:
    for name in written:
        path = os.path.join(out_dir, name)
        if os.path.exists(path):
            os.remove(path)


def stage_meta(config: PipelineConfig) -> list[str]:
    """Assemble meta CSVs from cached grids (no refits)."""
    problems = load_problems(config)
    instances = make_instances(config, problems)
    digest = config.grid_digest()
    grids = []
    for _, inst in instances:
        path = _cache_path(config.out_dir, digest, inst.instance_id)
        if not os.path.exists(path):
            raise StageError("meta", "grid cache missing; run `evaluate` first", inst.instance_id)
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        grids.append(AccuracyGrid(np.array(doc["values"]), inst.instance_id, inst.problem_name))
    names = []
    for variant in config.variants:
        name = f"meta_{variant}.csv"
        write_meta_csv(assemble_meta(grids, variant), os.path.join(config.out_dir, name))
        names.append(name)
    return names


def stage_embed(config: PipelineConfig) -> list[str]:
    """Embed previously written meta CSVs."""
    root = RngStream(config.root_seed)
    names = []
    for v_idx, variant in enumerate(config.variants):
        meta_path = os.path.join(config.out_dir, f"meta_{variant}.csv")
        if not os.path.exists(meta_path):
            raise StageError("embed", f"{meta_path} missing; run `meta` first")
        meta = read_meta_csv(meta_path, variant)
        pairs = (
            ("mds", mds_embed(pairwise_distances(meta), variant, seed=config.root_seed)),
            ("tsne", tsne_best(meta, config.tsne, root.child("tsne", v_idx))),
        )
        for method, emb in pairs:
            base = f"embedding_{variant}_{method}"
            write_embedding_csv(emb, meta, os.path.join(config.out_dir, f"{base}.csv"))
            write_embedding_sidecar(
                emb, config.tsne if method == "tsne" else None,
                os.path.join(config.out_dir, f"{base}.json"),
            )
            names += [f"{base}.csv", f"{base}.json"]
    return names


def stage_classify(config: PipelineConfig) -> list[str]:
    """Learning curves and confusion matrix from embedding CSVs."""
    root = RngStream(config.root_seed)
    curve_rows = []
    conf_variant, conf_method = _confusion_choice(config)
    conf_matrix = None
    problem_names = [p.name for p in load_problems(config)]
    for v_idx, variant in enumerate(config.variants):
        for m_idx, method in enumerate(EMBED_METHODS):
            path = os.path.join(config.out_dir, f"embedding_{variant}_{method}.csv")
            if not os.path.exists(path):
                raise StageError("classify", f"{path} missing; run `embed` first")
            coords, labels, _ = read_embedding_csv(path)
            curve, cells = learning_curve_detail(
                coords, np.array(labels), config.meta_sizes, config.meta_repeats,
                rng=root.child("curve", v_idx * len(EMBED_METHODS) + m_idx),
            )
            for si, size in enumerate(config.meta_sizes):
                for rep in range(config.meta_repeats):
                    curve_rows.append((method, variant, size, rep, curve.accuracies[si, rep]))
            if variant == conf_variant and method == conf_method:
                si = len(config.meta_sizes) - 1
                truth = np.concatenate([cells[(si, r)][0] for r in range(config.meta_repeats)])
                pred = np.concatenate([cells[(si, r)][1] for r in range(config.meta_repeats)])
                conf_matrix = confusion(truth, pred, problem_names)
    write_learning_curves_csv(curve_rows, os.path.join(config.out_dir, "learning_curve.csv"))
    names = ["learning_curve.csv"]
    if conf_matrix is not None:
        write_confusion_csv(conf_matrix, os.path.join(config.out_dir, "confusion.csv"))
        names.append("confusion.csv")
    return names
