"""Command-line interface.

Subcommands mirror the pipeline stages: `synth` writes the built-in
problem suite as CSVs, `evaluate` computes and caches accuracy grids,
`meta`/`embed`/`classify` run the downstream stages from cached/previous
artifacts, `pipeline` runs everything, `plot` renders an embedding CSV to
SVG.  Exit code 0 on success, 1 with a stage-tagged message otherwise.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import PipelineConfig
from .pipeline import (
    StageError,
    compute_grids,
    load_problems,
    make_instances,
    run_pipeline,
    stage_classify,
    stage_embed,
    stage_meta,
    write_grids_csv,
)


def _load_config(args) -> PipelineConfig:
    config = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        config.root_seed = args.seed
    if getattr(args, "out", None):
        config.out_dir = args.out
    if getattr(args, "workers", None):
        config.workers = args.workers
    return config


def _add_common(sub, out_default=None):
    sub.add_argument("--config", help="pipeline config JSON")
    sub.add_argument("--seed", type=int, help="override the config root seed")
    if out_default is not None:
        sub.add_argument("--out", default=out_default, help="output directory")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="probsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="write the built-in problem suite as CSVs")
    p_synth.add_argument("--seed", type=int, default=PipelineConfig().root_seed)
    p_synth.add_argument("--out", required=True)

    for name, help_text in (
        ("evaluate", "compute and cache accuracy grids"),
        ("meta", "assemble meta-dataset CSVs from cached grids"),
        ("embed", "embed meta CSVs with MDS and t-SNE"),
        ("classify", "learning curves + confusion from embeddings"),
        ("pipeline", "run the full experiment"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        p.add_argument("--out", help="override the config output directory")
        p.add_argument("--workers", type=int, help="worker process count")

    p_plot = sub.add_parser("plot", help="render an embedding CSV to SVG")
    p_plot.add_argument("--embedding", required=True)
    p_plot.add_argument("--out", required=True)
    p_plot.add_argument("--title", default="")

    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            from .problems import write_problem_csv
            from .synthetic import builtin_suite

            os.makedirs(args.out, exist_ok=True)
            for problem in builtin_suite(args.seed):
                write_problem_csv(problem, os.path.join(args.out, f"{problem.name}.csv"))
                print(f"wrote {problem.name}.csv ({problem.n_samples} rows)")
            return 0
        if args.command == "plot":
            from .embedding import read_embedding_csv
            from .svgplot import render_scatter

            coords, labels, _ = read_embedding_csv(args.embedding)
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(render_scatter(coords, labels, title=args.title))
            print(f"wrote {args.out}")
            return 0

        config = _load_config(args)
        if args.command == "evaluate":
            os.makedirs(config.out_dir, exist_ok=True)
            problems = load_problems(config)
            instances = make_instances(config, problems)
            grids = compute_grids(config, problems, instances)
            write_grids_csv(grids, config, os.path.join(config.out_dir, "accuracy_grids.csv"))
            print(f"evaluated {len(grids)} grids -> {config.out_dir}")
        elif args.command == "meta":
            for name in stage_meta(config):
                print(f"wrote {name}")
        elif args.command == "embed":
            for name in stage_embed(config):
                print(f"wrote {name}")
        elif args.command == "classify":
            for name in stage_classify(config):
                print(f"wrote {name}")
        elif args.command == "pipeline":
            manifest = run_pipeline(config)
            print(f"pipeline complete: {len(manifest.artifacts)} artifacts in {config.out_dir}")
        return 0
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"[{args.command}] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
