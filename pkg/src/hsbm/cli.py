"""Command line entry point: ``hsbm {gch,generate,run,sweep} CONFIG``.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import harness, io, sampler
from .model import gch_divergence, gch_threshold, in_xi

log = logging.getLogger("hsbm")

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="JSON experiment configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--format", choices=("csv", "json"), dest="fmt")
    common.add_argument("--out", help="output path (prefix for 'generate')")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="hsbm", description="d-uniform hypergraph SBM laboratory")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("gch", parents=[common], help="print GCH threshold, t* and degeneracy verdict")
    gen = sub.add_parser("generate", parents=[common], help="write a sampled hypergraph and its labels")
    gen.add_argument("--scale", type=float, default=1.0)
    run = sub.add_parser("run", parents=[common], help="run and print a single trial")
    run.add_argument("--scale", type=float, default=1.0)
    sub.add_parser("sweep", parents=[common], help="run the full sweep and write the summary")
    return ap


def _load(args) -> harness.ExperimentConfig:
    cfg = harness.load_config(args.config)
    return harness.with_overrides(
        cfg,
        seed=args.seed,
        trials=args.trials,
        workers=args.workers,
        output_format=args.fmt,
        output_path=args.out,
    )


def cmd_gch(cfg, args) -> None:
    params = cfg.params
    value, pair = gch_threshold(params)
    res = gch_divergence(*pair, params)
    xi, witness = in_xi(params)
    print(json.dumps({
        "gch": value,
        "pair": list(pair),
        "t_star": res.t_star,
        "in_xi": xi,
        "xi_witness": list(witness) if witness else None,
    }))


def cmd_generate(cfg, args) -> None:
    if not cfg.output_path:
        raise harness.ConfigError("generate needs --out PREFIX")
    params = cfg.params.scaled(args.scale)
    z = sampler.sample_labels(params, cfg.seed)
    g = sampler.sample_hsbm(params, z, cfg.seed, cfg.strategy)
    io.write_hypergraph(f"{cfg.output_path}.edges", g)
    io.write_labels(f"{cfg.output_path}.labels", z)
    log.info("wrote %d hyperedges to %s.edges", g.num_edges, cfg.output_path)


def cmd_run(cfg, args) -> None:
    rec = harness.run_trial(cfg, args.scale, cfg.seed)
    for key, val in rec.as_dict().items():
        print(f"{key}: {val}")
    if rec.failure:
        raise RuntimeError(rec.failure)


def cmd_sweep(cfg, args) -> None:
    result = harness.run_sweep(cfg)
    for row in result.rows:
        log.info("scale=%.4g gch=%.4g exact_rate=%.3f", row.scale, row.gch, row.exact_rate)
    if cfg.output_path:
        harness.emit(result, cfg.output_format, cfg.output_path)
    else:
        sys.stdout.write(harness.render(result, cfg.output_format))


COMMANDS = {"gch": cmd_gch, "generate": cmd_generate, "run": cmd_run, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _load(args)
    except (harness.ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        COMMANDS[args.command](cfg, args)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any failure maps to the runtime exit code
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
