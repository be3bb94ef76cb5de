"""Command-line entry point.

Subcommands: ``simulate-discrete``, ``simulate-ctmc``, ``densities``,
``verify`` and ``summarize``.  A config file (``--config``) supplies the run
parameters; flags given on the command line win over file values.

Exit status: 0 on success, 1 when a verification case fails (the report is
still written), 2 on a config or parse error.

Randomness: one root ``np.random.SeedSequence(seed)`` is spawned into two
child streams.  Stream 0 drives the simulated dynamics (or the sampled
rewiring map for ``densities``); stream 1 drives Monte Carlo density
estimates.  The same config and seed always produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .chain import MAX_EXACT_ORDER, exact_kernel, read_trajectory, simulate, write_kernel_csv, write_trajectory
from .config import ConfigError, RunConfig, load_config
from .ctmc import read_snapshots, simulate_ctmc, write_event_log, write_snapshots
from .graph import Graph, num_pairs, read_edge_list
from .limits import density, limit_vector, limit_vector_estimates, motifs, write_density_csv
from .measures import DegenerateChainError, pair_stat, sample_rewiring
from .verify import SUITES, run_suite

SUBCOMMANDS = {
    "simulate-discrete": "discrete",
    "simulate-ctmc": "ctmc",
    "densities": "densities",
    "verify": "verify",
}


def streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    dynamics, estimates = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(dynamics), np.random.default_rng(estimates)


def _initial_state(cfg: RunConfig) -> Graph:
    if cfg.initial == "empty":
        return Graph.empty(cfg.n)
    if cfg.initial == "complete":
        return Graph.complete(cfg.n)
    g = read_edge_list(cfg.initial)
    if g.n != cfg.n:
        raise ConfigError(f"initial graph {cfg.initial} has order {g.n}, config says n={cfg.n}")
    return g


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_discrete(cfg: RunConfig) -> int:
    rng, _ = streams(cfg.seed)
    traj = simulate(_initial_state(cfg), cfg.kernel, cfg.steps, rng)
    out = _out_dir(cfg)
    write_trajectory(traj, out / "trajectory.jsonl")
    if cfg.n <= MAX_EXACT_ORDER:
        write_kernel_csv(exact_kernel(cfg.kernel, cfg.n), out / "kernel.csv")
    print(f"wrote {len(traj)} states to {out / 'trajectory.jsonl'}")
    return 0


def snapshot_grid(horizon: float, every: Optional[float]) -> list[float]:
    if every is None:
        return [0.0, horizon]
    count = int(np.floor(horizon / every + 1e-9))
    return [k * every for k in range(count + 1)]


def run_ctmc(cfg: RunConfig) -> int:
    rng, _ = streams(cfg.seed)
    traj = simulate_ctmc(_initial_state(cfg), cfg.spec, cfg.horizon, rng, snapshot_grid(cfg.horizon, cfg.snapshot_every))
    out = _out_dir(cfg)
    write_event_log(traj, out / "events.jsonl")
    write_snapshots(traj.snapshots, out / "snapshots.txt")
    print(f"wrote {len(traj.events)} events to {out / 'events.jsonl'}")
    return 0


def run_densities(cfg: RunConfig) -> int:
    draw, estimate = streams(cfg.seed)
    if cfg.graph is not None:
        host = read_edge_list(cfg.graph)
    else:
        if cfg.n < 2:
            raise ConfigError("sampling a rewiring map needs n >= 2")
        host = sample_rewiring(cfg.kernel, cfg.n, draw)
    if cfg.motif_order > host.n:
        raise ConfigError(f"motif_order {cfg.motif_order} exceeds host order {host.n}")
    vec = limit_vector(host, cfg.motif_order, monte_carlo=True, samples=cfg.samples, rng=estimate)
    out = _out_dir(cfg)
    write_density_csv(limit_vector_estimates(vec), out / "densities.csv")
    print(f"wrote densities of orders 1..{cfg.motif_order} to {out / 'densities.csv'}")
    return 0


def run_verify(cfg: RunConfig) -> int:
    if cfg.suite not in SUITES:
        raise ConfigError(f"unknown suite {cfg.suite!r}; choose from {', '.join(sorted(SUITES))}")
    report = run_suite(cfg.suite)
    for case in report.cases:
        print(case.line())
    out = _out_dir(cfg)
    (out / "verify_report.json").write_text(report.to_json() + "\n")
    print(f"suite {cfg.suite}: {'PASS' if report.passed else 'FAIL'} ({len(report.cases)} cases)")
    return 0 if report.passed else 1


RUNNERS = {"discrete": run_discrete, "ctmc": run_ctmc, "densities": run_densities, "verify": run_verify}


def run(cfg: RunConfig, mode: Optional[str] = None) -> int:
    cfg = cfg.validate(mode)
    return RUNNERS[cfg.mode](cfg)


# summarize


def _load_states(path: Path) -> list[tuple[Optional[float], Graph]]:
    text = path.read_text()
    head = text.lstrip()[:1]
    if not head:
        return []
    if head == "{":
        return [(None, g) for g in read_trajectory(path)]
    return read_snapshots(path)


def summary_header(motif_order: Optional[int]) -> list[str]:
    cols = ["file", "index", "time", "n", "edges", "edge_density", "n00", "n01", "n10", "n11"]
    if motif_order:
        for m in range(2, motif_order + 1):
            cols += [f"t{m}_{f.index}" for f in motifs("graph", m)]
    return cols


def summary_rows(path: Path, motif_order: Optional[int], rng: np.random.Generator, samples: int) -> list[list]:
    rows = []
    prev = None
    for k, (t, g) in enumerate(_load_states(path)):
        pairs = num_pairs(g.n)
        row = [str(path), k, "" if t is None else repr(t), g.n, g.n_edges, repr(g.n_edges / pairs) if pairs else ""]
        if prev is not None and prev.n == g.n:
            s = pair_stat(prev, g)
            row += [s.n00, s.n01, s.n10, s.n11]
        else:
            row += ["", "", "", ""]
        if motif_order:
            for m in range(2, motif_order + 1):
                for f in motifs("graph", m):
                    row.append(repr(density(f, g, samples=samples, rng=rng).value) if m <= g.n else "")
        rows.append(row)
        prev = g
    return rows


def summarize(paths: Sequence[str], out: Path, motif_order: Optional[int], seed: int, samples: int) -> Path:
    _, rng = streams(seed)
    rows = []
    for p in paths:
        try:
            rows += summary_rows(Path(p), motif_order, rng, samples)
        except OSError as exc:
            raise ConfigError(f"cannot read {p}: {exc}") from None
        except ValueError as exc:
            msg = str(exc)
            raise ConfigError(msg, source=None if msg.startswith(f"{p}:") else str(p)) from None
    out.mkdir(parents=True, exist_ok=True)
    target = out / "summary.csv"
    with open(target, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(summary_header(motif_order))
        writer.writerows(rows)
    return target


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rewiring", description="Exchangeable rewiring processes on graphs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="run config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--steps", type=int)
        p.add_argument("--horizon", type=float)
        p.add_argument("--out")
        p.add_argument("--motif-order", type=int)
        p.add_argument("--suite")
        p.add_argument("--graph", help="edge-list file (densities of a given graph)")
        p.add_argument("--samples", type=int)
    p = sub.add_parser("summarize")
    p.add_argument("files", nargs="*", help="trajectory.jsonl or snapshots.txt files")
    p.add_argument("--out", default="out")
    p.add_argument("--motif-order", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=100_000)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "summarize":
            target = summarize(args.files, Path(args.out), args.motif_order, args.seed, args.samples)
            print(f"wrote {target}")
            return 0
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = cfg.with_overrides(
            seed=args.seed,
            n=args.n,
            steps=args.steps,
            horizon=args.horizon,
            out=args.out,
            motif_order=args.motif_order,
            suite=args.suite,
            graph=args.graph,
            samples=args.samples,
        )
        return run(cfg, SUBCOMMANDS[args.command])
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateChainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
