"""Command line front-end.

Subcommands ``sample``, ``classify``, ``verify``, ``sigma`` and ``dl``.  Every
run needs ``--seed``; ``--params FILE`` supplies ``key = value`` defaults for
any flag (flags given on the command line win).  Artifacts go to stdout, or
to a file in ``--out`` (falling back to ``$EFTSIM_OUT``).  The exit status is
0 iff every verdict passes, 1 if some verdict fails and 2 on a usage or
precondition error, which is reported as a single ``ERROR`` line on stderr.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .dl_graph import DLPairSampler, dl_offspring_check, sample_dl_windows
from .dynamics import compute_foliation, drainage_sim, build_f_graph, random_functional_graph
from .parallel import as_seed_sequence
from .reroot import TreeMeasure, enumerate_rooted_trees, sigma_exact, sigma_mc
from .samplers import (
    CanopySampler, EGWTSampler, GWTSampler, OffspringDistribution, parse_param_file,
)
from .suites import SUITES, run_suite
from .verify import write_reports

OUT_ENV = "EFTSIM_OUT"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    args: argparse.Namespace
    out_dir: Path | None

    def emit(self, name: str, text: str) -> None:
        if self.out_dir is None:
            sys.stdout.write(text)
        else:
            (self.out_dir / name).write_text(text)


def _common(p):
    p.add_argument("--seed", type=int, help="master seed (required)")
    p.add_argument("--n", type=int, help="number of samples")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or stdout)")
    p.add_argument("--params", help="key = value file with defaults for any flag")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eftsim", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="emit serialized tree windows")
    _common(p)
    p.add_argument("--family", choices=["gwt", "egwt", "canopy"], default="egwt")
    p.add_argument("--pi", default="0:1/2,2:1/2")
    p.add_argument("--spine", type=int, default=4, help="spine height of eternal windows")
    p.add_argument("--depth", type=int, help="depth cap (default: spine height)")
    p.add_argument("--d", type=int, default=2, help="canopy offspring cardinality")
    p.add_argument("--d-tilde", type=float, default=2.0, help="canopy layer parameter")

    p = sub.add_parser("classify", help="foliation CSV of functional graphs")
    _common(p)
    p.add_argument("--random-functional-graphs", type=int, default=0, metavar="K")
    p.add_argument("--max-v", type=int, default=50)
    p.add_argument("--drainage", type=int, nargs=2, metavar=("W", "H"))
    p.add_argument("--rule", default="iid_uniform", choices=["iid_uniform", "stationary_block"])

    p = sub.add_parser("verify", help="run a named suite and emit a report CSV")
    _common(p)
    p.add_argument("--suite", required=False, choices=["all", *SUITES])

    p = sub.add_parser("sigma", help="apply sigma_n exactly or by Monte Carlo")
    _common(p)
    p.add_argument("--order", type=int, default=1, help="the n of sigma_n")
    p.add_argument("--exact", action="store_true", help="exact, on the uniform law of small trees")
    p.add_argument("--max-vertices", type=int, default=4)
    p.add_argument("--measure", help="file of 'num den code' lines (exact mode)")
    p.add_argument("--pi", default="0:1/2,2:1/2")
    p.add_argument("--depth", type=int, help="GW depth cap (default: order + 2)")

    p = sub.add_parser("dl", help="Diestel-Leader windows and the offspring check")
    _common(p)
    p.add_argument("--pi1", default="1:1/2,3:1/2")
    p.add_argument("--pi2", default="1:1")
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--windows", type=int, default=1, help="number of exported windows")
    return ap


def _config(argv) -> RunConfig:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.params:
        path = Path(args.params)
        if not path.is_file():
            raise UsageError(f"parameter file {path} not found")
        params = {k.replace("-", "_"): v for k, v in parse_param_file(str(path)).items()}
        sub = ap._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(params) - known
        if unknown:
            raise UsageError(f"unknown parameter(s) {sorted(unknown)} in {path}")
        sub.set_defaults(**params)
        args = ap.parse_args(argv)
    if args.seed is None:
        raise UsageError("--seed is required")
    if args.n is not None and args.n <= 0:
        raise UsageError("--n must be positive")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    out = args.out or os.environ.get(OUT_ENV)
    out_dir = None
    if out:
        out_dir = Path(out)
        if out_dir.exists() and not out_dir.is_dir():
            raise UsageError(f"output path {out_dir} is not a directory")
        out_dir.mkdir(parents=True, exist_ok=True)
    return RunConfig(args.command, args, out_dir)


def _pi(spec):
    return OffspringDistribution.parse(spec)


def cmd_sample(cfg: RunConfig) -> int:
    a = cfg.args
    n = a.n or 1
    depth = a.depth if a.depth is not None else a.spine
    if a.family == "gwt":
        sampler = GWTSampler(_pi(a.pi), depth)
    elif a.family == "egwt":
        sampler = EGWTSampler(_pi(a.pi), a.spine, depth)
    else:
        sampler = CanopySampler(a.d, a.d_tilde, depth)
    batch = sampler(n, np.random.default_rng(as_seed_sequence(a.seed)))
    cfg.emit("trees.txt", "".join(batch[i].to_text() for i in range(len(batch))))
    return 0


def cmd_classify(cfg: RunConfig) -> int:
    a = cfg.args
    if not a.random_functional_graphs and not a.drainage:
        raise UsageError("give --random-functional-graphs K or --drainage W H")
    rng = np.random.default_rng(as_seed_sequence(a.seed))
    graphs = []
    if a.random_functional_graphs:
        sizes = rng.integers(1, a.max_v + 1, a.random_functional_graphs)
        graphs += [random_functional_graph(int(s), k) for s, k in zip(sizes, rng.spawn(len(sizes)))]
    if a.drainage:
        net, f, _ = drainage_sim(a.drainage[0], a.drainage[1], a.rule, rng)
        graphs.append(build_f_graph(net, f))
    buf = io.StringIO()
    ok = True
    for gid, fg in enumerate(graphs):
        res = compute_foliation(fg)
        ok &= res.all_ok()
        for j, line in enumerate(res.to_csv().splitlines()):
            if j == 0 and gid == 0:
                buf.write("graph_id," + line + ",ok\n")
            elif j > 0:
                comp = res.components[j - 1]
                buf.write(f"{gid},{line},{int(all(comp.checks().values()))}\n")
    cfg.emit("foliation.csv", buf.getvalue())
    print(f"classified {len(graphs)} graphs: {'all unique-cycle' if ok else 'FAILURES'}", file=sys.stderr)
    return 0 if ok else 1


def cmd_verify(cfg: RunConfig) -> int:
    a = cfg.args
    if not a.suite:
        raise UsageError("--suite is required")
    reports = run_suite(a.suite, a.seed, a.n, a.workers)
    cfg.emit("report.csv", write_reports(reports))
    for r in reports:
        print(r.summary(), file=sys.stderr)
    return 0 if all(r.verdict for r in reports) else 1


def cmd_sigma(cfg: RunConfig) -> int:
    a = cfg.args
    if a.exact:
        if a.measure:
            path = Path(a.measure)
            if not path.is_file():
                raise UsageError(f"measure file {path} not found")
            mu = TreeMeasure.from_lines(path.read_text())
        else:
            codes = enumerate_rooted_trees(a.max_vertices)
            mu = TreeMeasure({c: Fraction(1, len(codes)) for c in codes})
        cfg.emit("sigma.txt", sigma_exact(mu, a.order, budget=max(8, a.max_vertices)).to_lines())
        return 0
    depth = a.depth if a.depth is not None else a.order + 2
    batch = sigma_mc(GWTSampler(_pi(a.pi), depth), a.order, a.n or 1000, a.seed, workers=a.workers)
    cfg.emit("trees.txt", "".join(batch[i].to_text() for i in range(len(batch))))
    return 0


def cmd_dl(cfg: RunConfig) -> int:
    a = cfg.args
    s1, s2 = as_seed_sequence(a.seed).spawn(2)
    wins = sample_dl_windows(a.pi1, a.pi2, a.radius, a.windows, s1)
    text = []
    ok = True
    for i, w in enumerate(wins):
        chk = w.check_identities()
        good = chk["level_sum"] and chk["out_degree"] and chk["in_degree"]
        ok &= good
        text.append(f"# window {i} root=({w.T1.root},{w.T2.root}) identities={'ok' if good else 'FAIL'}\n")
        text.append(w.export())
    cfg.emit("dl_windows.txt", "".join(text))
    reports = dl_offspring_check(DLPairSampler(_pi(a.pi1), _pi(a.pi2)), a.n or 100_000, s2,
                                 workers=a.workers)
    cfg.emit("dl_report.csv", write_reports(reports))
    for r in reports:
        print(r.summary(), file=sys.stderr)
    return 0 if ok and all(r.verdict for r in reports) else 1


COMMANDS = {"sample": cmd_sample, "classify": cmd_classify, "verify": cmd_verify,
            "sigma": cmd_sigma, "dl": cmd_dl}


def run(cfg: RunConfig) -> int:
    return COMMANDS[cfg.command](cfg)


def main(argv=None) -> int:
    try:
        return run(_config(argv))
    except (UsageError, ValueError, KeyError, OSError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"ERROR {type(exc).__name__}: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
