"""Command-line entry point (``qpdf``).

Exit status: 0 success, 1 usage/configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import qlsa
from .config import RunConfig, load_config, parse_overrides
from .errors import ConfigError, DomainError, NumericalError
from .fokker_planck import evolve_classical, mean_and_variance, write_trajectory_csv
from .history_state import assemble_history_system, condition_estimate, export_coo
from .moments.counts import GATE_COUNT_HEADER_PREFIX, emit_compiled_tally_table, emit_gate_count_table
from .pipeline import run_end_to_end, setup, solve, write_moments_csv
from .moments.measure import measure_moment_series

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2



class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config(args) -> RunConfig:
    overrides = parse_overrides(args.set)
    if getattr(args, "out", None):
        overrides["output_dir"] = args.out
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "mode", None):
        overrides["solver"] = args.mode
    return load_config(args.config, overrides)


def _outdir(cfg: RunConfig) -> Path:
    p = Path(cfg.output_dir)
    p.mkdir(parents=True, exist_ok=True)
    return p


def cmd_evolve_classical(args) -> int:
    cfg = _config(args)
    _, grid, L, f0 = setup(cfg)
    traj = evolve_classical(f0, L, cfg.dt, cfg.n_steps)
    path = _outdir(cfg) / "pdf_evolution.csv"
    write_trajectory_csv(path, traj, cfg.dt)
    m, v = mean_and_variance(traj[-1])
    print(f"wrote {path}; final mean {m:.6f}, variance {v:.6e}")
    return EXIT_OK


def cmd_build_history(args) -> int:
    cfg = _config(args)
    _, grid, L, f0 = setup(cfg)
    system = assemble_history_system(L, f0, cfg.dt, cfg.n_t_qubits)
    out = _outdir(cfg)
    export_coo(system, out / "history_A.txt", out / "history_b.txt")
    print(f"N_total={system.n_total} nnz={system.nnz} sparsity={system.sparsity:.6f} "
          f"max_row_nnz={system.max_row_nnz()} kappa~{condition_estimate(system):.4g}")
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = _config(args)
    outcome, _ = solve(cfg, np.random.default_rng(cfg.seed))
    out = _outdir(cfg)
    write_trajectory_csv(out / "pdf_evolution.csv", outcome.blocks, cfg.dt)
    d = outcome.diagnostics
    qlsa.write_run_summary(out / "run_summary.csv", [{
        "mode": cfg.solver, "n_system": d["n_system"], "clock": d.get("clock", ""),
        "t0": d.get("t0", ""), "c": d.get("c", ""), "success_prob": d["success_prob"],
        "fidelity": d["fidelity"], "kappa": d["kappa"], "status": "ok"}])
    print(f"{cfg.solver}: fidelity={d['fidelity']:.6f} success_prob={d['success_prob']:.4g} "
          f"kappa~{d['kappa']:.4g}")
    return EXIT_OK


def cmd_measure(args) -> int:
    cfg = _config(args)
    rng = np.random.default_rng(cfg.seed)
    outcome, traj = solve(cfg, rng)
    grid = outcome.blocks[0].grid
    measured = measure_moment_series(outcome.state, grid, cfg.n_t_qubits, [None] + cfg.orders,
                                     encoding=cfg.encoding(), fit_against=cfg.fit_against,
                                     shots=cfg.shots, rng=rng)
    oracle = np.array([mean_and_variance(f) for f in traj])
    path = _outdir(cfg) / "moments.csv"
    write_moments_csv(path, cfg.dt * np.arange(len(traj)), measured, oracle[:, 0], oracle[:, 1])
    print(f"wrote {path}")
    return EXIT_OK


def cmd_gate_count(args) -> int:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    orders = [int(t) for t in args.orders.split(",")]
    rows = emit_gate_count_table(out / "gate_counts.csv", range(1, args.n_max + 1), orders)
    if args.compiled_n_max:
        emit_compiled_tally_table(out / "compiled_gate_counts.csv", range(1, args.compiled_n_max + 1),
                                  orders)
    print(",".join(GATE_COUNT_HEADER_PREFIX + [f"approx_m{m}" for m in orders]))
    for r in rows:
        print(",".join(str(x) for x in r))
    return EXIT_OK


def _summarize(report) -> str:
    lines = [f"status: {report.status}"]
    d = report.diagnostics
    lines.append(f"solver={report.config.solver} n={d['n_system']} kappa~{d['kappa']:.4g} "
                 f"fidelity={d['fidelity']:.6f} success_prob={d['success_prob']:.4g}")
    lines.append("exact operator vs grid oracle: mean %.3e, variance %.3e" % report.exact_vs_oracle)
    for m, (em, ev) in report.relative_errors.items():
        lines.append(f"order {m}: averaged relative error mean {100 * em:.4f}%, variance {100 * ev:.4f}%")
    stable = [e.location for e in report.equilibria if e.stability.value == "stable"]
    peak = report.blocks[-1].grid.centers[np.argmax(report.blocks[-1].values)]
    lines.append(f"stable drift roots {', '.join(f'{r:.6f}' for r in stable)}; final peak cell {peak:.6f}")
    return "\n".join(lines)


def cmd_end_to_end(args) -> int:
    cfg = _config(args)
    report = run_end_to_end(cfg)
    print(_summarize(report))
    return EXIT_OK


def _sweep_one(job):
    cfg_path, overrides = job
    cfg = load_config(cfg_path, overrides)
    report = run_end_to_end(cfg)
    return cfg.output_dir, report.relative_errors, report.diagnostics.get("fidelity")


def cmd_sweep(args) -> int:
    base = _config(args)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    jobs = []
    for v in values:
        ov = parse_overrides(args.set)
        ov.update(parse_overrides([f"{args.param}={v}"]))
        ov["output_dir"] = str(Path(base.output_dir) / f"{args.param}={v}")
        load_config(args.config, ov)  # validate before spawning
        jobs.append((args.config, ov))
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        for outdir, rel, fid in pool.map(_sweep_one, jobs):
            errs = " ".join(f"m{m}:{100 * a:.3f}%/{100 * b:.3f}%" for m, (a, b) in rel.items())
            print(f"{outdir}: fidelity={fid} {errs}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qpdf", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, config_required=False):
        sp.add_argument("--config", required=config_required, help="flat key = value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        sp.add_argument("--out", help="output directory (overrides output_dir)")
        sp.add_argument("--seed", type=int)

    common(sub.add_parser("evolve-classical", help="backward-Euler reference trajectory"))
    common(sub.add_parser("build-history", help="assemble and export the history system"))
    sp = sub.add_parser("solve", help="solve the history system")
    common(sp)
    sp.add_argument("--mode", choices=["classical", "ideal", "hhl"])
    sp = sub.add_parser("measure", help="circuit-measured moments for every block")
    common(sp)
    sp.add_argument("--mode", choices=["classical", "ideal", "hhl"])
    sp = sub.add_parser("gate-count", help="closed-form gate-count table")
    sp.add_argument("--n-max", type=int, default=20)
    sp.add_argument("--orders", default="2,4,6")
    sp.add_argument("--compiled-n-max", type=int, default=0)
    sp.add_argument("--out")
    sp = sub.add_parser("end-to-end", help="full pipeline with all CSV outputs")
    common(sp, config_required=True)
    sp.add_argument("--mode", choices=["classical", "ideal", "hhl"])
    sp = sub.add_parser("sweep", help="run end-to-end over values of one key")
    common(sp, config_required=True)
    sp.add_argument("--param", required=True)
    sp.add_argument("--values", required=True, help="comma-separated values")
    sp.add_argument("--workers", type=int, default=None)
    return p


COMMANDS = {
    "evolve-classical": cmd_evolve_classical,
    "build-history": cmd_build_history,
    "solve": cmd_solve,
    "measure": cmd_measure,
    "gate-count": cmd_gate_count,
    "end-to-end": cmd_end_to_end,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError) as exc:
        print(f"qpdf: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"qpdf: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
