import numpy as np
import pytest
from hypothesis import settings

from qpdf.config import RunConfig
from qpdf.fokker_planck import evolve_classical
from qpdf.history_state import assemble_history_system, solve_ideal
from qpdf.pipeline import setup

settings.register_profile("repo", derandomize=True, deadline=None)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def default_cfg():
    return RunConfig()


@pytest.fixture(scope="session")
def default_run(default_cfg):
    """Grid, operator, classical trajectory and history solve for the n=9 default."""
    params, grid, L, f0 = setup(default_cfg)
    traj = evolve_classical(f0, L, default_cfg.dt, default_cfg.n_steps)
    system = assemble_history_system(L, f0, default_cfg.dt, default_cfg.n_t_qubits)
    hv = solve_ideal(system)
    return {"params": params, "grid": grid, "L": L, "f0": f0, "traj": traj,
            "system": system, "hv": hv, "state": hv.values / np.linalg.norm(hv.values)}


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
