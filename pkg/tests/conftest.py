import pytest

from kppsh.params import default_preset, gamma_rem
from kppsh.sim import SimConfig, default_sim_grid, run_simulation


@pytest.fixture(scope="session")
def production_runs():
    """Full co-moving runs at mu in {0.05, 0.1}, shared across acceptance tests."""
    runs = {}
    for mu in (0.05, 0.1):
        p = default_preset().with_(mu=mu, mu0=0.2)
        p = p.with_(gamma=gamma_rem(p) + 1.0)
        grid = default_sim_grid(-800.0, 40.0)
        cfg = SimConfig(params=p, grid=grid, dt=0.004, t_end=400.0)
        runs[mu] = run_simulation(cfg)
    return runs


@pytest.fixture(scope="session")
def approx_results():
    from kppsh.gl import approximation_experiment

    p = default_preset()
    return {eps: approximation_experiment(p, eps) for eps in (0.2, 0.1)}
