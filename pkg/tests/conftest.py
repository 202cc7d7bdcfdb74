import numpy as np
import pytest

from optomagnonic import build_drift, load_preset, stability

ACCEPTANCE_LINES = []


def random_params(rng, base=None):
    """Preset-like effective parameters with every rate scaled at random."""
    base = base or load_preset(rng.choice(["scheme_i", "scheme_ii"]))
    wb = base.omega_b
    return base.replace(
        Delta_a=wb * rng.uniform(-2, 2),
        Delta_c=wb * rng.uniform(-2, 2),
        Delta_m=wb * rng.uniform(-2, 2),
        G_a=base.G_a * rng.uniform(0, 3),
        G_c=base.G_c * rng.uniform(0, 2),
        G_m=base.G_m * rng.uniform(0, 2),
        kappa_a=base.kappa_a * rng.uniform(0.2, 5),
        kappa_c=base.kappa_c * rng.uniform(0.2, 5),
        kappa_m=base.kappa_m * rng.uniform(0.2, 5),
        gamma_b=base.gamma_b * 10 ** rng.uniform(0, 3),
        T=rng.uniform(0, 0.2),
    )


def stable_corpus(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        p = random_params(rng)
        report = stability(build_drift(p))
        if report.stable and not report.marginal:
            out.append(p)
    return out


@pytest.fixture(scope="session")
def corpus50():
    return stable_corpus(50, seed=11)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
