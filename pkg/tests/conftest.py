import numpy as np
import pytest

from rossler_knots import ClassicalParams, Params, convert_classical, integrate
from rossler_knots import section as sec


@pytest.fixture(scope="session")
def chaotic_params() -> Params:
    """Modern-form image of the classical chaotic parameter set."""
    p, _ = convert_classical(ClassicalParams(0.2, 0.2, 5.7))
    return p


@pytest.fixture(scope="session")
def mild_params() -> Params:
    """Bounded dynamics with mild volume contraction (reversibility oracles work)."""
    return Params(0.5, 0.5, 2.0)


@pytest.fixture(scope="session")
def attractor_state(chaotic_params) -> np.ndarray:
    """A state on (numerically: very near) the chaotic attractor."""
    return integrate(chaotic_params, (0.0, -5.0, 0.02), 300.0, 1e-9).end_state


@pytest.fixture(scope="session")
def attractor_crossing(chaotic_params, attractor_state) -> sec.SectionPoint:
    """An upper-half section point on the attractor."""
    traj = integrate(chaotic_params, attractor_state, 50.0, 1e-9)
    cr = sec.crossings_of(traj, want_side=sec.UPPER)[0]
    return sec.SectionPoint.make(sec.SectionChart(chaotic_params.a), cr.state[0], cr.state[2])


@pytest.fixture(scope="session")
def inflate_unknot():
    """Random R1/R2 inflation of the empty Gauss code (reduction oracle)."""
    from rossler_knots import knots as kn

    def _inflate(rng, n_moves):
        entries = []
        next_id = 1
        for _ in range(n_moves):
            L = len(entries)
            if rng.rand() < 0.5:
                s = 1 if rng.rand() < 0.5 else -1
                k = rng.randint(0, L + 1)
                entries[k:k] = [(next_id, True, s), (next_id, False, s)]
                next_id += 1
            else:
                s = 1 if rng.rand() < 0.5 else -1
                c, d = next_id, next_id + 1
                next_id += 2
                k = rng.randint(0, L + 1)
                entries[k:k] = [(c, True, s), (d, True, -s)]
                m = rng.randint(0, len(entries) + 1)
                while k < m < k + 2:
                    m = rng.randint(0, len(entries) + 1)
                first = rng.rand() < 0.5
                pair = [(d, False, -s), (c, False, s)] if first else [(c, False, s), (d, False, -s)]
                entries[m:m] = pair
        return kn.CrossingDiagram(tuple(kn.GaussEntry(*e) for e in entries))

    return _inflate
