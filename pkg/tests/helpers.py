"""Shared builders for the test suites."""
import numpy as np

from wearfem.fe_space import FeSpace


def project_admissible(space: FeSpace, v: np.ndarray) -> np.ndarray:
    """Push each contact node back onto the half-space u_nu <= g along the normal."""
    v = np.array(v, dtype=float)
    nu = np.asarray(space.normal)
    excess = np.maximum(space.normal_traces(v) - space.gap, 0.0)
    for j in range(2):
        v[space.contact_dofs[:, j]] -= excess * nu[j]
    return v


def feasible_trials(space: FeSpace, u: np.ndarray, rng, count: int = 100, scale: float = 0.05):
    """Random admissible fields spread around u at several amplitudes."""
    out = []
    for i in range(count):
        amp = scale * 10.0 ** (-(i % 4))
        out.append(project_admissible(space, u + amp * rng.standard_normal(space.n_free)))
    return out
