import numpy as np
import pytest

from cylbif import (
    LaneEmden,
    find_one_dim_solution,
    linearized_spectrum,
    richardson_extrapolate,
)


@pytest.fixture(scope="session")
def cubic_model():
    """f(u) = u**3 as the LaneEmden member with p = 4."""
    return LaneEmden(p=4.0)


@pytest.fixture(scope="session")
def cubic_solutions(cubic_model):
    """Shooting solutions with n = 1, 2, 3 nodal domains."""
    return {n: find_one_dim_solution(cubic_model, n) for n in (1, 2, 3)}


@pytest.fixture(scope="session")
def cubic_spectra_n1(cubic_model, cubic_solutions):
    """Linearization spectra around the positive solution at several resolutions."""
    amplitude = cubic_solutions[1].amplitude
    return {m: linearized_spectrum(cubic_model, amplitude, m, 12) for m in (500, 1000, 2000, 4000)}


@pytest.fixture(scope="session")
def cubic_alphas_n1(cubic_spectra_n1):
    """Richardson-extrapolated eigenvalues for the positive cubic solution."""
    per_m = [cubic_spectra_n1[m].alphas for m in (500, 1000, 2000)]
    return np.array([richardson_extrapolate([per_m[0][i], per_m[1][i], per_m[2][i]]) for i in range(12)])
