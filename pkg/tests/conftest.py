import pytest

from qnlslab.galerkin import GalerkinSystem
from qnlslab.manifold import solve_cohomological


@pytest.fixture(scope="session")
def model_n3_k20():
    """Order-20 chart of the N=3 truncation (built once per session)."""
    return solve_cohomological(GalerkinSystem(3), 20)


@pytest.fixture(scope="session")
def model_n2_k6():
    return solve_cohomological(GalerkinSystem(2), 6)
