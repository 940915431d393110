import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from waybell import bell_suite as bs
from waybell import quantum_kernel as qk
from waybell.bell_suite import STANDARD_SETTINGS, ChshSettings, Classification
from waybell.errors import ParameterError
from waybell.lhv_models import WayParams

ROOT2 = math.sqrt(2)


@pytest.fixture(scope="module")
def qm():
    return bs.quantum_correlation("singlet")


@pytest.fixture(scope="module")
def base():
    return bs.model_correlation("base")


def way(dl):
    return bs.model_correlation("way_singlet", WayParams(dl))


def test_batched_quantum_matches_kernel(qm):
    rng = np.random.default_rng(3)
    for a, b in rng.uniform(0, 2 * math.pi, size=(50, 2)):
        for kind in ("singlet", "triplet_psi_plus", "triplet_phi_minus"):
            assert bs.quantum_correlation(kind)(a, b) == pytest.approx(qk.qm_correlation(kind, a, b), abs=1e-12)
    grid = np.linspace(0, 2 * math.pi, 7)
    assert qm(grid[:, None], grid[None, :]).shape == (7, 7)


def test_chsh_quantum_standard(qm):
    res = bs.chsh_s(qm)
    # oracle: four cosines of pi/4, 3pi/4
    assert res.s_value == pytest.approx(2 * ROOT2, abs=1e-12)
    assert res.classification is Classification.QUANTUM


def test_chsh_base_standard(base):
    res = bs.chsh_s(base)
    assert res.s_value == pytest.approx(2.0, abs=1e-12)
    assert res.classification is Classification.CLASSICAL


def test_chsh_way_floor():
    res = bs.chsh_s(way(0.5))
    # frozen from mpmath: |3 E(pi/4) - E(3pi/4)| at dL = 1/2
    assert res.s_value == pytest.approx(3.6374096103907086, abs=1e-12)
    assert res.classification is Classification.SUPRA_QUANTUM


def test_chsh_recomputable_from_terms(qm):
    res = bs.chsh_s(qm, ChshSettings(0.1, 1.2, 0.7, 2.5))
    e_ab, e_abp, e_apb, e_apbp = res.per_term
    assert res.s_value == pytest.approx(abs(e_ab - e_abp + e_apb + e_apbp), abs=1e-12)


@pytest.mark.parametrize("s, expected", [
    (2.0, "classical"), (2.0 + 5e-10, "classical"), (2.5, "quantum"),
    (2 * ROOT2, "quantum"), (2.9, "supra-quantum"),
])
def test_classify(s, expected):
    assert bs.classify(s).value == expected


@given(st.floats(-10, 10))
@settings(deadline=None)
def test_shift_invariance(delta):
    for corr in (bs.quantum_correlation("singlet"), way(0.77), bs.model_correlation("base")):
        s0 = bs.chsh_s(corr, STANDARD_SETTINGS).s_value
        s1 = bs.chsh_s(corr, STANDARD_SETTINGS.shifted(delta)).s_value
        assert abs(s0 - s1) <= 1e-12


def test_max_chsh_quantum(qm):
    res = bs.max_chsh(qm)
    assert abs(res.s_value - 2 * ROOT2) <= 1e-6


def test_max_chsh_base(base):
    assert abs(bs.max_chsh(base).s_value - 2.0) <= 1e-6


def test_max_chsh_way():
    res = bs.max_chsh(way(0.77))
    assert res.s_value >= 2.82
    assert res.s_value >= bs.chsh_s(way(0.77)).s_value


def test_max_chsh_refines_off_grid():
    # a shifted cosine has its optimum off the coarse grid
    shifted = lambda a, b: -np.cos(np.asarray(a) - np.asarray(b) - 0.123)  # noqa: E731
    res = bs.max_chsh(shifted, coarse_grid_steps=8)
    assert res.s_value == pytest.approx(2 * ROOT2, abs=1e-6)


def test_max_chsh_never_exceeds_four():
    sign = lambda a, b: np.sign(np.cos(3 * np.asarray(a))) * np.sign(np.sin(5 * np.asarray(b)) + 0.1)  # noqa: E731
    assert bs.max_chsh(sign, coarse_grid_steps=12, refine_iterations=10).s_value <= 4.0


def test_max_chsh_grid_floor(qm):
    with pytest.raises(ParameterError):
        bs.max_chsh(qm, coarse_grid_steps=4)


def test_tsirelson_margin():
    margins = [bs.tsirelson_margin(dl) for dl in (0.5, 0.6, 0.77, 1.0, 2.0, 10.0)]
    assert margins[0] > 0.8
    assert abs(margins[2]) <= 0.02
    assert margins[-1] < 0
    assert all(a >= b for a, b in zip(margins, margins[1:]))
    with pytest.raises(ParameterError):
        bs.tsirelson_margin(0.45)


def test_model_correlation_validation():
    with pytest.raises(ParameterError):
        bs.model_correlation("way_singlet", WayParams(1.0, "triplet_psi_plus"))
    with pytest.raises(ParameterError):
        bs.model_correlation("way_singlet")
    with pytest.raises(ParameterError):
        bs.model_correlation("pearle")
    with pytest.raises(ParameterError):
        ChshSettings(0, math.nan, 0, 0)
