from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncwitness.linalg import kron_all
from ncwitness.states import (
    DensityMatrix,
    InvalidStateError,
    LocalMeasurement,
    MeasurementAngles,
    Partition,
    bell_state,
    ghz_state,
    make_classical_state,
    random_density_matrix,
)
from ncwitness.witness import (
    CorrelatorSet,
    XStateParams,
    check_theorem2,
    classicality_conditions,
    ssb_pair_matrix,
    witness_norm,
    witness_operator,
    xstate_commutator_corner,
    xstate_from_correlators,
    xstate_witness_norm,
)


def _angles(rng, n):
    return MeasurementAngles(rng.uniform(0, np.pi, n), rng.uniform(0, 2 * np.pi, n))


def test_entangled_states_with_mixed_marginals_have_zero_witness():
    assert witness_norm(bell_state()) <= 1e-14
    assert witness_norm(bell_state("psi-")) <= 1e-14
    assert witness_norm(ghz_state(3)) <= 1e-14


def test_product_state_zero_witness(rng):
    parts = [random_density_matrix(Partition.qubits(1), rng).matrix for _ in range(3)]
    rho = DensityMatrix(kron_all(parts), Partition.qubits(3))
    assert witness_norm(rho) < 1e-14


def test_witness_operator_antihermitian_and_single_party(rng):
    rho = random_density_matrix(Partition((2, 3)), rng)
    w = witness_operator(rho)
    assert np.max(np.abs(w + w.conj().T)) < 1e-14
    assert witness_norm(rho) > 1e-3
    with pytest.raises(ValueError):
        witness_norm(random_density_matrix(Partition((4,)), rng))


def test_classical_states_zero_witness(rng):
    for n in (2, 3, 4):
        part = Partition.qubits(n)
        m = _angles(rng, n).to_measurement()
        rho = make_classical_state(part, m, rng.dirichlet(np.ones(part.dim)))
        assert witness_norm(rho) <= 1e-10
        assert check_theorem2(rho, m).implication_holds


def test_xstate_closed_form_frozen():
    c = CorrelatorSet(G_z=0.5, G_xx=0.3, G_yy=-0.1, G_zz=0.4)
    assert xstate_witness_norm(c) == pytest.approx(0.1, abs=1e-15)
    x = xstate_from_correlators(c)
    assert (x.a, x.b1, x.d, x.z, x.f) == pytest.approx((0.6, 0.15, 0.1, 0.05, 0.1), abs=1e-15)
    assert witness_norm(x.density_matrix()) == pytest.approx(0.1, abs=1e-14)
    # the single independent corner entry appears twice: ||W|| = 2|k|
    assert 2 * abs(xstate_commutator_corner(x)) == pytest.approx(0.1, abs=1e-14)


@settings(max_examples=300, deadline=None)
@given(
    st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1),
)
def test_xstate_closed_form_matches_matrix_path(gz, gxx, gyy, gzz):
    c = CorrelatorSet(gz, gxx, gyy, gzz)
    try:
        x = xstate_from_correlators(c, positivity_tol=0.0)
    except InvalidStateError:
        return
    assert abs(witness_norm(x.density_matrix()) - xstate_witness_norm(c)) <= 1e-12


def test_xstate_positivity_clipping():
    # slightly outside the cone: repaired; far outside: rejected
    c = CorrelatorSet(G_z=0.0, G_xx=0.5 + 5e-10, G_yy=0.5 + 5e-10, G_zz=0.0)
    x = xstate_from_correlators(c)
    assert np.linalg.eigvalsh(x.matrix())[0] >= -1e-15
    with pytest.raises(InvalidStateError):
        xstate_from_correlators(CorrelatorSet(0.0, 1.0, 1.0, 0.0))


def test_xstate_param_validation():
    with pytest.raises(InvalidStateError):
        XStateParams(0.5, 0.2, 0.2, 0.2, 0.0, 0.0)
    with pytest.raises(InvalidStateError):
        XStateParams(0.25, 0.25, 0.25, 0.25, 0.3, 0.0)
    with pytest.raises(ValueError):
        CorrelatorSet(1.5, 0, 0, 0)


def test_classicality_conditions():
    assert classicality_conditions(CorrelatorSet(0.0, 0.3, -0.1, 0.2)).classical_allowed
    assert classicality_conditions(CorrelatorSet(0.4, 0.2, 0.2, 0.2)).classical_allowed
    f = classicality_conditions(CorrelatorSet(0.4, 0.3, -0.1, 0.2))
    assert not f.classical_allowed and not f.zero_magnetization and not f.xy_isotropy


def test_ssb_pair_matrix_product_state():
    # |+x tilted>^{x2}: a product state reproduced exactly from its correlators
    t = 0.7
    v = np.array([np.cos(t / 2), np.sin(t / 2)])
    rho = np.kron(np.outer(v, v), np.outer(v, v))
    gx, gz = np.sin(t), np.cos(t)
    c = CorrelatorSet(G_z=gz, G_xx=gx * gx, G_yy=0.0, G_zz=gz * gz, G_x=gx, G_xz=gx * gz)
    m = ssb_pair_matrix(c)
    assert np.trace(m).real == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(m, rho, atol=1e-15)
    assert witness_norm(DensityMatrix(m, Partition.qubits(2))) < 1e-14


def test_ssb_pair_matrix_rejects_inconsistent():
    with pytest.raises(InvalidStateError):
        ssb_pair_matrix(CorrelatorSet(0.0, 0.0, 0.0, 0.0, G_x=1.0, G_xz=0.0))


def test_theorem2_report_on_disturbed_state(rng):
    rho = random_density_matrix(Partition.qubits(2), rng)
    r = check_theorem2(rho, LocalMeasurement.computational(rho.partition))
    assert not r.classical and r.witness_norm > 0 and r.implication_holds
