"""Parameters, state construction, equations of motion, contrast, winding."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import ALL_KINDS, make_random_state, reference_derivatives
from rltransport import (
    CustomState,
    LatticeIndexError,
    LatticeState,
    ModelKind,
    ParameterError,
    SingleSite,
    build_state,
    effective_contrast,
    make_params,
    nonlinear_shift,
    rhs,
    winding_number,
)
from rltransport.models import contrast_profile


class TestMakeParams:
    def test_linear_balanced(self):
        p = make_params(ModelKind.LINEAR, 0.0, 2.0, 0.0)
        assert p.mu == 0.5 and p.nu == 0.5

    def test_strong_imbalance(self):
        p = make_params("a", -0.4, 2.0, 3.0)
        assert p.mu == pytest.approx(0.9) and p.nu == pytest.approx(0.1)

    def test_negated(self):
        p = make_params("a", -0.1, 2.0, 3.0, negate_linear=True)
        assert p.mu == pytest.approx(-0.6) and p.nu == pytest.approx(-0.4)

    def test_exact_coupling_relation(self):
        for dg in (-0.5, -0.137, 0.0, 0.25, 0.5):
            p = make_params("c", dg, 1.0, 2.0)
            assert p.mu == 0.5 - dg and p.nu == 0.5 + dg

    @pytest.mark.parametrize("kwargs,field", [
        (dict(delta_g=0.51), "delta_g"),
        (dict(delta_g=-0.6), "delta_g"),
        (dict(gamma_a=-1.0), "gamma_a"),
        (dict(U=-0.1), "U"),
    ])
    def test_domain_errors_name_the_field(self, kwargs, field):
        full = dict(delta_g=0.1, gamma_a=2.0, U=1.0)
        full.update(kwargs)
        with pytest.raises(ParameterError, match=field):
            make_params("a", **full)

    def test_unknown_kind(self):
        with pytest.raises(ParameterError, match="unknown model kind"):
            make_params("x", 0.1, 2.0)

    def test_kind_parse_case_insensitive(self):
        assert ModelKind.parse("LINEAR") is ModelKind.LINEAR
        assert ModelKind.parse("a") is ModelKind.A


class TestStateConstruction:
    def test_single_site(self):
        s = build_state(SingleSite(0, "b"), 4)
        assert s.norm() == pytest.approx(1.0)
        assert s.b[s.index(0)] == 1.0
        assert np.all(s.decay == 0)

    def test_custom_normalized(self):
        spec = CustomState(((0, "b", 3.0), (1, "a", 4.0j)))
        s = build_state(spec, 3)
        assert s.norm() == pytest.approx(1.0)
        assert abs(s.b[s.index(0)]) == pytest.approx(0.6)
        assert abs(s.a[s.index(1)]) == pytest.approx(0.8)

    def test_zero_norm_rejected_at_construction(self):
        with pytest.raises(ParameterError, match="zero norm"):
            CustomState(((0, "b", 0.0),))

    def test_out_of_range_cell(self):
        with pytest.raises(LatticeIndexError):
            build_state(SingleSite(5, "b"), 4)

    def test_bad_sublattice(self):
        with pytest.raises(ParameterError):
            SingleSite(0, "c")

    def test_index_bounds(self):
        s = build_state(SingleSite(0, "b"), 2)
        assert s.index(-2) == 0 and s.index(2) == 4
        with pytest.raises(LatticeIndexError):
            s.index(3)

    def test_cells(self):
        s = build_state(SingleSite(0, "b"), 2)
        assert list(s.cells) == [-2, -1, 0, 1, 2]


class TestNonlinearShift:
    def test_zero_when_nonlinearity_off(self):
        state = make_random_state(4, seed=7)
        for kind in ALL_KINDS:
            p = make_params(kind, 0.2, 2.0, 0.0)
            assert nonlinear_shift(p, state, 1) == 0.0

    def test_intercell_shift_from_neutral_neighbor(self):
        # |0,b> feeds the bond into cell 1 through |b_0|^2
        state = build_state(SingleSite(0, "b"), 4)
        p = make_params("a", -0.4, 2.0, 3.0)
        assert nonlinear_shift(p, state, 1) == pytest.approx(3.0)
        assert nonlinear_shift(p, state, 0) == 0.0

    def test_lossy_only_shift_vanishes_initially(self):
        state = build_state(SingleSite(0, "b"), 4)
        p = make_params("c", -0.4, 2.0, 5.0)
        assert nonlinear_shift(p, state, 1) == 0.0

    def test_neutral_only_shift(self):
        state = build_state(SingleSite(0, "b"), 4)
        p = make_params("e", -0.4, 2.0, 5.0)
        assert nonlinear_shift(p, state, 0) == pytest.approx(5.0)  # eta_0 = U|b_0|^2
        assert nonlinear_shift(p, state, 1) == 0.0

    def test_left_edge_missing_neighbor(self):
        spec = CustomState(((-4, "b", 1.0),))
        state = build_state(spec, 4)
        p = make_params("a", 0.0, 2.0, 2.0)
        # xi_{-N} sees no b_{-N-1}; only |a_{-N}|^2 = 0 contributes
        assert nonlinear_shift(p, state, -4) == 0.0

    def test_out_of_range(self):
        state = build_state(SingleSite(0, "b"), 4)
        p = make_params("a", 0.0, 2.0, 2.0)
        with pytest.raises(LatticeIndexError):
            nonlinear_shift(p, state, 5)


class TestRhs:
    def test_linear_single_site_derivative(self):
        state = build_state(SingleSite(0, "b"), 3)
        p = make_params("linear", 0.1, 2.0)
        da, db, dd = rhs(p, state)
        i0 = state.index(0)
        assert da[i0] == pytest.approx(1j * p.mu)
        assert da[i0 + 1] == pytest.approx(1j * p.nu)
        assert np.all(db == 0) and np.all(dd == 0)

    def test_intercell_nonlinearity_weakens_forward_bond(self):
        state = build_state(SingleSite(0, "b"), 3)
        p = make_params("a", 0.1, 2.0, 2.0)
        da, _, _ = rhs(p, state)
        i0 = state.index(0)
        assert da[i0 + 1] == pytest.approx(1j * (p.nu - p.U))
        assert da[i0] == pytest.approx(1j * p.mu)

    def test_zero_state_zero_derivative(self):
        n = 9
        state = LatticeState(4, np.zeros(n, complex), np.zeros(n, complex), np.zeros(n))
        for kind in ALL_KINDS:
            da, db, dd = rhs(make_params(kind, -0.3, 1.5, 4.0), state)
            assert not da.any() and not db.any() and not dd.any()

    def test_decay_rate_tracks_lossy_occupation(self):
        state = make_random_state(5, seed=3)
        p = make_params("b", 0.2, 1.7, 2.0)
        _, _, dd = rhs(p, state)
        np.testing.assert_allclose(dd, 2 * 1.7 * np.abs(state.a) ** 2, rtol=1e-13)

    @given(seed=st.integers(0, 10_000))
    def test_all_kinds_coincide_without_nonlinearity(self, seed):
        state = make_random_state(6, seed)
        reference = rhs(make_params("linear", 0.17, 1.3, 0.0), state)
        for kind in ALL_KINDS[1:]:
            da, db, dd = rhs(make_params(kind, 0.17, 1.3, 0.0), state)
            assert np.array_equal(da, reference[0])
            assert np.array_equal(db, reference[1])
            assert np.array_equal(dd, reference[2])

    def test_linear_ignores_inert_u(self):
        state = make_random_state(6, seed=11)
        base = rhs(make_params("linear", 0.17, 1.3, 0.0), state)
        loaded = rhs(make_params("linear", 0.17, 1.3, 3.0), state)
        for got, want in zip(loaded, base):
            assert np.array_equal(got, want)

    @given(seed=st.integers(0, 10_000),
           kind=st.sampled_from(ALL_KINDS),
           delta_g=st.floats(-0.5, 0.5),
           U=st.floats(0.0, 8.0))
    def test_hermitian_limit_conjugation_antisymmetry(self, seed, kind, delta_g, U):
        # without loss, conjugating the state flips the sign of the conjugated
        # derivative (time reversal)
        state = make_random_state(5, seed)
        p = make_params(kind, delta_g, 0.0, U)
        da, db, _ = rhs(p, state)
        conj = LatticeState(5, np.conj(state.a), np.conj(state.b), state.decay.copy())
        da_c, db_c, _ = rhs(p, conj)
        assert np.array_equal(da_c, -np.conj(da))
        assert np.array_equal(db_c, -np.conj(db))

    @given(seed=st.integers(0, 10_000),
           kind=st.sampled_from(ALL_KINDS),
           delta_g=st.floats(-0.5, 0.5),
           gamma_a=st.floats(0.0, 4.0),
           U=st.floats(0.0, 8.0))
    def test_matches_reference_derivatives(self, seed, kind, delta_g, gamma_a, U):
        state = make_random_state(5, seed)
        p = make_params(kind, delta_g, gamma_a, U)
        da, db, dd = rhs(p, state)
        ra, rb, rd = reference_derivatives(kind, p.mu, p.nu, gamma_a, U,
                                           state.a, state.b)
        np.testing.assert_allclose(da, ra, atol=1e-14)
        np.testing.assert_allclose(db, rb, atol=1e-14)
        np.testing.assert_allclose(dd, rd, atol=1e-14)


class TestEffectiveContrast:
    def test_position_and_state_independent_when_linear(self):
        p = make_params("linear", -0.2, 2.0)
        expected = abs(p.nu) - abs(p.mu)
        for seed in (0, 1):
            state = make_random_state(5, seed)
            for m in (-5, -1, 0, 2, 5):
                assert effective_contrast(p, state, m) == pytest.approx(expected)

    def test_u_zero_matches_linear_for_all_kinds(self):
        state = make_random_state(5, seed=2)
        for kind in ALL_KINDS:
            p = make_params(kind, -0.2, 2.0, 0.0)
            assert effective_contrast(p, state, 1) == pytest.approx(abs(p.nu) - abs(p.mu))

    def test_initial_contrast_model_a(self):
        state = build_state(SingleSite(0, "b"), 5)
        p = make_params("a", -0.4, 2.0, 5.0)
        assert effective_contrast(p, state, 1) == pytest.approx(4.0)

    def test_initial_contrast_model_c_unmodified(self):
        state = build_state(SingleSite(0, "b"), 5)
        p = make_params("c", -0.4, 2.0, 5.0)
        for m in (-2, 0, 1, 3):
            assert effective_contrast(p, state, m) == pytest.approx(abs(p.nu) - abs(p.mu))

    def test_model_e_contrast_uses_bond_into_cell(self):
        state = build_state(SingleSite(0, "b"), 5)
        p = make_params("e", -0.4, 2.0, 5.0)
        # bond from cell 0 into cell 1 carries eta_0 = U|b_0|^2
        assert effective_contrast(p, state, 1) == pytest.approx(abs(p.nu - 5.0) - abs(p.mu))
        assert effective_contrast(p, state, 0) == pytest.approx(abs(p.nu) - abs(p.mu))

    def test_intracell_kinds_use_intracell_analogue(self):
        state = build_state(SingleSite(0, "b"), 5)
        for kind in ("b", "d"):
            p = make_params(kind, -0.4, 2.0, 5.0)
            shift = nonlinear_shift(p, state, 0)
            assert effective_contrast(p, state, 0) == pytest.approx(
                abs(p.nu) - abs(p.mu - shift))

    def test_profile_matches_scalar(self):
        state = make_random_state(6, seed=9)
        for kind in ALL_KINDS:
            p = make_params(kind, -0.3, 2.0, 4.0)
            profile = contrast_profile(p, state.a, state.b)
            scalar = [effective_contrast(p, state, m) for m in state.cells]
            np.testing.assert_allclose(profile, scalar, rtol=1e-14)


class TestWindingNumber:
    def test_topological(self):
        assert winding_number(0.2, 0.8) == 1

    def test_trivial(self):
        assert winding_number(0.8, 0.2) == 0

    def test_depends_on_magnitudes_only(self):
        assert winding_number(-0.6, -0.9) == 1

    def test_degenerate_rejected(self):
        with pytest.raises(ParameterError, match="gap closes"):
            winding_number(0.5, 0.5)
        with pytest.raises(ParameterError, match="gap closes"):
            winding_number(0.5, -0.5)

    def test_both_zero_rejected(self):
        with pytest.raises(ParameterError):
            winding_number(0.0, 0.0)

    def test_against_threshold_oracle(self):
        rng = np.random.default_rng(42)
        checked = 0
        while checked < 1000:
            mu, nu = rng.uniform(-1.5, 1.5, size=2)
            if abs(abs(mu) - abs(nu)) < 1e-3 or (mu == 0 and nu == 0):
                continue
            assert winding_number(mu, nu) == (1 if abs(nu) > abs(mu) else 0)
            checked += 1
