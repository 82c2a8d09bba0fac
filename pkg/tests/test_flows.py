"""Tests for the velocity field families."""

import math

import numpy as np
import pytest

from ksflow.flows import FlowSpec, divergence_check, make_flow
from ksflow.snapshots import write_snapshot
from ksflow.spectral import ScalarField, TorusGrid


class TestFlowSpec:
    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown flow kind"):
            FlowSpec(kind="vortex")

    def test_alternating_requires_seed(self):
        with pytest.raises(ValueError, match="seed"):
            FlowSpec(kind="alternating-shear")

    def test_negative_amplitude(self):
        with pytest.raises(ValueError, match="A must be"):
            FlowSpec(kind="shear", A=-1.0)


class TestBasicKinds:
    def test_zero(self):
        grid = TorusGrid(2, 16)
        u = make_flow(FlowSpec(kind="zero"), grid).fields(0.0)
        assert all(np.all(c == 0.0) for c in u)

    @pytest.mark.parametrize("d", [2, 3])
    def test_shear_divergence_free(self, d):
        grid = TorusGrid(d, 32)
        u = make_flow(FlowSpec(kind="shear", m=1), grid).fields(0.0)
        assert divergence_check(u, grid) <= 1e-12

    def test_alternating_each_phase_divergence_free(self):
        grid = TorusGrid(2, 32)
        sampler = make_flow(FlowSpec(kind="alternating-shear", seed=7), grid)
        for t in (0.0, 1.2, 2.5, 3.9):
            assert divergence_check(sampler.fields(t), grid) <= 1e-12

    def test_relaxed_linear_constant(self):
        grid = TorusGrid(2, 16)
        u = make_flow(FlowSpec(kind="relaxed-linear"), grid).fields(0.0)
        for c in u:
            assert np.ptp(c) == 0.0
        assert divergence_check(u, grid) <= 1e-13

    @pytest.mark.parametrize(
        "kind,kwargs",
        [
            ("shear", {"m": 1}),
            ("relaxed-linear", {}),
            ("alternating-shear", {"seed": 3}),
        ],
    )
    def test_unit_normalization(self, kind, kwargs):
        grid = TorusGrid(2, 32)
        u = make_flow(FlowSpec(kind=kind, **kwargs), grid).fields(0.3)
        mag = np.sqrt(sum(c * c for c in u))
        assert abs(float(mag.max()) - 1.0) <= 1e-6

    def test_sum_of_shears_divergence_free(self):
        grid = TorusGrid(2, 32)
        u1 = make_flow(FlowSpec(kind="shear", m=1), grid).fields(0.0)
        u2 = make_flow(FlowSpec(kind="shear", m=3), grid).fields(0.0)
        total = tuple(a + b for a, b in zip(u1, u2))
        assert divergence_check(total, grid) <= 1e-12


class TestDivergenceCheck:
    def test_detects_non_solenoidal(self):
        # sawtooth-like profile along x1 in the first component
        grid = TorusGrid(2, 32)
        x, _ = grid.meshgrid()
        u = (np.sin(x) * np.cos(x), np.zeros(grid.shape))
        assert divergence_check(u, grid) > 0.5


class TestAlternating:
    def test_axis_cycles(self):
        grid = TorusGrid(3, 16)
        sampler = make_flow(
            FlowSpec(kind="alternating-shear", seed=1, tau_sw=1.0), grid
        )
        for idx in range(3):
            u = sampler.fields(idx + 0.5)
            active = [j for j in range(3) if np.max(np.abs(u[j])) > 0]
            assert active == [idx % 3]

    def test_phases_deterministic(self):
        grid = TorusGrid(2, 16)
        a = make_flow(FlowSpec(kind="alternating-shear", seed=11), grid)
        b = make_flow(FlowSpec(kind="alternating-shear", seed=11), grid)
        for t in (0.5, 1.5, 7.25):
            for ca, cb in zip(a.fields(t), b.fields(t)):
                assert np.array_equal(ca, cb)

    def test_different_seeds_differ(self):
        grid = TorusGrid(2, 16)
        a = make_flow(FlowSpec(kind="alternating-shear", seed=11), grid).fields(0.5)
        b = make_flow(FlowSpec(kind="alternating-shear", seed=12), grid).fields(0.5)
        assert not np.allclose(a[0], b[0])

    def test_switch_times(self):
        grid = TorusGrid(2, 16)
        s = make_flow(FlowSpec(kind="alternating-shear", seed=0, tau_sw=0.5), grid)
        assert s.next_switch(0.0) == pytest.approx(0.5)
        assert s.next_switch(0.49) == pytest.approx(0.5)
        # a time landing on the boundary (up to round-off) belongs to the next interval
        assert s.next_switch(0.5 - 1e-15) == pytest.approx(1.0)
        assert s.interval_index(0.74) == 1

    def test_stationary_never_switches(self):
        grid = TorusGrid(2, 16)
        s = make_flow(FlowSpec(kind="shear"), grid)
        assert s.next_switch(3.0) == math.inf


class TestFromFile:
    def test_valid_round_trip(self, tmp_path):
        grid = TorusGrid(2, 16)
        _, y = grid.meshgrid()
        u1 = ScalarField(grid, np.sin(y))
        u2 = ScalarField(grid, np.zeros(grid.shape))
        p1, p2 = tmp_path / "u1.ksf", tmp_path / "u2.ksf"
        write_snapshot(u1, p1)
        write_snapshot(u2, p2)
        spec = FlowSpec(kind="from-file", files=(str(p1), str(p2)))
        u = make_flow(spec, grid).fields(0.0)
        assert abs(float(np.max(np.abs(u[0]))) - 1.0) <= 1e-12
        assert divergence_check(u, grid) <= 1e-12

    def test_rejects_divergent_input(self, tmp_path):
        grid = TorusGrid(2, 16)
        x, y = grid.meshgrid()
        u1 = ScalarField(grid, np.sin(x))  # d/dx sin(x) != 0
        u2 = ScalarField(grid, np.zeros(grid.shape))
        p1, p2 = tmp_path / "u1.ksf", tmp_path / "u2.ksf"
        write_snapshot(u1, p1)
        write_snapshot(u2, p2)
        spec = FlowSpec(kind="from-file", files=(str(p1), str(p2)))
        with pytest.raises(ValueError, match="divergence-free"):
            make_flow(spec, grid).fields(0.0)

    def test_wrong_component_count(self, tmp_path):
        grid = TorusGrid(2, 16)
        p = tmp_path / "u1.ksf"
        write_snapshot(ScalarField.constant(grid, 1.0), p)
        with pytest.raises(ValueError, match="component files"):
            make_flow(FlowSpec(kind="from-file", files=(str(p),)), grid).fields(0.0)


class TestKoopmanEigenfunction:
    def test_shear_leaves_profile_invariant(self):
        # transporting phi(x2) under u = (g(x2), 0): u . grad phi vanishes
        grid = TorusGrid(2, 32)
        u = make_flow(FlowSpec(kind="shear", m=1), grid).fields(0.0)
        _, y = grid.meshgrid()
        phi = np.cos(2 * y)
        from ksflow.spectral import Multiplier, apply_multiplier, forward_transform, inverse_transform

        parts = apply_multiplier(
            forward_transform(ScalarField(grid, phi)), Multiplier.gradient(grid)
        )
        advect = sum(
            u[j] * inverse_transform(parts[j]).values for j in range(2)
        )
        assert np.max(np.abs(advect)) <= 1e-13
