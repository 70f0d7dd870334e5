import numpy as np
import pytest

from minoma.channel import (
    ChannelRealization,
    GeometryConfig,
    UserGeometry,
    draw_correlated_fading,
    draw_fading,
    fading_correlation_matrix,
    path_loss,
    realize_channel,
    scalar_gain,
    scalar_gains,
)
from minoma.errors import ConfigError


def fig_geometry(**overrides):
    params = dict(
        n_tx=3,
        n_heads=3,
        n_edge_users=3,
        head_radius_m=150.0,
        inter_site_m=600.0,
        edge_coverage_m=150.0,
    )
    params.update(overrides)
    return GeometryConfig(**params)


class TestPathLoss:
    def test_unit_distance(self):
        assert path_loss(1.0, 4.0) == 1.0

    def test_cell_edge(self):
        assert path_loss(600.0, 4.0) == pytest.approx(7.7160e-12, rel=1e-4)

    def test_head_distance(self):
        assert path_loss(150.0, 4.0) == pytest.approx(1.9753e-9, rel=1e-4)

    def test_monotone_decreasing(self):
        distances = np.linspace(10.0, 600.0, 50)
        losses = [path_loss(d, 4.0) for d in distances]
        assert all(a > b for a, b in zip(losses, losses[1:]))

    def test_rejects_nonpositive(self):
        with pytest.raises(ConfigError):
            path_loss(0.0, 4.0)
        with pytest.raises(ConfigError):
            path_loss(-5.0, 4.0)
        with pytest.raises(ConfigError):
            path_loss(100.0, 0.0)


class TestFading:
    def test_unit_variance(self):
        rng = np.random.default_rng(7)
        h = draw_fading(1000, 1000, rng)  # 1e6 entries
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.01)

    def test_deterministic_under_seed(self):
        a = draw_fading(4, 3, np.random.default_rng(42))
        b = draw_fading(4, 3, np.random.default_rng(42))
        np.testing.assert_array_equal(a, b)

    def test_rejects_zero_users(self):
        with pytest.raises(ConfigError):
            draw_fading(0, 3, np.random.default_rng(0))


class TestCorrelatedFading:
    def test_rho_one_reproduces_head(self):
        rng = np.random.default_rng(3)
        head = draw_fading(1, 64, rng)[0]
        mixed = draw_correlated_fading(head, 1.0, rng)
        np.testing.assert_allclose(mixed, head)

    @pytest.mark.parametrize("rho", [0.0, 0.5])
    def test_sample_correlation(self, rho):
        rng = np.random.default_rng(11)
        head = draw_fading(1, 10**6, rng)[0]
        mixed = draw_correlated_fading(head, rho, rng)
        corr = np.vdot(head, mixed) / (np.linalg.norm(head) * np.linalg.norm(mixed))
        assert abs(corr) == pytest.approx(rho, abs=0.01)

    def test_variance_preserved(self):
        rng = np.random.default_rng(5)
        head = draw_fading(1, 2 * 10**5, rng)[0]
        for rho in (0.1, 0.5, 0.9):
            mixed = draw_correlated_fading(head, rho, rng)
            assert np.mean(np.abs(mixed) ** 2) == pytest.approx(1.0, abs=0.01)

    def test_rejects_bad_rho(self):
        rng = np.random.default_rng(0)
        head = draw_fading(1, 8, rng)[0]
        with pytest.raises(ConfigError):
            draw_correlated_fading(head, 1.5, rng)
        with pytest.raises(ConfigError):
            draw_correlated_fading(head, -0.1, rng)


class TestRealizeChannel:
    def test_shapes_and_finite(self):
        real = realize_channel(fig_geometry(), seed=1)
        assert real.H.shape == (6, 3)
        assert np.all(np.isfinite(real.H))

    def test_edge_users_in_annulus(self):
        real = realize_channel(fig_geometry(), seed=2)
        for g in real.geometry[3:]:
            assert 450.0 <= g.distance_m <= 600.0

    def test_heads_in_disc(self):
        real = realize_channel(fig_geometry(), seed=2)
        for g in real.geometry[:3]:
            assert 0.0 < g.distance_m <= 150.0

    def test_pure_in_config_and_seed(self):
        a = realize_channel(fig_geometry(), seed=9)
        b = realize_channel(fig_geometry(), seed=9)
        np.testing.assert_array_equal(a.H, b.H)
        assert a.geometry == b.geometry

    def test_rejects_head_disc_into_annulus(self):
        with pytest.raises(ConfigError):
            realize_channel(
                fig_geometry(head_radius_m=500.0, edge_coverage_m=150.0), seed=0
            )

    def test_correlated_pairing_recorded(self):
        real = realize_channel(fig_geometry(rho=0.5), seed=3)
        assert real.correlated_with == {3: 0, 4: 1, 5: 2}
        corr = fading_correlation_matrix(real.H)
        # three antennas give a noisy estimate; just demand the paired head
        # correlation is well above an unpaired typical value on average
        paired = np.mean([corr[m, h] for m, h in real.correlated_with.items()])
        assert paired > 0.3


class TestScalarGain:
    def _realization(self, H):
        geometry = tuple(
            UserGeometry(user_id=i, distance_m=100.0, ue_id=i)
            for i in range(H.shape[0])
        )
        return ChannelRealization(H=H, geometry=geometry, rho=0.0, seed=0)

    def test_zero_row(self):
        real = self._realization(np.zeros((2, 3), dtype=complex))
        assert scalar_gain(real, 0).gain == 0.0

    def test_unit_row(self):
        H = np.zeros((1, 4), dtype=complex)
        H[0, 0] = 1.0
        assert scalar_gain(self._realization(H), 0).gain == 1.0

    def test_complex_row(self):
        H = np.array([[1 + 1j, 1 - 1j]])
        assert scalar_gain(self._realization(H), 0).gain == pytest.approx(4.0)

    def test_rejects_unknown_id(self):
        real = self._realization(np.ones((2, 2), dtype=complex))
        with pytest.raises(ConfigError):
            scalar_gain(real, 5)

    def test_batch_matches_single(self):
        real = realize_channel(fig_geometry(), seed=4)
        singles = [scalar_gain(real, u) for u in range(real.n_users)]
        for a, b in zip(scalar_gains(real), singles):
            assert a == b


class TestCorrelationMatrix:
    def test_bounds_and_diagonal(self):
        real = realize_channel(fig_geometry(n_tx=8, rho=0.7), seed=6)
        corr = fading_correlation_matrix(real.H)
        assert np.all(corr <= 1.0 + 1e-12)
        np.testing.assert_allclose(np.diag(corr), 1.0)

    def test_scale_invariance(self):
        rng = np.random.default_rng(8)
        H = draw_fading(4, 16, rng)
        scaled = H * np.array([1.0, 10.0, 0.01, 3.0])[:, None]
        np.testing.assert_allclose(
            fading_correlation_matrix(H), fading_correlation_matrix(scaled)
        )
