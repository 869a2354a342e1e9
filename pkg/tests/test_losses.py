"""Branch and joint losses against brute-force formula oracles."""

import math

import numpy as np
import pytest
import torch

from jddip.bayer import DimensionError, make_mask
from jddip.networks import ArchSpec, build_network, make_seed
from jddip.training import demosaic_loss, denoise_loss, joint_loss, lift_torch


def oracle_mse(a: np.ndarray, b: np.ndarray) -> float:
    """Explicit elementwise loop, independent of any tensor library."""
    total = 0.0
    for x, y in zip(a.ravel(), b.ravel()):
        total += (x - y) ** 2
    return total / a.size


def oracle_demosaic_loss(dm, dn_raw, noisy_3ch, mask, alpha):
    """Direct evaluation: lift the 1ch prediction, mask both terms."""
    h, w = dn_raw.shape
    lifted = np.zeros((h, w, 3))
    for i in range(h):
        for j in range(w):
            for c in range(3):
                if mask[i, j, c] == 1:
                    lifted[i, j, c] = dn_raw[i, j]
    return oracle_mse(lifted * mask, dm * mask) + alpha * oracle_mse(
        noisy_3ch * mask, dm * mask
    )


def _t(arr):
    if arr.ndim == 2:
        return torch.from_numpy(arr[None, None])
    return torch.from_numpy(np.transpose(arr, (2, 0, 1))[None])


class TestDenoiseLoss:
    def test_zero_residual(self):
        raw = torch.rand(1, 1, 8, 8, dtype=torch.float64)
        assert float(denoise_loss(raw, raw)) == 0.0

    def test_constant_case(self):
        zero = torch.zeros(1, 1, 8, 8, dtype=torch.float64)
        half = torch.full((1, 1, 8, 8), 0.5, dtype=torch.float64)
        assert float(denoise_loss(zero, half)) == pytest.approx(0.25, abs=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_loop_oracle(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.uniform(size=(8, 8))
        b = rng.uniform(size=(8, 8))
        value = float(denoise_loss(_t(a), _t(b)))
        assert value == pytest.approx(oracle_mse(a, b), abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            denoise_loss(torch.zeros(1, 1, 8, 8), torch.zeros(1, 1, 8, 10))


class TestDemosaicLoss:
    def test_zero_residual(self):
        rng = np.random.default_rng(0)
        mask = make_mask(8, 8)
        raw = rng.uniform(size=(8, 8))
        lifted = raw[:, :, None] * mask
        mask_t = _t(mask)
        value = demosaic_loss(_t(lifted), _t(lifted), _t(lifted), mask_t, alpha=0.1)
        assert float(value) == 0.0

    def test_alpha_zero_drops_data_term(self):
        rng = np.random.default_rng(1)
        mask_t = _t(make_mask(8, 8))
        dm = _t(rng.uniform(size=(8, 8, 3)))
        guide = _t(rng.uniform(size=(8, 8, 3)))
        obs = _t(rng.uniform(size=(8, 8, 3)))
        only_guide = demosaic_loss(dm, guide, obs, mask_t, alpha=0.0)
        expected = torch.mean((guide * mask_t - dm * mask_t) ** 2)
        assert float(only_guide) == pytest.approx(float(expected), abs=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_formula_oracle(self, seed):
        rng = np.random.default_rng(seed + 10)
        mask = make_mask(8, 8)
        dm = rng.uniform(size=(8, 8, 3))
        dn_raw = rng.uniform(size=(8, 8))
        obs = rng.uniform(size=(8, 8, 3)) * mask
        lifted = lift_torch(_t(dn_raw), _t(mask))
        value = float(demosaic_loss(_t(dm), lifted, _t(obs), _t(mask), alpha=0.1))
        expected = oracle_demosaic_loss(dm, dn_raw, obs, mask, alpha=0.1)
        assert value == pytest.approx(expected, abs=1e-12)

    def test_shape_mismatch(self):
        mask_t = _t(make_mask(8, 8))
        with pytest.raises(DimensionError):
            demosaic_loss(
                torch.zeros(1, 3, 8, 8), torch.zeros(1, 3, 8, 8),
                torch.zeros(1, 3, 10, 8), mask_t, 0.1,
            )


class TestJointLoss:
    def test_zero(self):
        assert joint_loss(torch.tensor(0.0), torch.tensor(0.0)) == 0.0

    def test_hand_value(self):
        value = joint_loss(torch.tensor(0.04), torch.tensor(0.09))
        assert float(value) == pytest.approx(0.5, abs=1e-12)

    def test_monotone(self):
        base = float(joint_loss(torch.tensor(0.1), torch.tensor(0.2)))
        assert float(joint_loss(torch.tensor(0.15), torch.tensor(0.2))) >= base
        assert float(joint_loss(torch.tensor(0.1), torch.tensor(0.25))) >= base

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            joint_loss(torch.tensor(-0.1), torch.tensor(0.0))

    def test_plain_floats_accepted(self):
        assert joint_loss(0.04, 0.09) == pytest.approx(0.5, abs=1e-15)


class TestGradientFlow:
    @pytest.fixture
    def toy_setup(self):
        arch = ArchSpec(scales=2, channels=8, skip_channels=4, input_channels=4)
        net_dn = build_network(1, arch, rng_seed=0, dtype=torch.float64)
        net_dm = build_network(3, arch, rng_seed=1, dtype=torch.float64)
        z_dn = make_seed(4, 16, 16, "normal", 2, dtype=torch.float64)
        z_dm = make_seed(4, 16, 16, "normal", 3, dtype=torch.float64)
        rng = np.random.default_rng(4)
        mask = make_mask(16, 16)
        raw = rng.uniform(size=(16, 16))
        obs = rng.uniform(size=(16, 16, 3)) * mask
        return net_dn, net_dm, z_dn, z_dm, _t(mask), _t(raw), _t(obs)

    @staticmethod
    def _joint(net_dn, net_dm, z_dn, z_dm, mask_t, raw_t, obs_t):
        out_dn = net_dn(z_dn)
        out_dm = net_dm(z_dm)
        l_dn = denoise_loss(out_dn, raw_t)
        l_dm = demosaic_loss(out_dm, lift_torch(out_dn, mask_t), obs_t, mask_t, 0.1)
        return joint_loss(l_dn, l_dm)

    def test_feedback_path_grad_nonzero(self, toy_setup):
        net_dn, net_dm, z_dn, z_dm, mask_t, raw_t, obs_t = toy_setup
        out_dn = net_dn(z_dn)
        out_dm = net_dm(z_dm)
        l_dm = demosaic_loss(out_dm, lift_torch(out_dn, mask_t), obs_t, mask_t, 0.1)
        net_dn.zero_grad()
        l_dm.backward()
        grad_norm = math.fsum(
            float(p.grad.abs().sum()) for p in net_dn.parameters() if p.grad is not None
        )
        assert grad_norm > 0

    def test_joint_gradient_matches_finite_differences(self, toy_setup):
        net_dn, net_dm, z_dn, z_dm, mask_t, raw_t, obs_t = toy_setup
        args = (net_dn, net_dm, z_dn, z_dm, mask_t, raw_t, obs_t)
        loss = self._joint(*args)
        net_dn.zero_grad()
        net_dm.zero_grad()
        loss.backward()
        rng = np.random.default_rng(6)
        step = 1e-4
        for net in (net_dn, net_dm):
            params = [p for p in net.parameters() if p.grad is not None]
            for p in rng.choice(len(params), size=3, replace=False):
                param = params[p]
                flat = param.data.view(-1)
                idx = int(rng.integers(flat.numel()))
                original = flat[idx].item()
                flat[idx] = original + step
                plus = float(self._joint(*args).detach())
                flat[idx] = original - step
                minus = float(self._joint(*args).detach())
                flat[idx] = original
                fd = (plus - minus) / (2 * step)
                auto = param.grad.view(-1)[idx].item()
                assert fd == pytest.approx(auto, rel=1e-3, abs=1e-9)
