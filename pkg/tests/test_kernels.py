"""The numba and numpy kernel twins must compute the same math."""

import subprocess
import sys

import numpy as np
import pytest

from gradsift import kernels
from gradsift.model import Topology, init_model


def _random_case(rng, h, nin, timesteps, batch):
    model = init_model(Topology(nin, h, 1), int(rng.integers(0, 10_000)))
    model.params[:] += rng.normal(0.0, 0.3, model.params.size)
    xs = rng.normal(0.0, 1.0, (batch, timesteps, nin))
    ys = rng.normal(0.0, 1.0, batch)
    return model.views(), xs, ys


needs_numba = pytest.mark.skipif(not kernels.numba_available, reason="numba not importable")


@needs_numba
@pytest.mark.parametrize("h,nin,timesteps,batch", [
    (1, 1, 1, 1), (4, 1, 1, 32), (8, 2, 3, 7), (32, 1, 1, 16), (3, 2, 5, 5),
])
def test_backends_agree(rng, h, nin, timesteps, batch):
    views, xs, ys = _random_case(rng, h, nin, timesteps, batch)
    f_nb = kernels.forward_batch_numba(*views, xs)
    f_np = kernels._forward_batch_numpy(*views, xs)
    np.testing.assert_allclose(f_nb, f_np, rtol=1e-12, atol=1e-14)

    p_nb, g_nb = kernels.grads_batch_numba(*views, xs, ys)
    p_np, g_np = kernels._grads_batch_numpy(*views, xs, ys)
    np.testing.assert_allclose(p_nb, p_np, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(g_nb, g_np, rtol=1e-10, atol=1e-13)


@pytest.mark.parametrize("impl", ["numpy", "numba"])
def test_batch_equals_per_sample(rng, impl):
    if impl == "numba" and not kernels.numba_available:
        pytest.skip("numba not importable")
    grads_fn = kernels.grads_batch_numba if impl == "numba" else kernels._grads_batch_numpy
    views, xs, ys = _random_case(rng, 6, 1, 2, 9)
    preds_all, grads_all = grads_fn(*views, xs, ys)
    for s in range(xs.shape[0]):
        p1, g1 = grads_fn(*views, xs[s : s + 1], ys[s : s + 1])
        np.testing.assert_allclose(p1[0], preds_all[s], rtol=1e-12)
        np.testing.assert_allclose(g1[0], grads_all[s], rtol=1e-10, atol=1e-14)


def test_forward_and_grads_consistent(rng):
    # preds returned by the gradient kernel equal the forward kernel's
    views, xs, ys = _random_case(rng, 5, 1, 3, 8)
    preds, _ = kernels.grads_batch(*views, xs, ys)
    np.testing.assert_allclose(preds, kernels.forward_batch(*views, xs), rtol=1e-12)


def test_clamp_keeps_saturated_inputs_finite(rng):
    views, xs, ys = _random_case(rng, 4, 1, 2, 3)
    xs = xs * 1e6  # would overflow exp without the clamp
    preds, grads = kernels.grads_batch(*views, xs, ys)
    assert np.all(np.isfinite(preds))
    assert np.all(np.isfinite(grads))


def test_env_flag_selects_numpy_backend():
    code = (
        "from gradsift import kernels; "
        "assert kernels.backend_name() == 'numpy', kernels.backend_name(); "
        "print('ok')"
    )
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"PATH": "/usr/bin:/bin", "GRADSIFT_NUMBA": "0"},
        capture_output=True,
        text=True,
        cwd="/",
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "ok"
