"""The compiled and pure-Python kernels must agree bitwise."""

import subprocess
import sys

import numpy as np
import pytest

import bandit_bakery._kernels_py as pyk
from bandit_bakery import backend

try:
    import bandit_bakery._kernels as ck
except ImportError:
    ck = None

needs_compiled = pytest.mark.skipif(ck is None,
                                    reason="compiled kernels not built")


def random_state(rng, dim):
    return (rng.normal(size=dim),
            np.abs(rng.normal(size=dim)),
            np.where(rng.random(dim) < 0.3, 0.0, np.abs(rng.normal(size=dim))))


def random_features(rng, dim):
    nnz = int(rng.integers(1, dim + 1))
    idx = np.sort(rng.choice(dim, size=nnz, replace=False)).astype(np.int64)
    val = rng.normal(size=nnz)
    return idx, val


@needs_compiled
class TestBitwiseParity:
    def test_apply_update_streams(self, rng):
        dim = 12
        w_c, g_c, s_c = random_state(rng, dim)
        w_p, g_p, s_p = w_c.copy(), g_c.copy(), s_c.copy()
        for _ in range(3000):
            idx, val = random_features(rng, dim)
            target = float(rng.normal() * 3)
            weight = float(abs(rng.normal()) * 2)
            eta = float(rng.uniform(0.01, 2.0))
            bias = float(rng.normal())
            got_c = ck.apply_update(w_c, g_c, s_c, idx, val, target, weight,
                                    eta, bias)
            got_p = pyk.apply_update(w_p, g_p, s_p, idx, val, target, weight,
                                     eta, bias)
            assert got_c == got_p
        assert (w_c == w_p).all()
        assert (g_c == g_p).all()
        assert (s_c == s_p).all()

    def test_path_rate_and_predict(self, rng):
        dim = 10
        for _ in range(2000):
            w, g, s = random_state(rng, dim)
            idx, val = random_features(rng, dim)
            target = float(rng.normal())
            eta = float(rng.uniform(0.01, 1.5))
            bias = float(rng.normal())
            assert ck.predict_sparse(w, s, idx, val, bias) == \
                pyk.predict_sparse(w, s, idx, val, bias)
            assert ck.path_rate(w, g, s, idx, val, target, eta, bias) == \
                pyk.path_rate(w, g, s, idx, val, target, eta, bias)

    def test_whole_run_identical_across_backends(self):
        script = (
            "from bandit_bakery.synth import linear_multiclass\n"
            "from bandit_bakery.explorers import ExplorerConfig, run\n"
            "ds = linear_multiclass(300, n_actions=3, dim=6, seed=1)\n"
            "tr = run(ds, ExplorerConfig(algo='cover-nu', reduction='dr',"
            " eta=0.5, seed=2))\n"
            "print(repr(tr.actions.tolist()), repr(tr.probs.tolist()))\n"
        )
        outputs = []
        for name in ("c", "python"):
            proc = subprocess.run(
                [sys.executable, "-c", script],
                env={"BANDIT_BAKERY_BACKEND": name, "PATH": "/usr/bin:/bin"},
                capture_output=True, text=True, check=True)
            outputs.append(proc.stdout)
        assert outputs[0] == outputs[1]


class TestSelection:
    def test_python_backend_always_available(self):
        assert "python" in backend.available_backends()

    def test_active_backend_exposed(self):
        assert backend.BACKEND in ("c", "python")
