import numpy as np
import pytest


@pytest.fixture
def fd_gradient():
    """Central finite-difference gradient of a scalar function of a vector."""

    def _fd(f, w, h=1e-6):
        w = np.asarray(w, dtype=float)
        g = np.empty_like(w)
        for i in range(w.size):
            wp = w.copy()
            wm = w.copy()
            wp[i] += h
            wm[i] -= h
            g[i] = (f(wp) - f(wm)) / (2.0 * h)
        return g

    return _fd
