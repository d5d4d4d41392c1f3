import json
import os
import subprocess
import sys

import numpy as np

from qps.cocycle import lyapunov_numeric
from qps.potentials import PotentialModel
from qps.spectrum import QuasiPeriodicSetup, build_truncation, eigenpairs

SCRIPT = """
import json
from qps.cocycle import lyapunov_numeric
from qps.potentials import PotentialModel
from qps.spectrum import QuasiPeriodicSetup, build_truncation, eigenpairs
m = PotentialModel.gps(1.3, 0.5)
sd = eigenpairs(build_truncation(m, QuasiPeriodicSetup(), 0, 40))
L = lyapunov_numeric(m, QuasiPeriodicSetup(), 0.3, n_steps=2000).value
print(json.dumps({"ev": sd.eigenvalues.tolist(), "v0": sd.eigenvectors[0].tolist(), "L": L}))
"""


def test_interpreted_kernels_match_compiled():
    env = dict(os.environ, NUMBA_DISABLE_JIT="1")
    res = subprocess.run([sys.executable, "-c", SCRIPT], capture_output=True, text=True, env=env, check=True)
    slow = json.loads(res.stdout)
    m = PotentialModel.gps(1.3, 0.5)
    sd = eigenpairs(build_truncation(m, QuasiPeriodicSetup(), 0, 40))
    np.testing.assert_allclose(slow["ev"], sd.eigenvalues, atol=1e-13)
    np.testing.assert_allclose(slow["v0"], sd.eigenvectors[0], atol=1e-10)
    assert abs(slow["L"] - lyapunov_numeric(m, QuasiPeriodicSetup(), 0.3, n_steps=2000).value) < 1e-12
