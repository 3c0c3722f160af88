"""Randomized matrix preprocessing toolkit.

Subpackages cover dense linear algebra kernels (densela), random matrix
families (randmats), synthetic test-matrix generation (matgen), augmentation
and additive preconditioning (precond), leading/trailing singular-space
approximation (subspace), skeleton decompositions (curvol), Gaussian
elimination support (genpsolve), probabilistic bound evaluation (boundscalc),
and the experiment harness (bench).
"""

from ._kernels import lane as kernel_lane
from .errors import RandprepError

__version__ = "0.1.0"

__all__ = ["RandprepError", "__version__", "kernel_lane"]
