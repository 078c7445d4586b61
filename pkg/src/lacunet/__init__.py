"""Locating lacunae of 1D space-time wave fields with a learned classifier.

Subpackages: grid geometry (:mod:`lacunet.grid`), ground-truth labeling
(:mod:`lacunet.oracle`), dataset generation and LACD files
(:mod:`lacunet.dataset`), the from-scratch network (:mod:`lacunet.neuralnet`),
the training loop and LACM checkpoints (:mod:`lacunet.trainer`), evaluation
and rendering (:mod:`lacunet.evaluate`), and the CLI (:mod:`lacunet.cli`).
"""

from .grid import DomainConfig, GridSpec, build_grid, default_domain
from .oracle import Disk, PhiField, PsiField, SourceSupport

__all__ = [
    "DomainConfig",
    "GridSpec",
    "build_grid",
    "default_domain",
    "Disk",
    "PhiField",
    "PsiField",
    "SourceSupport",
]

__version__ = "0.1.0"
