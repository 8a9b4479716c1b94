"""Central tolerance and cap settings."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # absolute slack for certificate sandwich checks
    certificate: float = 1e-9
    # relative bound for Def 4.2 quadratic forms
    cnd_form: float = 1e-8
    # relative eigenvalue clip for Gram factorization
    eigen_clip: float = 1e-9
    # relative residual allowed in GNS distance identities
    gns_residual: float = 1e-8
    # closed form vs truncated Exp inner products
    exp_truncation: float = 5e-7
    # generic floating comparisons of algebraic identities
    identity: float = 1e-12


@dataclass(frozen=True)
class Caps:
    bfs_radius: int = 12
    ball_size: int = 2_000_000
    exhaustive_pairs: int = 5_000_000
    exp_entries: int = 1_000_000


TOL = Tolerances()
CAPS = Caps()
