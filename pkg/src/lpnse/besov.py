"""Besov norms, vorticity calculus, and the low/high splitting.

The splitting cuts a velocity field at a data-dependent dyadic level N
so that the low part is Lipschitz with a quantified bound and the high
part is small in a supercritical Lebesgue norm.  The level is

    N = floor((q/2) * log2(e + ||u||)) + 1,

with the norm taken in B^r_{p,inf} for an exponent triple (r, p, q)
tied by the scaling relation 2/q + 3/p = 1 + r.
"""

import math
from dataclasses import dataclass

import numpy as np

from .blocks import block_indices, block_norms, delta_j, s_j
from .cutoffs import DyadicCutoffs
from .errors import GridError, ResolutionError, TripleError
from .field import (Field, SPECTRAL, divergence, grad_norm_inf, h1_seminorm,
                    l2_norm_spectral, lp_norm, spectral_data)
from .grid import Grid


@dataclass(frozen=True)
class BesovSpec:
    """Norm parameters (s, p, q); q = inf takes the sup over blocks."""

    s: float
    p: float
    q: float = math.inf

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError(f"exponents must be >= 1, got p={self.p}, q={self.q}")


def besov_norm(f: Field, spec: BesovSpec, cutoffs: DyadicCutoffs = None) -> float:
    """Weighted block-norm sequence 2^{js} ||block_j f||_p, aggregated in
    l^q over j in [-1, jmax].  f should be band-limited to the resolved
    band (true for every field produced here)."""
    js = np.array(block_indices(f.grid))
    norms = block_norms(f, spec.p, js=list(js), cutoffs=cutoffs)
    weighted = 2.0 ** (js * spec.s) * norms
    if math.isinf(spec.q):
        return float(np.max(weighted))
    return float(np.sum(weighted**spec.q) ** (1.0 / spec.q))


def besov_b1_inf_inf(f: Field, cutoffs: DyadicCutoffs = None) -> float:
    return besov_norm(f, BesovSpec(1.0, math.inf, math.inf), cutoffs)


# --- vorticity and its inverse ---------------------------------------------

def curl(u: Field) -> Field:
    """Vorticity: a 3-component field in 3D, a scalar in 2D."""
    grid = u.grid
    if u.ncomp != grid.dim:
        raise GridError(f"curl expects a {grid.dim}-component field")
    spec = spectral_data(u)
    k = grid.k_components
    if grid.dim == 2:
        out = 1j * k[0] * spec[1] - 1j * k[1] * spec[0]
        return Field(grid, out[np.newaxis], SPECTRAL)
    comps = [
        1j * k[1] * spec[2] - 1j * k[2] * spec[1],
        1j * k[2] * spec[0] - 1j * k[0] * spec[2],
        1j * k[0] * spec[1] - 1j * k[1] * spec[0],
    ]
    return Field(grid, np.stack(comps), SPECTRAL)


def biot_savart(w: Field) -> Field:
    """Divergence-free velocity with the given mean-zero vorticity.

    3D input must itself be divergence-free (a curl); 2D input is the
    scalar vorticity.  Spectrally: u = i k x w / |k|^2 with k = 0 zeroed.
    """
    grid = w.grid
    spec = spectral_data(w)
    zero = (0,) * grid.dim
    mean = np.max(np.abs(spec[(slice(None),) + zero]))
    scale_ = np.max(np.abs(spec))
    if mean > 1e-10 * max(scale_, 1e-30):
        raise ValueError("vorticity must have zero mean")
    with np.errstate(invalid="ignore", divide="ignore"):
        inv_ksq = np.where(grid.k_sq > 0, 1.0 / grid.k_sq, 0.0)
    k = grid.k_components
    if grid.dim == 2:
        if w.ncomp != 1:
            raise GridError("2D vorticity is a scalar field")
        out = np.stack([1j * k[1] * spec[0], -1j * k[0] * spec[0]]) * inv_ksq
        return Field(grid, out, SPECTRAL)
    if w.ncomp != 3:
        raise GridError("3D vorticity is a 3-component field")
    div = l2_norm_spectral(divergence(w))
    if div > 1e-10 * max(l2_norm_spectral(w), 1e-30):
        raise ValueError("3D vorticity must be divergence-free (a curl)")
    comps = [
        1j * (k[1] * spec[2] - k[2] * spec[1]),
        1j * (k[2] * spec[0] - k[0] * spec[2]),
        1j * (k[0] * spec[1] - k[1] * spec[0]),
    ]
    return Field(grid, np.stack(comps) * inv_ksq, SPECTRAL)


def bkm_ratio(u: Field, cutoffs: DyadicCutoffs = None) -> float:
    """Ratio of the Lipschitz-type norm of u to the energy norm plus the
    sup-type vorticity norm.  Zero field returns 0 by convention."""
    norm_u2 = l2_norm_spectral(u)
    if norm_u2 == 0.0:
        return 0.0
    div = l2_norm_spectral(divergence(u))
    if div > 1e-10 * max(h1_seminorm(u), 1e-30):
        raise ValueError("bkm_ratio expects a divergence-free field")
    num = besov_b1_inf_inf(u, cutoffs)
    den = norm_u2 + besov_norm(curl(u), BesovSpec(0.0, math.inf, math.inf), cutoffs)
    return num / den


# --- criterion triples and the low/high split ------------------------------

UNIQUENESS_MODE = "uniqueness"
EXTENDED_MODE = "negative-r"

_RELATION_TOL = 1e-12


@dataclass(frozen=True)
class CriterionTriple:
    """Exponents (r, p, q) tied by 2/q + 3/p = 1 + r."""

    r: float
    p: float
    q: float

    def relation_residual(self) -> float:
        return abs(2.0 / self.q + 3.0 / self.p - (1.0 + self.r))

    def validate(self, mode: str = UNIQUENESS_MODE) -> "CriterionTriple":
        if self.p < 1 or self.q < 1:
            raise TripleError("p >= 1 and q >= 1 violated")
        if self.relation_residual() > _RELATION_TOL:
            raise TripleError("2/q+3/p=1+r violated")
        if mode == UNIQUENESS_MODE:
            if not (0.0 < self.r <= 1.0):
                raise TripleError("r in (0,1] violated")
            if not (self.p > 3.0 / (1.0 + self.r)):
                raise TripleError("p > 3/(1+r) violated")
            if math.isinf(self.p) and self.r == 1.0:
                raise TripleError("(p,r) = (inf,1) excluded")
        elif mode == EXTENDED_MODE:
            if not (-1.0 < self.r <= 1.0):
                raise TripleError("r in (-1,1] violated")
        else:
            raise ValueError(f"unknown validation mode {mode!r}")
        return self


@dataclass(frozen=True)
class SplitResult:
    """Low/high decomposition u = u_low + u_high at dyadic level N."""

    u_low: Field
    u_high: Field
    N: int
    p_tilde: float
    q_tilde: float


def split_level(q: float, norm_value: float) -> int:
    """The cut level N = floor((q/2) log2(e + norm)) + 1."""
    return int(math.floor(q / 2.0 * math.log2(math.e + norm_value))) + 1


def choose_p_tilde(triple: CriterionTriple) -> float:
    """Deterministic choice of the auxiliary exponent: scan delta through
    1/2, 1/4, ... and take the first p~ = max(3,p)(1+delta) that makes
    3/p - 3/p~ - r strictly negative.  Any valid triple admits one."""
    base = max(3.0, triple.p)
    delta = 0.5
    for _ in range(60):
        p_tilde = base * (1.0 + delta)
        if 3.0 / triple.p - 3.0 / p_tilde - triple.r < 0.0:
            return p_tilde
        delta /= 2.0
    raise TripleError("no auxiliary exponent found; triple outside the admissible range")


def split_low_high(u: Field, triple: CriterionTriple,
                   norm_value: float = None,
                   cutoffs: DyadicCutoffs = None) -> SplitResult:
    """Cut u at level N so the low part obeys a Lipschitz bound growing
    like 2^{2(1-1/q)N} and the high part decays like 2^{(3/p-3/p~-r)N},
    both against the B^r_{p,inf} norm."""
    triple.validate(UNIQUENESS_MODE)
    if norm_value is None or norm_value < 0:
        norm_value = besov_norm(u, BesovSpec(triple.r, triple.p, math.inf), cutoffs)
    N = split_level(triple.q, norm_value)
    if N > u.grid.jmax:
        raise ResolutionError(
            f"split level N={N} exceeds jmax={u.grid.jmax}; refine the grid")
    u_low = s_j(u, N, cutoffs)
    u_high = Field(u.grid, spectral_data(u) - u_low.data, SPECTRAL)
    p_tilde = choose_p_tilde(triple)
    q_tilde = 2.0 / (1.0 - 3.0 / p_tilde)
    return SplitResult(u_low, u_high, N, p_tilde, q_tilde)


def split_constants(u: Field, triple: CriterionTriple,
                    cutoffs: DyadicCutoffs = None) -> dict:
    """Measured constants in the two split bounds, for reports:

      c_lip  = ||grad u_low||_inf / (2^{2(1-1/q)N} ||u||)
      c_high = ||u_high||_{p~}   / (2^{(3/p-3/p~-r)N} ||u||)
    """
    norm_value = besov_norm(u, BesovSpec(triple.r, triple.p, math.inf), cutoffs)
    result = split_low_high(u, triple, norm_value, cutoffs)
    lip_scale = 2.0 ** (2.0 * (1.0 - 1.0 / triple.q) * result.N) * norm_value
    high_scale = (2.0 ** ((3.0 / triple.p - 3.0 / result.p_tilde - triple.r) * result.N)
                  * norm_value)
    return {
        "N": result.N,
        "p_tilde": result.p_tilde,
        "q_tilde": result.q_tilde,
        "norm": norm_value,
        "lip_low": grad_norm_inf(result.u_low),
        "high_norm": lp_norm(result.u_high, result.p_tilde),
        "c_lip": grad_norm_inf(result.u_low) / lip_scale if lip_scale else 0.0,
        "c_high": lp_norm(result.u_high, result.p_tilde) / high_scale if high_scale else 0.0,
    }


def gn_ratio(w: Field, p_tilde: float) -> float:
    """Interpolation-inequality ratio ||w||_s / (||w||_2^{1-3/p~} *
    ||grad w||_2^{3/p~}) with s = 2p~/(p~-2).  Zero field returns 0."""
    if p_tilde <= 3:
        raise ValueError(f"auxiliary exponent must exceed 3, got {p_tilde}")
    norm2 = l2_norm_spectral(w)
    if norm2 == 0.0:
        return 0.0
    grid = w.grid
    spec = spectral_data(w)
    h1 = math.sqrt(grid.volume * float(np.sum(grid.k_sq * np.abs(spec) ** 2)))
    if h1 == 0.0:
        return math.inf
    if math.isinf(p_tilde):
        sigma, theta = 2.0, 0.0
    else:
        sigma = 2.0 * p_tilde / (p_tilde - 2.0)
        theta = 3.0 / p_tilde
    return lp_norm(w, sigma) / (norm2 ** (1.0 - theta) * h1**theta)
