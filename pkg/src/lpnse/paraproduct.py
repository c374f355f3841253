"""Bony decomposition of products and the block advection commutator.

A product of two fields splits into two paraproducts plus a remainder,

    u v = T_u v + T_v u + R(u, v),

where T_u v pairs low frequencies of u with the shell blocks of v and
R collects the comparable-frequency pairs (|j - j'| <= 1).  All three
pieces are formed with dealiased products, so the identity holds at
round-off level for band-limited inputs.
"""

from dataclasses import dataclass

import numpy as np

from .blocks import block_indices, delta_j, s_j
from .cutoffs import DyadicCutoffs
from .errors import BlockRangeError
from .field import (Field, SPECTRAL, add, advect, dealiased_product,
                    divergence, grad_norm_inf, h1_seminorm, l2_norm_spectral,
                    spectral_data, zero_field)


def paraproduct_t(u: Field, v: Field, cutoffs: DyadicCutoffs = None,
                  dealias: bool = True) -> Field:
    """T_u v: sum over shells j of (low pass of u below j-1) * (block j of v).

    Terms with j <= 0 vanish because the low-pass at level j-1 is zero
    there, so the sum effectively starts at j = 1.
    """
    u.grid.require_same(v.grid)
    grid = u.grid
    total = None
    for j in range(1, grid.jmax + 1):
        term = dealiased_product(s_j(u, j - 1, cutoffs), delta_j(v, j, cutoffs),
                                 dealias)
        total = term.data if total is None else total + term.data
    if total is None:
        return zero_field(grid, max(u.ncomp, v.ncomp))
    return Field(grid, total, SPECTRAL)


def remainder_r(u: Field, v: Field, cutoffs: DyadicCutoffs = None,
                dealias: bool = True) -> Field:
    """R(u, v): blocks of comparable frequency, |j - j'| <= 1, with the
    ball block participating at j = -1."""
    u.grid.require_same(v.grid)
    grid = u.grid
    blocks_u = {j: delta_j(u, j, cutoffs) for j in block_indices(grid)}
    blocks_v = {j: delta_j(v, j, cutoffs) for j in block_indices(grid)}
    total = None
    for j in block_indices(grid):
        for jp in (j - 1, j, j + 1):
            if jp < -1 or jp > grid.jmax:
                continue
            term = dealiased_product(blocks_u[j], blocks_v[jp], dealias)
            total = term.data if total is None else total + term.data
    return Field(grid, total, SPECTRAL)


def t_prime(u: Field, v: Field, cutoffs: DyadicCutoffs = None,
            dealias: bool = True) -> Field:
    """T'_u v = T_u v + R(u, v): everything in uv except T_v u."""
    return add(paraproduct_t(u, v, cutoffs, dealias),
               remainder_r(u, v, cutoffs, dealias))


@dataclass(frozen=True)
class BonyParts:
    """The three pieces of a product; their sum is the dealiased product."""

    T_uv: Field
    T_vu: Field
    R_uv: Field

    def total(self) -> Field:
        return add(add(self.T_uv, self.T_vu), self.R_uv)


def bony_decomposition(u: Field, v: Field, cutoffs: DyadicCutoffs = None,
                       dealias: bool = True) -> BonyParts:
    return BonyParts(paraproduct_t(u, v, cutoffs, dealias),
                     paraproduct_t(v, u, cutoffs, dealias),
                     remainder_r(u, v, cutoffs, dealias))


def _check_divfree(v: Field, tol: float) -> None:
    div = l2_norm_spectral(divergence(v))
    scale_ = h1_seminorm(v)
    if div > tol * max(scale_, 1e-30):
        raise ValueError(f"advecting field is not divergence-free "
                         f"(relative divergence {div / max(scale_, 1e-30):.2e})")


def commutator(v: Field, j: int, w: Field, cutoffs: DyadicCutoffs = None,
               dealias: bool = True) -> Field:
    """The commutator of the low-high paraproduct of v against the shell
    projector at j, applied to the advection derivative of w:

        sum over |j' - j| <= 4 of
            (low pass of v at j'-1) . grad (block j of block j' of w)
          - block j of ((low pass of v at j'-1) . grad (block j' of w)).

    Computed directly as this operator difference with dealiased
    products; no kernel representation is involved.  v must be
    divergence-free; j must be a shell index (j >= 0).
    """
    v.grid.require_same(w.grid)
    if j < 0:
        raise BlockRangeError("commutator is defined for shell indices j >= 0")
    if j > v.grid.jmax:
        raise BlockRangeError(f"block {j} exceeds jmax={v.grid.jmax}")
    _check_divfree(v, 1e-12)
    grid = v.grid
    total = None
    for jp in range(max(1, j - 4), min(grid.jmax, j + 4) + 1):
        low_v = s_j(v, jp - 1, cutoffs)
        w_block = delta_j(w, jp, cutoffs)
        direct = advect(low_v, delta_j(w_block, j, cutoffs), dealias)
        projected = delta_j(advect(low_v, w_block, dealias), j, cutoffs)
        term = direct.data - spectral_data(projected)
        total = term if total is None else total + term
    if total is None:
        return zero_field(grid, w.ncomp)
    return Field(grid, total, SPECTRAL)


def commutator_bound_ratio(v: Field, j: int, w: Field,
                           cutoffs: DyadicCutoffs = None) -> float:
    """Measured constant in the commutator estimate: the L2 norm of the
    commutator divided by ||grad S_{j+3} v||_inf * sum_{|j'-j|<=4} ||w_j'||_2.
    Returns 0 when the predicted bound is itself zero."""
    grid = v.grid
    num = l2_norm_spectral(commutator(v, j, w, cutoffs))
    lip = grad_norm_inf(s_j(v, min(j + 3, grid.jmax + 1), cutoffs))
    tail = sum(l2_norm_spectral(delta_j(w, jp, cutoffs))
               for jp in range(max(-1, j - 4), min(grid.jmax, j + 4) + 1))
    denom = lip * tail
    if denom == 0.0:
        return 0.0
    return num / denom
