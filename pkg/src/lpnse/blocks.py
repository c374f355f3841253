"""Dyadic block operators and measured Bernstein constants.

Block conventions (index j):

* j <= -2:            zero operator
* j == -1:            low-pass chi(|k|), the ball block
* 0 <= j <= grid.jmax: shell block phi(|k| / 2^j)

Low-pass partial sums S_j use chi(|k| / 2^j) for j >= 0 and vanish for
j <= -1, so S_{j+1} - S_j equals the shell block at j and the ball block
coincides with S_0.
"""

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import ensembles
from .cutoffs import DEFAULT_CUTOFFS, DyadicCutoffs
from .errors import BlockRangeError
from .field import (Field, SPECTRAL, _irfftn_half, lp_norm, spectral_data)
from .grid import Grid

_MULTIPLIER_CACHE: dict = {}


def block_indices(grid: Grid) -> range:
    """All block indices the grid resolves, ball block included."""
    return range(-1, grid.jmax + 1)


def block_multiplier(grid: Grid, j: int, cutoffs: DyadicCutoffs = None,
                     kind: str = "block") -> np.ndarray:
    """Cached radial multiplier for the shell block ('block') or the
    low-pass partial sum ('low') at index j."""
    cutoffs = cutoffs or DEFAULT_CUTOFFS
    key = (cutoffs.profile, grid.dim, grid.n, j, kind)
    cached = _MULTIPLIER_CACHE.get(key)
    if cached is not None:
        return cached
    if kind == "block":
        if j == -1:
            mult = cutoffs.chi(grid.k_mag)
        else:
            mult = cutoffs.phi(grid.k_mag / 2.0**j)
    elif kind == "low":
        mult = cutoffs.chi(grid.k_mag / 2.0**j)
    else:
        raise ValueError(f"unknown multiplier kind {kind!r}")
    mult = np.ascontiguousarray(mult)
    mult.flags.writeable = False
    _MULTIPLIER_CACHE[key] = mult
    return mult


def delta_j(f: Field, j: int, cutoffs: DyadicCutoffs = None) -> Field:
    """Frequency-localize f to the dyadic shell at index j."""
    grid = f.grid
    if j > grid.jmax:
        raise BlockRangeError(f"block {j} exceeds jmax={grid.jmax} for n={grid.n}")
    if j <= -2:
        return Field(grid, np.zeros_like(spectral_data(f)), SPECTRAL)
    mult = block_multiplier(grid, j, cutoffs, "block")
    return Field(grid, spectral_data(f) * mult, SPECTRAL)


def s_j(f: Field, j: int, cutoffs: DyadicCutoffs = None) -> Field:
    """Partial sum S_j f: all shells strictly below j plus the ball."""
    grid = f.grid
    if j > grid.jmax + 1:
        raise BlockRangeError(f"low-pass level {j} exceeds jmax+1={grid.jmax + 1}")
    if j <= -1:
        return Field(grid, np.zeros_like(spectral_data(f)), SPECTRAL)
    mult = block_multiplier(grid, j, cutoffs, "low")
    return Field(grid, spectral_data(f) * mult, SPECTRAL)


def reconstruct(f: Field, cutoffs: DyadicCutoffs = None) -> Field:
    """Sum of every resolved block.  Equals f (to round-off) whenever f
    is band-limited to |k| <= (3/4) 2^{jmax+1}."""
    grid = f.grid
    total = np.zeros_like(spectral_data(f))
    for j in block_indices(grid):
        total = total + delta_j(f, j, cutoffs).data
    return Field(grid, total, SPECTRAL)


def block_norms(f: Field, p: float, js=None, cutoffs: DyadicCutoffs = None) -> np.ndarray:
    """L^p norms of every requested block, batched through one inverse
    transform.  Assumes f is real (true for every field this package
    produces); p = 2 is evaluated spectrally and is exact."""
    grid = f.grid
    if js is None:
        js = list(block_indices(grid))
    spec = spectral_data(f)
    if p == 2:
        power = np.sum(np.abs(spec) ** 2, axis=0)
        out = np.empty(len(js))
        for i, j in enumerate(js):
            mult = block_multiplier(grid, j, cutoffs, "block")
            out[i] = np.sqrt(grid.volume * np.sum(mult**2 * power))
        return out
    half = grid.n // 2 + 1
    spec_half = spec[..., :half]
    stacked = np.empty((len(js),) + spec_half.shape, dtype=np.complex128)
    for i, j in enumerate(js):
        stacked[i] = spec_half * block_multiplier(grid, j, cutoffs, "block")[..., :half]
    phys = _irfftn_half(stacked, grid.shape)
    mag = np.sqrt(np.sum(phys**2, axis=1))
    flat = mag.reshape(len(js), -1)
    if np.isinf(p):
        return np.max(flat, axis=1)
    return (np.sum(flat**p, axis=1) * grid.cell_volume) ** (1.0 / p)


# --- measured Bernstein constants ------------------------------------------

@dataclass
class ConstantReport:
    """Measured ratios for a family of block inequalities.

    Each row is (j, p, q, alpha, measured_ratio_max, ensemble_size, seed)
    where measured_ratio_max is the worst ratio of the left side of the
    inequality to its dyadic scaling factor times the right side, over
    the random ensemble.
    """

    columns = ("j", "p", "q", "alpha", "measured_ratio_max", "ensemble_size", "seed")
    rows: list = dc_field(default_factory=list)

    def add(self, j, p, q, alpha, ratio, ensemble, seed):
        self.rows.append((int(j), float(p), float(q), int(alpha),
                          float(ratio), int(ensemble), int(seed)))

    def to_csv(self, path) -> None:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                                  for v in row))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    def ratios_by_case(self) -> dict:
        """{(p, q, alpha): {j: ratio}} for spread checks."""
        out: dict = {}
        for j, p, q, alpha, ratio, _, _ in self.rows:
            out.setdefault((p, q, alpha), {})[j] = ratio
        return out

    def spread_by_case(self) -> dict:
        """Largest ratio divided by smallest ratio across j, per case."""
        return {
            case: max(vals.values()) / min(vals.values())
            for case, vals in self.ratios_by_case().items()
        }

    def max_ratio(self) -> float:
        return max(row[4] for row in self.rows)


DEFAULT_BERNSTEIN_CASES = ((2.0, 2.0, 1), (2.0, np.inf, 0), (np.inf, np.inf, 1))


def _derivative_sup_norm(f: Field, order: int, q: float) -> float:
    """sup over multi-indices of total order `order` of ||d^beta f||_q.

    q = 2 is evaluated from coefficients (Parseval), skipping the inverse
    transform per multi-index."""
    from .field import _deriv_multiplier, derivative, l2_norm_spectral

    if order == 0:
        return l2_norm_spectral(f) if q == 2 else lp_norm(f, q)
    grid = f.grid
    spec = spectral_data(f)
    best = 0.0
    for combo in itertools.combinations_with_replacement(range(grid.dim), order):
        orders = [0] * grid.dim
        for axis in combo:
            orders[axis] += 1
        if q == 2:
            mult = _deriv_multiplier(grid, tuple(orders))
            val = float(np.sqrt(grid.volume
                                * np.sum(np.abs(spec * mult) ** 2)))
        else:
            val = lp_norm(derivative(f, orders), q)
        best = max(best, val)
    return best


def _default_js(grid: Grid) -> list:
    # the top shell leaks past the exactly-representable band and the
    # ball block has no dyadic scaling, so constants are measured on
    # interior shells only
    return list(range(1, grid.jmax))


def _shell_translate(grid: Grid, j: int, x0: np.ndarray,
                     cutoffs: DyadicCutoffs = None) -> Field:
    """The shell reproducing kernel centered at x0: coefficients equal
    to the block multiplier with a translation phase.  Every norm ratio
    is translation-invariant, so one random translate represents the
    whole orbit."""
    mult = block_multiplier(grid, j, cutoffs, "block")
    phase = np.zeros(grid.shape)
    for axis in range(grid.dim):
        phase = phase + grid.k_components[axis] * x0[axis]
    return Field(grid, (mult * np.exp(-1j * phase))[np.newaxis], SPECTRAL)


def bernstein_report(grid: Grid, cases=DEFAULT_BERNSTEIN_CASES, js=None,
                     ensemble: int = 64, seed: int = 0,
                     cutoffs: DyadicCutoffs = None) -> ConstantReport:
    """Measure forward Bernstein ratios

        sup_{|beta|=alpha} ||d^beta f||_q
        ----------------------------------------------
        2^{j (alpha + dim (1/p - 1/q))} ||f||_p

    reporting the max per (j, case) over an ensemble of shell noise plus
    one random translate of the shell kernel.  The coherent candidate
    matters: Gaussian fields never saturate the p < q cases (their
    sup/L2 ratio is flat in j, not 2^{j dim (1/p-1/q)}), so a noise-only
    scan would report a spread that only reflects the ensemble, not the
    inequality.  Requires p <= q.
    """
    for p, q, alpha in cases:
        if p > q:
            raise ValueError(f"forward inequality needs p <= q, got ({p}, {q})")
        if alpha < 0:
            raise ValueError("derivative order must be non-negative")
    if js is None:
        js = _default_js(grid)
    report = ConstantReport()
    rng = np.random.default_rng(seed)
    worst = {(j, case): 0.0 for j in js for case in cases}

    def measure(f, j):
        norms = {}
        for case in cases:
            p, q, alpha = case
            num = _derivative_sup_norm(f, int(alpha), q)
            den = norms.get(p)
            if den is None:
                den = norms[p] = _derivative_sup_norm(f, 0, p)
            factor = 2.0 ** (j * (alpha + grid.dim * (1.0 / p - 1.0 / q)))
            key = (j, case)
            worst[key] = max(worst[key], num / (factor * den))

    x0 = rng.uniform(0.0, 2.0 * np.pi, size=grid.dim)
    for j in js:
        measure(_shell_translate(grid, j, x0, cutoffs), j)
    for _ in range(ensemble):
        noise = ensembles.band_noise(grid, rng)
        for j in js:
            measure(delta_j(noise, j, cutoffs), j)
    for case in cases:
        p, q, alpha = case
        for j in js:
            report.add(j, p, q, alpha, worst[(j, case)], ensemble, seed)
    return report


def reverse_bernstein_report(grid: Grid, js=None, ensemble: int = 64,
                             seed: int = 0, p: float = 2.0,
                             cutoffs: DyadicCutoffs = None) -> ConstantReport:
    """Measure the reverse ratio on shells,

        2^j ||f||_p / ||grad f||_p,

    with the full gradient magnitude in the denominator.  At p = 2 the
    spectral support bound |k| >= (3/4) 2^j forces the ratio below 4/3,
    and both norms come straight from Parseval.  Ball blocks are excluded
    (constants on a ball can vanish)."""
    from .field import gradient, h1_seminorm, l2_norm_spectral

    if js is None:
        js = _default_js(grid)
    if any(j < 0 for j in js):
        raise BlockRangeError("reverse ratios are defined on shells (j >= 0) only")
    report = ConstantReport()
    rng = np.random.default_rng(seed)
    worst = {j: 0.0 for j in js}
    for _ in range(ensemble):
        noise = ensembles.band_noise(grid, rng)
        for j in js:
            f = delta_j(noise, j, cutoffs)
            if p == 2:
                ratio = 2.0**j * l2_norm_spectral(f) / h1_seminorm(f)
            else:
                ratio = 2.0**j * lp_norm(f, p) / lp_norm(gradient(f), p)
            worst[j] = max(worst[j], ratio)
    for j in js:
        report.add(j, p, p, 1, worst[j], ensemble, seed)
    return report
