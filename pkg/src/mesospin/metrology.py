"""Phase-estimation analysis: gains, bounds, Hellinger and Fisher tools.

The metrological gain G compares the phase sensitivity of a protocol to
the standard quantum limit 1/sqrt(2j) of a coherent spin state; the
Heisenberg limit 1/(2j) corresponds to G = 2j.  Gains are extracted
from parity oscillations, magnetization oscillations, the small-angle
slope of the Hellinger distance, or the classical Fisher information,
and are bounded by 2*varz/j for a state of z variance varz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import expi_hermitian, m_values, make_operators, spin_of, spin_variance
from .fitting import fit_sinusoid
from .measurement import (
    equatorial_scan,
    magnetization,
    parity,
    sample_counts,
    variance,
)
from .rng import substream

__all__ = [
    "PhaseScan",
    "GainReport",
    "equatorial_phase_scan",
    "parity_curve",
    "magnetization_curve",
    "variance_curve",
    "phase_uncertainty",
    "gain_from_parity",
    "parity_gain_from_contrast",
    "hellinger_distance",
    "gain_from_hellinger",
    "gain_from_magnetization",
    "classical_fisher",
    "fisher_information",
    "fisher_gain",
    "variance_bound",
    "sql_phase_uncertainty",
    "heisenberg_phase_uncertainty",
]


@dataclass(frozen=True)
class PhaseScan:
    """Projection distributions recorded on an increasing grid of phases."""

    phis: np.ndarray
    distributions: tuple
    provenance: str = "exact"

    def __post_init__(self):
        phis = np.asarray(self.phis, dtype=float)
        if len(phis) != len(self.distributions):
            raise ValueError("phis and distributions must have equal length")
        if np.any(np.diff(phis) <= 0):
            raise ValueError("phis must be strictly increasing")
        if self.provenance not in ("exact", "sampled"):
            raise ValueError("provenance must be 'exact' or 'sampled'")
        phis.setflags(write=False)
        object.__setattr__(self, "phis", phis)
        object.__setattr__(self, "distributions", tuple(self.distributions))

    @property
    def j(self):
        return self.distributions[0].j

    @property
    def atom_total(self):
        return self.distributions[0].atom_total


def equatorial_phase_scan(state, phis, *, atom_total=None, seed=None):
    """Equatorial scan of a state, optionally with multinomial sampling.

    With `atom_total` set, each angle is sampled with its own
    deterministic substream of `seed`.
    """
    dists = equatorial_scan(state, phis)
    if atom_total is None:
        return PhaseScan(phis=np.asarray(phis, float), distributions=dists)
    if seed is None:
        raise ValueError("sampling requires a seed")
    dists = [
        sample_counts(d, atom_total, substream(seed, i).integers(2**63))
        for i, d in enumerate(dists)
    ]
    return PhaseScan(phis=np.asarray(phis, float), distributions=dists, provenance="sampled")


def parity_curve(scan):
    return np.array([parity(d) for d in scan.distributions])


def magnetization_curve(scan):
    return np.array([magnetization(d) for d in scan.distributions])


def variance_curve(scan):
    return np.array([variance(d) for d in scan.distributions])


def sql_phase_uncertainty(j):
    """Standard quantum limit 1/sqrt(2j)."""
    return 1.0 / math.sqrt(2 * j)


def heisenberg_phase_uncertainty(j):
    """Heisenberg limit 1/(2j)."""
    return 1.0 / (2 * j)


def phase_uncertainty(phis, means, variances, phi):
    """Single-shot phase uncertainty  delta_phi = delta_O / |d<O>/dphi|.

    The derivative is taken by centered finite differences on the grid;
    a stationary point of the mean curve makes the phase unusable and
    raises ValueError.
    """
    phis = np.asarray(phis, dtype=float)
    means = np.asarray(means, dtype=float)
    variances = np.asarray(variances, dtype=float)
    i = int(np.argmin(np.abs(phis - phi)))
    lo, hi = max(i - 1, 0), min(i + 1, len(phis) - 1)
    slope = (means[hi] - means[lo]) / (phis[hi] - phis[lo])
    scale = max(np.max(np.abs(means)), 1.0) / (phis[-1] - phis[0])
    if abs(slope) < 1e-12 * scale:
        raise ValueError(f"mean curve is stationary at phi={phi}; unusable")
    return math.sqrt(max(variances[i], 0.0)) / abs(slope)


@dataclass(frozen=True)
class GainReport:
    """Metrological gain extracted by one analysis method."""

    gain: float
    method: str
    uncertainty: float
    bound: float = None
    fit: object = None

    def __post_init__(self):
        if self.gain < 0:
            raise ValueError("gain must be non-negative")


def _bound(j, varz_bound):
    return None if varz_bound is None else 2.0 * varz_bound / j


def gain_from_parity(scan, *, fix_frequency=False, varz_bound=None):
    """Gain 2j*C^2 from the contrast C of the parity oscillation.

    Fits C sin(2j*phi + phi0) + c to the parity curve; the frequency is
    free by default so the fitted period can be checked against pi/j.
    """
    j = scan.j
    y = parity_curve(scan)
    fit = fit_sinusoid(scan.phis, y, 2 * j, fix_frequency=fix_frequency)
    if not fit.converged and fit.amplitude < 1e-6:
        raise RuntimeError("parity curve shows no oscillation to fit")
    contrast = min(fit.amplitude, 1.0)
    gain = 2 * j * contrast**2
    return GainReport(
        gain=gain,
        method="parity",
        uncertainty=4 * j * contrast * fit.amplitude_error,
        bound=_bound(j, varz_bound),
        fit=fit,
    )


def parity_gain_from_contrast(j, contrast):
    """Gain 2j*C^2 for a given parity contrast."""
    return 2 * j * contrast**2


def hellinger_distance(p, q):
    """Hellinger distance between two projection distributions.

    d_H^2 = 0.5 * sum_m (sqrt(p_m) - sqrt(q_m))^2, in [0, 1].
    """
    if p.probabilities.shape != q.probabilities.shape:
        raise ValueError("distributions must share the same j")
    if abs(p.axis.theta - q.axis.theta) > 1e-9:
        raise ValueError("distributions must share the same axis family")
    d2 = 0.5 * np.sum((np.sqrt(p.probabilities) - np.sqrt(q.probabilities)) ** 2)
    return math.sqrt(min(max(d2, 0.0), 1.0))


def gain_from_hellinger(scan, phi0, *, window=None, bias_correction=None, varz_bound=None):
    """Gain from the small-angle slope of the Hellinger distance at phi0.

    Fits d_H = s * |phi - phi0| through the origin within `window`
    (default 0.3/(2j)) and normalizes by the coherent-state slope
    sqrt(j/4), so G = s^2/(j/4).  For sampled scans the leading
    multinomial bias (2j)/(8N) is subtracted from d_H^2 before fitting
    (switch off with bias_correction=False).
    """
    j = scan.j
    if window is None:
        window = 0.3 / (2 * j)
    if bias_correction is None:
        bias_correction = scan.provenance == "sampled"
    i0 = int(np.argmin(np.abs(scan.phis - phi0)))
    ref = scan.distributions[i0]
    dx, dh = [], []
    for i, d in enumerate(scan.distributions):
        sep = abs(scan.phis[i] - scan.phis[i0])
        if i == i0 or sep > window:
            continue
        d2 = hellinger_distance(d, ref) ** 2
        if bias_correction:
            if scan.atom_total is None:
                raise ValueError("bias correction needs the atom total")
            d2 = max(d2 - 2 * j / (8 * scan.atom_total), 0.0)
        dx.append(sep)
        dh.append(math.sqrt(d2))
    if len(dx) < 4:
        raise ValueError("need at least 5 scan angles within the fit window")
    dx = np.asarray(dx)
    dh = np.asarray(dh)
    slope = float(dx @ dh / (dx @ dx))
    resid = dh - slope * dx
    slope_err = math.sqrt(float(resid @ resid) / max(len(dx) - 1, 1) / float(dx @ dx))
    gain = slope**2 / (j / 4.0)
    return GainReport(
        gain=gain,
        method="hellinger",
        uncertainty=2 * slope * slope_err / (j / 4.0),
        bound=_bound(j, varz_bound),
        fit=None,
    )


def gain_from_magnetization(scan, *, varz_bound=None):
    """Gain 2j*(A/delta_Jz)^2 from the magnetization oscillation.

    A is the fitted amplitude of A cos(2j*phi + phi0) and the variance
    is averaged over the scan points where the fitted oscillation
    crosses zero (|model| < 0.2 A).
    """
    j = scan.j
    mz = magnetization_curve(scan)
    fit = fit_sinusoid(scan.phis, mz, 2 * j)
    var = variance_curve(scan)
    if fit.amplitude < 1e-9 * j:
        return GainReport(
            gain=0.0, method="magnetization", uncertainty=0.0,
            bound=_bound(j, varz_bound), fit=fit,
        )
    model = fit(scan.phis) - fit.offset
    near_zero = np.abs(model) < 0.2 * fit.amplitude
    if not np.any(near_zero):
        near_zero = np.ones_like(var, dtype=bool)
    varz0 = float(np.mean(var[near_zero]))
    gain = 2 * j * fit.amplitude**2 / varz0
    var_err = float(np.std(var[near_zero]) / math.sqrt(max(near_zero.sum(), 1)))
    rel = math.sqrt(
        (2 * fit.amplitude_error / max(fit.amplitude, 1e-300)) ** 2
        + (var_err / varz0) ** 2
    )
    return GainReport(
        gain=gain,
        method="magnetization",
        uncertainty=gain * rel,
        bound=_bound(j, varz_bound),
        fit=fit,
    )


def classical_fisher(scan, phi, *, eps=1e-12):
    """Classical Fisher information F(phi) = sum (d Pi_m/dphi)^2 / Pi_m.

    The derivative is a centered finite difference on the scan grid;
    outcomes with Pi_m <= eps are dropped as ill-conditioned.
    """
    i = int(np.argmin(np.abs(scan.phis - phi)))
    lo, hi = max(i - 1, 0), min(i + 1, len(scan.phis) - 1)
    if lo == hi:
        raise ValueError("scan too short to differentiate")
    p = scan.distributions[i].probabilities
    dp = (
        scan.distributions[hi].probabilities - scan.distributions[lo].probabilities
    ) / (scan.phis[hi] - scan.phis[lo])
    mask = p > eps
    return float(np.sum(dp[mask] ** 2 / p[mask]))


@lru_cache(maxsize=None)
def _equatorial_probe(two_j):
    ops = make_operators(two_j / 2.0)
    basis = expi_hermitian(ops.jy, math.pi / 2)
    basis.setflags(write=False)
    return basis


def fisher_information(state, phi=0.0, *, eps=1e-12):
    """Exact Fisher information of the Larmor phase at offset phi.

    The state is rotated by exp(-i phi Jz) and read out in a fixed
    equatorial basis; the probability derivative is evaluated exactly
    through d sigma/d phi = -i [Jz, sigma].
    """
    state = np.asarray(state)
    j = spin_of(state)
    rho = state if state.ndim == 2 else np.outer(state, state.conj())
    m = m_values(j)
    basis = _equatorial_probe(int(round(2 * j)))
    rz = np.exp(-1j * phi * m)
    sigma = (rz[:, None] * rho) * rz.conj()[None, :]
    dsigma = -1j * (m[:, None] - m[None, :]) * sigma
    p = np.real(np.einsum("im,ik,km->m", basis.conj(), sigma, basis))
    dp = np.real(np.einsum("im,ik,km->m", basis.conj(), dsigma, basis))
    mask = p > eps
    return float(np.sum(dp[mask] ** 2 / p[mask]))


def fisher_gain(state, *, n_phi=360):
    """Best Fisher gain max_phi F(phi)/(2j) over a quarter parity period.

    For the ideal two-component superposition this evaluates to exactly
    2j; imperfect states fall below it.
    """
    j = spin_of(np.asarray(state))
    best = 0.0
    for phi in np.linspace(0.0, math.pi / 4, n_phi, endpoint=False):
        best = max(best, fisher_information(state, phi))
    return best / (2 * j)


def variance_bound(state):
    """Upper bound 2*varz/j on the gain of a state."""
    state = np.asarray(state)
    j = spin_of(state)
    ops = make_operators(j)
    return 2.0 * spin_variance(ops.jz, state) / j
