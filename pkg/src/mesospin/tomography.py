"""Density-matrix reconstruction, multipole decomposition, Wigner function.

The reconstruction parameterizes rho = L L^dag / Tr(L L^dag) with a
lower-triangular complex L, which keeps every iterate Hermitian,
positive semi-definite, and unit trace by construction.  The fit
minimizes the squared difference between predicted and observed
projection probabilities with a damped least-squares loop and analytic
Jacobian, started from a physicality-projected linear inversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .angular import sphere_integral, spherical_harmonic, tensor_operator
from .core import Direction, Z_AXIS, spin_of
from .fitting import damped_least_squares
from .measurement import (
    ProjectionDistribution,
    equatorial_direction,
    projection_probs,
    sample_counts,
)
from .metrology import PhaseScan
from .rng import substream

__all__ = [
    "TomographyDataset",
    "TomographyFit",
    "MultipoleDecomposition",
    "synthesize_dataset",
    "dataset_to_json",
    "dataset_from_json",
    "forward_model",
    "fit_density_matrix",
    "bootstrap_errors",
    "multipole_decompose",
    "reconstruct_density",
    "wigner",
    "coherence_ratio",
    "default_equatorial_angles",
]


@dataclass(frozen=True)
class TomographyDataset:
    """Projection data for one reconstruction.

    One z-axis distribution plus an equatorial scan covering at most a
    half turn; `phase_corrections` holds per-record angle offsets
    (field-drift corrections) added to the scan angles before fitting.
    """

    z_distribution: ProjectionDistribution
    equatorial: PhaseScan
    phase_corrections: np.ndarray = None

    def __post_init__(self):
        phis = self.equatorial.phis
        if phis[-1] - phis[0] > math.pi + 1e-9:
            raise ValueError("equatorial angles must stay within a half turn")
        corr = self.phase_corrections
        corr = np.zeros(len(phis)) if corr is None else np.asarray(corr, dtype=float)
        if len(corr) != len(phis):
            raise ValueError("need one phase correction per equatorial record")
        corr.setflags(write=False)
        object.__setattr__(self, "phase_corrections", corr)

    @property
    def j(self):
        return self.z_distribution.j

    @property
    def settings(self):
        """Measurement axes: z first, then the corrected equatorial angles."""
        axes = [Z_AXIS]
        for phi, corr in zip(self.equatorial.phis, self.phase_corrections):
            axes.append(equatorial_direction(phi + corr))
        return axes

    @property
    def observations(self):
        """Observed probabilities, one row per setting."""
        rows = [self.z_distribution.probabilities]
        rows.extend(d.probabilities for d in self.equatorial.distributions)
        return np.array(rows)


def default_equatorial_angles(n=33, phi0=0.0):
    """n uniform scan angles over [phi0, phi0 + pi)."""
    return phi0 + np.linspace(0.0, math.pi, n, endpoint=False)


def synthesize_dataset(state, phis=None, *, atom_total=None, seed=None,
                       phase_corrections=None):
    """Dataset generated from a known state, exact or multinomially sampled."""
    if phis is None:
        phis = default_equatorial_angles()
    phis = np.asarray(phis, dtype=float)
    zd = projection_probs(state, Z_AXIS)
    dists = [projection_probs(state, equatorial_direction(p)) for p in phis]
    provenance = "exact"
    if atom_total is not None:
        if seed is None:
            raise ValueError("sampling requires a seed")
        zd = sample_counts(zd, atom_total, substream(seed, 0).integers(2**63))
        dists = [
            sample_counts(d, atom_total, substream(seed, 1 + i).integers(2**63))
            for i, d in enumerate(dists)
        ]
        provenance = "sampled"
    scan = PhaseScan(phis=phis, distributions=dists, provenance=provenance)
    return TomographyDataset(z_distribution=zd, equatorial=scan,
                             phase_corrections=phase_corrections)


def dataset_to_json(data: TomographyDataset):
    """JSON-ready dict with counts when present, probabilities otherwise."""
    doc = {
        "j": data.j,
        "atom_total": data.z_distribution.atom_total,
        "phase_corrections": [float(c) for c in data.phase_corrections],
    }
    zd = data.z_distribution
    if zd.counts is not None:
        doc["z_counts"] = [int(c) for c in zd.counts]
    else:
        doc["z_probs"] = [float(p) for p in zd.probabilities]
    settings = []
    for phi, d in zip(data.equatorial.phis, data.equatorial.distributions):
        rec = {"phi": float(phi)}
        if d.counts is not None:
            rec["counts"] = [int(c) for c in d.counts]
        else:
            rec["probs"] = [float(p) for p in d.probabilities]
        settings.append(rec)
    doc["settings"] = settings
    return doc


def dataset_from_json(doc):
    """Inverse of `dataset_to_json`."""
    j = doc["j"]
    n_total = doc.get("atom_total")

    def dist(axis, rec, key_counts, key_probs):
        if key_counts in rec:
            counts = np.asarray(rec[key_counts], dtype=int)
            return ProjectionDistribution(
                j=j, axis=axis, probabilities=counts / counts.sum(),
                counts=counts, atom_total=int(counts.sum()),
            )
        return ProjectionDistribution(
            j=j, axis=axis, probabilities=np.asarray(rec[key_probs], dtype=float)
        )

    zd = dist(Z_AXIS, doc, "z_counts", "z_probs")
    phis, dists = [], []
    for rec in doc["settings"]:
        phis.append(rec["phi"])
        dists.append(dist(equatorial_direction(rec["phi"]), rec, "counts", "probs"))
    provenance = "sampled" if (n_total or zd.counts is not None) else "exact"
    scan = PhaseScan(phis=np.asarray(phis), distributions=dists, provenance=provenance)
    return TomographyDataset(
        z_distribution=zd, equatorial=scan,
        phase_corrections=np.asarray(doc.get("phase_corrections")) if doc.get("phase_corrections") else None,
    )


def _setting_bases(j, settings):
    from .measurement import _axis_basis

    return np.stack([_axis_basis(j, ax)[0].conj().T for ax in settings])


def forward_model(rho, settings):
    """Born-rule probabilities of rho for each measurement axis; linear in rho."""
    rho = np.asarray(rho)
    bd = _setting_bases(spin_of(rho), settings)
    return np.real(np.einsum("smi,ik,smk->sm", bd, rho, bd.conj()))


@dataclass(frozen=True)
class TomographyFit:
    """Reconstruction result with solver diagnostics.

    `objective_history` records the accepted objective values, which are
    non-increasing; `underdetermined` flags datasets whose linear design
    does not fix every density-matrix coefficient.
    """

    rho: np.ndarray
    objective_history: tuple
    converged: bool
    underdetermined: bool
    n_iterations: int

    @property
    def objective(self):
        return self.objective_history[-1]


def _pack_indices(d):
    rows, cols = np.tril_indices(d, -1)
    return rows, cols


def _unpack(params, d):
    rows, cols = _pack_indices(d)
    n_off = len(rows)
    low = np.zeros((d, d), dtype=complex)
    low[np.arange(d), np.arange(d)] = params[:d]
    low[rows, cols] = params[d:d + n_off] + 1j * params[d + n_off:]
    return low


def _pack(low):
    d = low.shape[0]
    rows, cols = _pack_indices(d)
    return np.concatenate(
        [np.real(np.diag(low)), np.real(low[rows, cols]), np.imag(low[rows, cols])]
    )


def _linear_inversion(bd, observations):
    """Least-squares rho from linear inversion, projected to physical states.

    Returns (rho, full_rank) where full_rank reports whether the design
    matrix determines every coefficient.
    """
    n_settings, d, _ = bd.shape
    diag_i = np.arange(d)
    rows_u, cols_u = np.triu_indices(d, 1)
    design = np.zeros((n_settings * d, d * d))
    for s in range(n_settings):
        b = bd[s].conj().T  # columns are the basis states
        for m in range(d):
            col = b[:, m]
            row = s * d + m
            outer = np.conj(col)[:, None] * col[None, :]
            design[row, :d] = np.real(np.diag(outer))
            design[row, d:d + len(rows_u)] = 2 * np.real(outer[rows_u, cols_u])
            design[row, d + len(rows_u):] = -2 * np.imag(outer[rows_u, cols_u])
    sol, _, rank, _ = np.linalg.lstsq(design, observations.ravel(), rcond=None)
    rho = np.zeros((d, d), dtype=complex)
    rho[diag_i, diag_i] = sol[:d]
    rho[rows_u, cols_u] = sol[d:d + len(rows_u)] + 1j * sol[d + len(rows_u):]
    rho = rho + rho.conj().T - np.diag(np.diag(rho).real)
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 1e-6, None)
    rho = (v * w) @ v.conj().T
    rho /= np.trace(rho).real
    return rho, rank >= d * d


def fit_density_matrix(data, *, weights=None, max_iter=500, rel_tol=1e-10,
                       init=None):
    """Least-squares reconstruction of a physical density matrix.

    Minimizes sum of weights * (predicted - observed)^2 over the
    Cholesky-parameterized states.  The solver stops when the relative
    objective decrease falls below `rel_tol` or after `max_iter`
    accepted iterations; the objective history it returns is
    non-increasing by construction.
    """
    d_obs = data.observations
    bd = _setting_bases(data.j, data.settings)
    n_settings, d, _ = bd.shape
    w = np.ones_like(d_obs) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != d_obs.shape:
        raise ValueError("weights must match the observation table")
    sqrt_w = np.sqrt(w)

    if init is None:
        rho0, full_rank = _linear_inversion(bd, d_obs)
        try:
            low0 = np.linalg.cholesky(rho0 + 1e-12 * np.eye(d))
        except np.linalg.LinAlgError:
            low0 = np.eye(d) / math.sqrt(d)
    else:
        low0 = np.asarray(init, dtype=complex)
        _, full_rank = _linear_inversion(bd, d_obs)

    rows_l, cols_l = _pack_indices(d)

    def predict(low):
        m = np.einsum("smi,ik->smk", bd, low)
        total = float(np.sum(np.abs(low) ** 2))
        return np.sum(np.abs(m) ** 2, axis=2) / total, m, total

    def residual(params):
        p, _, _ = predict(_unpack(params, d))
        return (sqrt_w * (p - d_obs)).ravel()

    def jacobian(params):
        low = _unpack(params, d)
        p, m, total = predict(low)
        # dp/dL through M = Bd L and through the normalization Tr(L L^dag)
        c = np.einsum("smk,smi->smik", m.conj(), bd)
        d_re = 2 * np.real(c) / total - (2 / total) * p[:, :, None, None] * np.real(low)[None, None, :, :]
        d_im = -2 * np.imag(c) / total - (2 / total) * p[:, :, None, None] * np.imag(low)[None, None, :, :]
        cols = [d_re[:, :, np.arange(d), np.arange(d)],
                d_re[:, :, rows_l, cols_l],
                d_im[:, :, rows_l, cols_l]]
        jac = np.concatenate(cols, axis=2)
        jac = jac * sqrt_w[:, :, None]
        return jac.reshape(n_settings * d, d * d)

    result = damped_least_squares(
        residual, jacobian, _pack(low0), max_iter=max_iter, rel_tol=rel_tol
    )
    low = _unpack(result.params, d)
    rho = low @ low.conj().T
    rho /= np.trace(rho).real
    # noise-free data can warm-start at the numerical floor where no
    # strictly decreasing step exists; an RMS probability residual at
    # rounding scale is a converged fit
    floor = d_obs.size * (100.0 * rel_tol) ** 2
    return TomographyFit(
        rho=rho,
        objective_history=result.objective_history,
        converged=result.converged or result.objective_history[-1] <= floor,
        underdetermined=not full_rank,
        n_iterations=result.n_iterations,
    )


def _resample_setting(dist, rng):
    counts = rng.multinomial(dist.atom_total, dist.probabilities)
    return ProjectionDistribution(
        j=dist.j, axis=dist.axis, probabilities=counts / dist.atom_total,
        counts=counts, atom_total=dist.atom_total,
    )


def _resample_dataset(data, rng):
    scan = PhaseScan(
        phis=data.equatorial.phis,
        distributions=[_resample_setting(d, rng)
                       for d in data.equatorial.distributions],
        provenance="sampled",
    )
    return TomographyDataset(
        z_distribution=_resample_setting(data.z_distribution, rng),
        equatorial=scan, phase_corrections=data.phase_corrections,
    )


def bootstrap_errors(data, *, n_resamples=100, seed=0, **fit_kwargs):
    """Elementwise std of |rho| over bootstrap refits.

    Counted data are resampled parametrically: every setting is redrawn
    from a multinomial with its recorded atom total and refitted from
    scratch, exactly as an independent experiment would be, so the
    spread estimates the projection-noise error of the reconstruction.
    Probability-only data carry no noise scale; those refits instead
    draw independent Exp(1) weights (mean 1) per (setting, outcome)
    record, probing the weighting sensitivity of the fit.
    """
    if n_resamples < 2:
        raise ValueError("need at least two resamples")
    counted = (data.z_distribution.atom_total is not None and
               all(dd.atom_total is not None
                   for dd in data.equatorial.distributions))
    d = int(2 * data.j) + 1
    shape = data.observations.shape
    if not counted:
        base = fit_density_matrix(data, **fit_kwargs)
        low0 = np.linalg.cholesky(base.rho + 1e-10 * np.eye(d))
    moduli = np.empty((n_resamples, d, d))
    for r in range(n_resamples):
        rng = substream(seed, r)
        if counted:
            fit = fit_density_matrix(_resample_dataset(data, rng), **fit_kwargs)
        else:
            w = rng.exponential(1.0, size=shape)
            fit = fit_density_matrix(data, weights=w, init=low0, **fit_kwargs)
        moduli[r] = np.abs(fit.rho)
    return moduli.std(axis=0)


@dataclass(frozen=True)
class MultipoleDecomposition:
    """Coefficients rho_ell^q = Tr(T_ell^q^dag rho) of a state.

    Stored as a dense array indexed [ell, q + 2j]; entries with
    |q| > ell are zero.  Reality of the Wigner function corresponds to
    rho_ell^{-q} = (-1)^q conj(rho_ell^q).
    """

    j: float
    coefficients: np.ndarray

    def coefficient(self, ell, q):
        return self.coefficients[ell, q + self.coefficients.shape[0] - 1]

    def reality_residue(self):
        lmax = self.coefficients.shape[0] - 1
        worst = 0.0
        for ell in range(lmax + 1):
            for q in range(ell + 1):
                a = self.coefficient(ell, q)
                b = self.coefficient(ell, -q)
                worst = max(worst, abs(b - (-1) ** q * np.conj(a)))
        return worst


def multipole_decompose(rho):
    """Expand a density matrix on the orthonormal tensor operators."""
    rho = np.asarray(rho)
    j = spin_of(rho)
    lmax = int(round(2 * j))
    coeffs = np.zeros((lmax + 1, 2 * lmax + 1), dtype=complex)
    for ell in range(lmax + 1):
        for q in range(-ell, ell + 1):
            coeffs[ell, q + lmax] = np.vdot(tensor_operator(j, ell, q), rho)
    return MultipoleDecomposition(j=j, coefficients=coeffs)


def reconstruct_density(decomp):
    """Sum the multipole expansion back into a density matrix."""
    j = decomp.j
    lmax = decomp.coefficients.shape[0] - 1
    d = int(round(2 * j)) + 1
    rho = np.zeros((d, d), dtype=complex)
    for ell in range(lmax + 1):
        for q in range(-ell, ell + 1):
            rho += decomp.coefficient(ell, q) * tensor_operator(j, ell, q)
    return rho


def wigner(rho, thetas, phis, *, with_residue=False):
    """Angular Wigner function W(theta, phi) = sum rho_ell^q Y_ell^q.

    Returns the real field on the (theta, phi) grid; with_residue=True
    additionally returns the largest imaginary part discarded.  The
    integral over the sphere equals sqrt(4 pi / (2j+1)) for any unit
    trace state.
    """
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    decomp = multipole_decompose(rho)
    lmax = decomp.coefficients.shape[0] - 1
    w = np.zeros((len(thetas), len(phis)), dtype=complex)
    for q in range(-lmax, lmax + 1):
        profile = np.zeros(len(thetas), dtype=complex)
        for ell in range(abs(q), lmax + 1):
            c = decomp.coefficient(ell, q)
            if c != 0:
                profile += c * spherical_harmonic(ell, q, thetas, 0.0)
        if np.any(profile):
            w += np.outer(profile, np.exp(1j * q * phis))
    residue = float(np.max(np.abs(w.imag))) if w.size else 0.0
    if with_residue:
        return w.real, residue
    return w.real


def coherence_ratio(rho):
    """Extremal coherence to population ratio 2|rho_{-j,j}| / (rho_{-j,-j} + rho_{j,j})."""
    rho = np.asarray(rho)
    pops = float(rho[0, 0].real + rho[-1, -1].real)
    if pops <= 1e-12:
        raise ValueError("extremal populations vanish; ratio undefined")
    return 2.0 * abs(rho[0, -1]) / pops
