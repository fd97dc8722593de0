"""Ensemble averages over experimental imperfections and photon scattering.

A cloud of independent spins sees slightly different light pulses:
atoms away from the beam axis see less intensity, atoms away from the
focus see an elliptical polarization, the quantization field is tilted
and adds Larmor precession, the prepared state has a small population
leak, the pulse has a finite rise time, and a small fraction of atoms
scatters a photon.  Averaging pure-state evolutions over these
imperfections yields the mixed state actually probed, and each effect
can be toggled individually to budget its impact.

Photon scattering uses the Monte Carlo wavefunction method: between
jumps the state evolves under H - (i/2) sum L_q^dag L_q, and detected
decay triggers a quantum jump through one of the Rayleigh/Raman
channels of the J -> J+1 transition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq

from .angular import clebsch_gordan
from .core import _unit_vector, basis_state, expi_hermitian, make_operators, spin_of
from .dynamics import light_shift_operator
from .rng import substream

__all__ = [
    "ImperfectionConfig",
    "ensemble_evolve",
    "scattering_channels",
    "scattering_probability",
    "mcwf_scattering",
]


@dataclass(frozen=True)
class ImperfectionConfig:
    """Experimental imperfections entering the ensemble average.

    With sampling "positional" each sample draws an atom position in
    the Gaussian cloud (rms radius `cloud_sigma`); the beam profile
    (waist `beam_waist`) then fixes its relative intensity and the beam
    divergence (half-angle `beam_divergence`) its polarization
    ellipticity.  `intensity_rms_fraction` and `stokes_s3` act as
    switches for the two positional effects.  With sampling "gaussian"
    the intensity factor is drawn as N(1, intensity_rms_fraction)
    truncated at four sigma and the ellipticity as N(0, stokes_s3/2),
    both independent.
    """

    intensity_rms_fraction: float = 0.0
    stokes_s3: float = 0.0
    field_axis_components: tuple = None
    initial_leak_fraction: float = 0.0
    pulse_rise_time: float = 0.0
    scattering_probability: float = 0.0
    ensemble_samples: int = 2000
    sampling: str = "positional"
    cloud_sigma: float = 7.3e-6
    beam_waist: float = 50e-6
    beam_divergence: float = 4e-3

    def __post_init__(self):
        for name in ("intensity_rms_fraction", "stokes_s3",
                     "initial_leak_fraction", "scattering_probability"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.pulse_rise_time < 0:
            raise ValueError("pulse rise time must be non-negative")
        if self.ensemble_samples < 1:
            raise ValueError("need at least one ensemble sample")
        if self.sampling not in ("positional", "gaussian"):
            raise ValueError("sampling must be 'positional' or 'gaussian'")
        for name in ("cloud_sigma", "beam_waist", "beam_divergence"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        axis = self.field_axis_components
        if axis is not None:
            vec = np.asarray(axis, dtype=float)
            norm = np.linalg.norm(vec)
            if vec.shape != (3,) or norm == 0:
                raise ValueError("field axis must be a nonzero 3-vector")
            # printed component lists may be slightly off unit norm; keep
            # already-normalized vectors bit-stable so serialization
            # round-trips to the same configuration hash
            if abs(norm - 1.0) > 1e-12:
                vec = vec / norm
            object.__setattr__(self, "field_axis_components",
                               tuple(float(c) for c in vec))

    @property
    def field_axis(self):
        if self.field_axis_components is None:
            return None
        return np.array(self.field_axis_components)


def _imperfection_draws(imp, seed):
    """Per-sample relative intensity f and polarization ellipticity."""
    n = imp.ensemble_samples
    f = np.ones(n)
    eps = np.zeros(n)
    use_f = imp.intensity_rms_fraction > 0
    use_eps = imp.stokes_s3 > 0
    if not (use_f or use_eps):
        return f, eps
    if imp.sampling == "positional":
        sigma = imp.cloud_sigma / math.sqrt(2.0)
        for i in range(n):
            x, z = substream(seed, 0, i).normal(0.0, sigma, 2)
            if use_f:
                f[i] = math.exp(-2.0 * (x * x + z * z) / imp.beam_waist**2)
            if use_eps:
                eps[i] = imp.beam_divergence * x / imp.beam_waist
        return f, eps
    for i in range(n):
        rng = substream(seed, 0, i)
        if use_f:
            draw = rng.normal(0.0, 1.0)
            while abs(draw) > 4.0:
                draw = rng.normal(0.0, 1.0)
            f[i] = 1.0 + imp.intensity_rms_fraction * draw
        if use_eps:
            eps[i] = rng.normal(0.0, imp.stokes_s3 / 2.0)
    return f, eps


def _hamiltonian_parts(cfg, imp, ops, f, eps):
    """Split per-sample Hamiltonians into light, quartic, and field terms.

    The light and quartic parts scale with the local intensity (once
    and twice respectively) and are returned as per-sample stacks; the
    static-field term is shared.  All terms are in rad/s.
    """
    j = ops.j
    jx2 = ops.jx @ ops.jx
    jy2 = ops.jy @ ops.jy
    omega = cfg.omega * f
    denom = 1.0 + eps**2
    scale = (omega / denom)[:, None, None]
    light = scale * (jx2[None] + (eps**2)[:, None, None] * jy2[None])
    light -= (omega * (2 * j + 3) * eps / denom)[:, None, None] * ops.jz[None]
    quartic = None
    if cfg.include_jx4:
        qmat = (2 * j * j + 3 * j + 1) * jx2 + jx2 @ jx2
        quartic = (omega**2 / cfg.detuning, qmat)
    field = None
    if cfg.omega_larmor:
        axis = imp.field_axis
        b = axis if axis is not None else _unit_vector(cfg.field_axis)
        field = cfg.omega_larmor * (b[0] * ops.jx + b[1] * ops.jy + b[2] * ops.jz)
    return light, quartic, field


def _pulse_duration(area_time, rise):
    """Duration of a pulse with exponential rise and the same area.

    Solves T - rise * (1 - exp(-T/rise)) = area_time, so the integrated
    intensity matches a square pulse of length area_time.
    """
    if rise == 0:
        return area_time

    def gap(total):
        return total - rise * (1.0 - math.exp(-total / rise)) - area_time

    return brentq(gap, area_time, area_time + rise + 1e-15)


@lru_cache(maxsize=None)
def _dipole_blocks(two_j):
    """Coupling matrices ground J -> excited J+1 for photon polarization q."""
    j = two_j / 2.0
    d = two_j + 1
    blocks = []
    for q in (-1, 0, 1):
        block = np.zeros((d + 2, d))
        for col in range(d):
            m = col - j
            block[col + q + 1, col] = clebsch_gordan(j, m, 1, q, j + 1, m + q)
        block.setflags(write=False)
        blocks.append(block)
    return tuple(blocks)


def scattering_channels(j, polarization=(1.0, 0.0, 0.0)):
    """Jump operators for photon scattering on the J -> J+1 line.

    Returns (channels, kmat): three ground-state operators, one per
    emitted-photon polarization, at unit overall rate, and the total
    kmat = sum L^dag L, which is proportional to the light-shift
    operator of the same drive polarization.
    """
    two_j = int(round(2 * j))
    blocks = _dipole_blocks(two_j)
    u = np.asarray(polarization, dtype=complex)
    u = u / math.sqrt(float(np.real(np.vdot(u, u))))
    # spherical components of the drive polarization
    comps = (
        (u[0] + 1j * u[1]) / math.sqrt(2.0),      # q = -1
        u[2],                                     # q =  0
        -(u[0] - 1j * u[1]) / math.sqrt(2.0),     # q = +1
    )
    absorb = sum(c * b for c, b in zip(comps, blocks))
    channels = [b.conj().T @ absorb for b in blocks]
    kmat = sum(ch.conj().T @ ch for ch in channels)
    return channels, kmat


def scattering_probability(initial, p, t):
    """Photon-scattering probability over a pulse of duration t.

    One minus the no-jump survival under the physical scattering rate
    (linewidth / detuning) times the light-shift operator.
    """
    initial = np.asarray(initial, dtype=complex)
    ops = make_operators(spin_of(initial))
    h = light_shift_operator(p, ops)
    rate = (p.linewidth / p.detuning) * h
    final = expm((-1j * h - 0.5 * rate) * t) @ initial
    return 1.0 - float(np.real(np.vdot(final, final)))


def _apply_jump(psi, channels, rng_value):
    """Replace psi by one normalized jump channel, chosen by branching ratio."""
    weights = np.array([np.real(np.vdot(ch @ psi, ch @ psi)) for ch in channels])
    edges = np.cumsum(weights) / weights.sum()
    pick = int(np.searchsorted(edges, rng_value))
    out = channels[min(pick, len(channels) - 1)] @ psi
    return out / math.sqrt(float(np.real(np.vdot(out, out))))


def mcwf_scattering(initial, p, t, trajectories, seed, *, steps=400,
                    target_probability=None):
    """Quantum-trajectory average of the pulse with photon scattering.

    Evolves under the light-shift Hamiltonian of `p` while jump
    channels fire at the physical rate (linewidth / detuning) times the
    light shift; `target_probability` rescales that rate so the no-jump
    survival matches 1 - target exactly (0 disables scattering).
    """
    if trajectories < 1:
        raise ValueError("need at least one trajectory")
    initial = np.asarray(initial, dtype=complex)
    j = spin_of(initial)
    ops = make_operators(j)
    h = light_shift_operator(p, ops)
    rate = (p.linewidth / p.detuning) * h
    channels, kmat = scattering_channels(j, p.polarization)
    gamma = float(np.trace(rate).real / np.trace(kmat).real)
    mismatch = np.max(np.abs(rate - gamma * kmat))
    if mismatch > 1e-6 * max(np.max(np.abs(rate)), 1e-300):
        raise ValueError("scattering rate is not proportional to the channel sum")
    if gamma < 0:
        raise ValueError("negative scattering rate; check the detuning sign")
    if target_probability is not None:
        gamma = _match_rate(initial, h, kmat, t, target_probability, gamma)
    channels = [math.sqrt(gamma) * ch for ch in channels]

    dt = t / steps
    u_step = expm((-1j * h - 0.5 * gamma * kmat) * dt)
    psi = np.repeat(initial[None, :], trajectories, axis=0)
    draws = np.stack([substream(seed, i).random(steps + 8) for i in range(trajectories)])
    extra = np.full(trajectories, steps)
    for k in range(steps):
        stepped = psi @ u_step.T
        norms = np.real(np.einsum("ni,ni->n", stepped, stepped.conj()))
        jump = draws[:, k] < 1.0 - norms
        psi = stepped / np.sqrt(norms)[:, None]
        for i in np.flatnonzero(jump):
            psi[i] = _apply_jump(stepped[i], channels, draws[i, extra[i]])
            extra[i] += 1
            if extra[i] >= steps + 8:  # replenish, still deterministic
                draws[i, steps:] = substream(seed, i, int(extra[i])).random(8)
                extra[i] = steps
    return np.einsum("ni,nk->ik", psi, psi.conj()) / trajectories


def _match_rate(initial, h, kmat, t, target, gamma_guess):
    """Rate multiplier whose no-jump survival equals 1 - target."""
    if target == 0:
        return 0.0
    if not 0 < target < 1:
        raise ValueError("scattering probability must lie in [0, 1)")

    def survival(gamma):
        final = expm((-1j * h - 0.5 * gamma * kmat) * t) @ initial
        return float(np.real(np.vdot(final, final)))

    gamma = gamma_guess if gamma_guess > 0 else 1.0 / t
    # survival is nearly exponential in the rate, so two updates suffice
    for _ in range(3):
        decay = -math.log(survival(gamma)) / gamma
        gamma = -math.log1p(-target) / decay
    return gamma


def _run_steps(psi, env, ds, light_eig, quartic_eig, field_half, decay_eig,
               draws, seed):
    """March the per-sample states through the shaped pulse.

    psi has shape (samples, dim); light_eig carries the per-sample
    eigendecomposition of the unit-envelope light term.  With draws
    None the norm simply decays (no jumps), which is what the rate
    calibration integrates.
    """
    n, dim = psi.shape
    wa, va = light_eig
    if draws is not None:
        extra = np.full(n, env.size)
    for k, e_k in enumerate(env):
        if field_half is not None:
            psi = psi @ field_half.T
        amp = np.einsum("nmk,nm->nk", va.conj(), psi)
        amp *= np.exp(-1j * wa * (e_k * ds))
        psi = np.einsum("nik,nk->ni", va, amp)
        if quartic_eig is not None:
            scale, qw, qv = quartic_eig
            amp = psi @ qv.conj()
            amp *= np.exp(-1j * scale[:, None] * qw[None, :] * (e_k**2 * ds))
            psi = amp @ qv.T
        if decay_eig is not None:
            gamma_f, kw, kv, channels = decay_eig
            amp = psi @ kv.conj()
            amp *= np.exp(-0.5 * gamma_f[:, None] * kw[None, :] * (e_k * ds))
            decayed = amp @ kv.T
            if draws is None:
                psi = decayed
            else:
                norms = np.real(np.einsum("ni,ni->n", decayed, decayed.conj()))
                ref = np.real(np.einsum("ni,ni->n", psi, psi.conj()))
                jump = draws[:, k] < 1.0 - norms / ref
                psi = decayed / np.sqrt(norms)[:, None]
                for i in np.flatnonzero(jump):
                    psi[i] = _apply_jump(decayed[i], channels, draws[i, extra[i]])
                    extra[i] += 1
                    if extra[i] >= draws.shape[1]:
                        draws[i, env.size:] = substream(seed, 2, i, int(extra[i])).random(
                            draws.shape[1] - env.size)
                        extra[i] = env.size
        if field_half is not None:
            psi = psi @ field_half.T
    return psi


def _ensemble_density(initial, cfg, imp, t, f, eps, seed, ops):
    """Average the per-sample evolutions into a density matrix."""
    dim = initial.size
    light, quartic, field = _hamiltonian_parts(cfg, imp, ops, f, eps)
    starters = [(1.0 - imp.initial_leak_fraction, initial)]
    if imp.initial_leak_fraction > 0:
        starters.append((imp.initial_leak_fraction, basis_state(ops.j, -ops.j + 1)))

    rho = np.zeros((dim, dim), dtype=complex)
    if imp.pulse_rise_time == 0 and imp.scattering_probability == 0:
        h = light if field is None else light + field[None]
        if quartic is not None:
            scale, qmat = quartic
            h = h + scale[:, None, None] * qmat[None]
        w, v = np.linalg.eigh(h)
        for weight, psi0 in starters:
            amp = np.einsum("nmk,m->nk", v.conj(), psi0)
            amp *= np.exp(-1j * w * t)
            psis = np.einsum("nik,nk->ni", v, amp)
            rho += weight * np.einsum("ni,nk->ik", psis, psis.conj())
        return rho / len(f)

    duration = _pulse_duration(t, imp.pulse_rise_time)
    n_steps = max(64, math.ceil(duration / 1e-9))
    ds = duration / n_steps
    grid = (np.arange(n_steps) + 0.5) * ds
    if imp.pulse_rise_time > 0:
        env = 1.0 - np.exp(-grid / imp.pulse_rise_time)
    else:
        env = np.ones(n_steps)
    light_eig = np.linalg.eigh(light)
    quartic_eig = None
    if quartic is not None:
        scale, qmat = quartic
        qw, qv = np.linalg.eigh(qmat)
        quartic_eig = (scale, qw, qv)
    field_half = None if field is None else expi_hermitian(field, ds / 2.0)

    decay_eig = None
    draws = None
    if imp.scattering_probability > 0 and t > 0:
        channels, kmat = scattering_channels(ops.j)
        kw, kv = np.linalg.eigh(kmat)
        nominal = (np.ones(1), np.zeros(1))
        gamma = _calibrate_ensemble_rate(
            initial, cfg, imp, t, env, ds, kmat, ops, nominal)
        decay_eig = (gamma * f, kw, kv, channels)
        draws = np.stack(
            [substream(seed, 1, i).random(n_steps + 8) for i in range(len(f))]
        )

    for weight, psi0 in starters:
        psi = np.repeat(psi0[None, :], len(f), axis=0).astype(complex)
        psi = _run_steps(psi, env, ds, light_eig, quartic_eig, field_half,
                         decay_eig, None if draws is None else draws.copy(), seed)
        norms = np.real(np.einsum("ni,ni->n", psi, psi.conj()))
        psi = psi / np.sqrt(norms)[:, None]
        rho += weight * np.einsum("ni,nk->ik", psi, psi.conj())
    return rho / len(f)


def _calibrate_ensemble_rate(initial, cfg, imp, t, env, ds, kmat, ops, nominal):
    """Unit-intensity jump rate hitting the configured pulse probability."""
    f1, eps1 = nominal
    light, quartic, field = _hamiltonian_parts(cfg, imp, ops, f1, eps1)
    light_eig = np.linalg.eigh(light)
    quartic_eig = None
    if quartic is not None:
        scale, qmat = quartic
        qw, qv = np.linalg.eigh(qmat)
        quartic_eig = (scale, qw, qv)
    field_half = None if field is None else expi_hermitian(field, ds / 2.0)
    kw, kv = np.linalg.eigh(kmat)
    target = imp.scattering_probability

    def survival(gamma):
        psi = initial[None, :].astype(complex)
        psi = _run_steps(psi, env, ds, light_eig, quartic_eig, field_half,
                         (np.array([gamma]), kw, kv, None), None, None)
        return float(np.real(np.vdot(psi[0], psi[0])))

    expect = float(np.real(np.vdot(initial, kmat @ initial)))
    gamma = target / max(expect * t, 1e-300)
    for _ in range(3):
        decay = -math.log(survival(gamma)) / gamma
        gamma = -math.log1p(-target) / decay
    return gamma


def ensemble_evolve(initial, cfg, imp, t, seed):
    """Mixed state after the pulse, averaged over sampled imperfections.

    Each sample draws a relative intensity and ellipticity, evolves the
    (possibly leaky) initial state under its own Hamiltonian for time t
    with the configured pulse shape and scattering, and the projectors
    are averaged.  Fixed seeds reproduce the result bit for bit.
    """
    initial = np.asarray(initial, dtype=complex)
    if initial.ndim != 1:
        raise ValueError("ensemble evolution starts from a state vector")
    ops = make_operators(spin_of(initial))
    f, eps = _imperfection_draws(imp, seed)
    return _ensemble_density(initial, cfg, imp, t, f, eps, seed, ops)
