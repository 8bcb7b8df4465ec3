"""First- and higher-order control filter functions.

For a piecewise-constant amplitude waveform with rotation angle
Theta(t) = integral of Omega, the first-order filter functions are

    F_Omega(w, T) = (1/4) |int_0^T e^{iwt} Omega(t) dt|^2        (rad^2 s^2)
    F_Z(w, T)     = |int e^{iwt} sin Theta|^2 + |int e^{iwt} cos Theta|^2  (s^2)

Both time integrals are evaluated segment-exactly: Omega is constant and
Theta is linear on each segment, so every segment contributes a closed-form
integral and the quadrature carries no O(dt) rectangle bias.  This matters
because the analytic oracles (the Lorentzian-squared amplitude filter of the
sinusoidal waveforms, and the Fejer-comb dephasing filter) are continuous-
time results that the sampled waveform must reproduce at the 1% level.

The higher-order dephasing filter G_Z(w, w', T) is a quadruple time integral
of sin[Theta(t1)-Theta(t2)] sin[Theta(t3)-Theta(t4)] against three exponential
pairings.  Expanding the sines factorizes every term into products of the
double transform

    W(a, b) = dt^2 sum_{j1} sin(Th_j1) e^{i a t_j1} sum_{j2<=j1} cos(Th_j2) e^{i b t_j2}
              - (sin <-> cos),

which prefix sums evaluate in O(N) per frequency column; a discrete Fourier
transform over the row index then yields whole frequency grids at once.
G_Z deliberately uses the plain left-endpoint Riemann convention so that the
brute-force quadruple sum reproduces it exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridError, ParameterError
from .waveform import PiecewiseConstantWaveform, rotation_angle

__all__ = [
    "FilterFunctionGrid",
    "HigherOrderFFGrid",
    "amplitude_ff",
    "dephasing_ff",
    "dephasing_ff_dc",
    "dephasing_ff_periodic_oracle",
    "higher_order_ff",
    "higher_order_ff_brute",
    "ff_to_csv",
    "higher_order_ff_to_csv",
]

_BLOCK = 256  # frequency rows per vectorized block: keeps temporaries ~ tens of MB


@dataclass(frozen=True)
class FilterFunctionGrid:
    """A first-order filter function sampled on a frequency grid."""

    omegas: np.ndarray
    values: np.ndarray
    total_time: float

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "values", values)
        if omegas.shape != values.shape or omegas.ndim != 1:
            raise ParameterError("omega and value grids must be 1-D and congruent")
        if omegas.size > 1 and not np.all(np.diff(omegas) > 0):
            raise GridError("frequency grid must be strictly increasing")


@dataclass(frozen=True)
class HigherOrderFFGrid:
    """G_Z(w, w', T) on the tensor grid omegas x omegas_prime (complex, s^4)."""

    omegas: np.ndarray
    omegas_prime: np.ndarray
    values: np.ndarray
    total_time: float


def _segment_integral(u: np.ndarray, dt: float) -> np.ndarray:
    """int_0^dt e^{i u s} ds = (e^{i u dt} - 1)/(i u), with the u -> 0 limit."""
    u = np.asarray(u, dtype=float)
    out = np.empty(u.shape, dtype=complex)
    small = np.abs(u) * dt < 1e-7
    ub = u[~small]
    out[~small] = (np.exp(1j * ub * dt) - 1.0) / (1j * ub)
    us = u[small]
    # series to O((u dt)^3): dt (1 + i u dt/2 - (u dt)^2/6)
    out[small] = dt * (1.0 + 1j * us * dt / 2.0 - (us * dt) ** 2 / 6.0)
    return out


def amplitude_ff(waveform: PiecewiseConstantWaveform, omegas) -> FilterFunctionGrid:
    """Amplitude filter function F_Omega on the given angular-frequency grid."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    t = np.arange(waveform.n) * waveform.dt
    values = np.empty(omegas.size)
    for lo in range(0, omegas.size, _BLOCK):
        w = omegas[lo:lo + _BLOCK]
        phases = np.exp(1j * np.outer(w, t))
        transform = (phases @ waveform.samples) * _segment_integral(w, waveform.dt)
        values[lo:lo + _BLOCK] = 0.25 * np.abs(transform) ** 2
    return FilterFunctionGrid(omegas=omegas, values=values, total_time=waveform.total_time)


def _exp_theta_transforms(waveform: PiecewiseConstantWaveform, omegas: np.ndarray):
    """Segment-exact transforms of e^{+i Theta} and e^{-i Theta}.

    Returns (I_plus, I_minus) with
        I_pm(w) = int_0^T e^{iwt} e^{+-i Theta(t)} dt,
    using Theta linear with slope Omega_m on segment m.
    """
    theta = rotation_angle(waveform)[:-1]
    t = np.arange(waveform.n) * waveform.dt
    i_plus = np.empty(omegas.size, dtype=complex)
    i_minus = np.empty(omegas.size, dtype=complex)
    for lo in range(0, omegas.size, _BLOCK):
        w = omegas[lo:lo + _BLOCK, None]
        seg_p = _segment_integral(w + waveform.samples[None, :], waveform.dt)
        seg_m = _segment_integral(w - waveform.samples[None, :], waveform.dt)
        base = np.exp(1j * (w * t[None, :]))
        rot = np.exp(1j * theta)[None, :]
        i_plus[lo:lo + _BLOCK] = np.sum(base * rot * seg_p, axis=1)
        i_minus[lo:lo + _BLOCK] = np.sum(base * np.conj(rot) * seg_m, axis=1)
    return i_plus, i_minus


def dephasing_ff(waveform: PiecewiseConstantWaveform, omegas) -> FilterFunctionGrid:
    """Dephasing filter function F_Z on the given angular-frequency grid."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    i_plus, i_minus = _exp_theta_transforms(waveform, omegas)
    cos_tr = 0.5 * (i_plus + i_minus)
    sin_tr = (i_plus - i_minus) / 2j
    values = np.abs(cos_tr) ** 2 + np.abs(sin_tr) ** 2
    return FilterFunctionGrid(omegas=omegas, values=values, total_time=waveform.total_time)


def dephasing_ff_dc(waveform: PiecewiseConstantWaveform) -> float:
    """F_Z(0, T) = |int_0^T e^{i Theta(t)} dt|^2, segment-exact."""
    i_plus, _ = _exp_theta_transforms(waveform, np.zeros(1))
    return float(np.abs(i_plus[0]) ** 2)


# ---------------------------------------------------------------------------
# Periodic (Fejer-kernel) oracle for the dephasing-robust family
# ---------------------------------------------------------------------------


def _fejer(omega: np.ndarray, periods: int, lam: float) -> np.ndarray:
    """sin^2(M pi w/lambda) / sin^2(pi w/lambda), with the M^2 limit at w = k*lambda."""
    x = np.pi * omega / lam
    out = np.empty_like(x)
    near = np.abs(x - np.round(x / np.pi) * np.pi) < 1e-6
    xs = x[near] - np.round(x[near] / np.pi) * np.pi
    m = float(periods)
    # series of sin^2(M x)/sin^2(x) about a multiple of pi
    out[near] = m * m * (1.0 - (m * m - 1.0) * xs * xs / 3.0)
    xb = x[~near]
    out[~near] = np.sin(m * xb) ** 2 / np.sin(xb) ** 2
    return out


def dephasing_ff_periodic_oracle(periods: int, modulation_freq: float, peak_rate: float,
                                 omegas) -> FilterFunctionGrid:
    """Exact F_Z of the continuous waveform Omega_0 sin(lambda t) over M periods.

    Periodicity reduces the transform to a single-period integral times the
    Fejer factor sin^2(M pi w/lambda)/sin^2(pi w/lambda).  The single-period
    integrals of cos(Theta) e^{-iwt} and sin(Theta) e^{-iwt}, with
    Theta(t) = (Omega_0/lambda)(1 - cos lambda t), are evaluated by adaptive
    quadrature; accuracy is limited only by the quadrature tolerance, which
    makes this an independent oracle for :func:`dephasing_ff`.
    """
    from scipy.integrate import quad

    if periods < 1:
        raise ParameterError("periods must be >= 1")
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    lam = float(modulation_freq)
    tau = 2.0 * np.pi / lam
    ratio = peak_rate / lam

    def theta(t):
        return ratio * (1.0 - np.cos(lam * t))

    values = np.empty(omegas.size)
    for i, w in enumerate(omegas):
        cos_re = quad(lambda t: np.cos(theta(t)) * np.cos(w * t), 0, tau, limit=400)[0]
        cos_im = quad(lambda t: np.cos(theta(t)) * np.sin(w * t), 0, tau, limit=400)[0]
        sin_re = quad(lambda t: np.sin(theta(t)) * np.cos(w * t), 0, tau, limit=400)[0]
        sin_im = quad(lambda t: np.sin(theta(t)) * np.sin(w * t), 0, tau, limit=400)[0]
        single = cos_re**2 + cos_im**2 + sin_re**2 + sin_im**2
        values[i] = single
    values *= _fejer(omegas, periods, lam)
    return FilterFunctionGrid(omegas=omegas, values=values, total_time=periods * tau)


# ---------------------------------------------------------------------------
# Higher-order filter function G_Z
# ---------------------------------------------------------------------------


def _check_dft_grid(omegas: np.ndarray, waveform: PiecewiseConstantWaveform) -> np.ndarray:
    """Angular frequencies must be integer multiples of 2*pi/(N*dt)."""
    base = 2.0 * np.pi / (waveform.n * waveform.dt)
    idx = omegas / base
    rounded = np.round(idx)
    if np.any(np.abs(idx - rounded) > 1e-8 * np.maximum(1.0, np.abs(idx))):
        raise GridError(
            "higher-order FF frequencies must be integer multiples of 2*pi/(N*dt)"
        )
    return rounded.astype(int)


def _ordered_double_transforms(theta: np.ndarray, dt: float, alphas: np.ndarray,
                               betas: np.ndarray) -> np.ndarray:
    """W[a, b] = dt^2 * [ sum_{j1} sin(Th_j1) e^{i a t_j1} sum_{j2<=j1} cos(Th_j2) e^{i b t_j2}
                          - (sin and cos swapped) ].

    The inner sums over j2 are running prefix sums, built once per beta; the
    outer sums are Fourier transforms over j1 evaluated at all requested
    alphas by one matrix product per beta batch.
    """
    n = theta.size
    t = np.arange(n) * dt
    sin_t, cos_t = np.sin(theta), np.cos(theta)
    outer = np.exp(1j * np.outer(alphas, t))  # (A, N)
    w = np.empty((alphas.size, betas.size), dtype=complex)
    for j, beta in enumerate(betas):
        inner_phase = np.exp(1j * beta * t)
        prefix_cos = np.cumsum(cos_t * inner_phase)
        prefix_sin = np.cumsum(sin_t * inner_phase)
        w[:, j] = outer @ (sin_t * prefix_cos - cos_t * prefix_sin)
    return w * dt * dt


def higher_order_ff(waveform: PiecewiseConstantWaveform, omegas,
                    omegas_prime) -> HigherOrderFFGrid:
    """G_Z(w, w', T) for all pairs from ``omegas`` x ``omegas_prime``.

    Both grids must be subsets of the DFT grid w = 2*pi*j/(N*dt).  With the
    double transform W of the module docstring and the three exponential
    pairings of the quadruple integral,

        G_Z(w, w') = W(w, -w) W(w', -w')
                     + W(w, w') [ W(-w, -w') + W(-w', -w) ].
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    omegas_prime = np.atleast_1d(np.asarray(omegas_prime, dtype=float))
    _check_dft_grid(omegas, waveform)
    _check_dft_grid(omegas_prime, waveform)

    theta = rotation_angle(waveform)[:-1]
    needed = np.unique(np.concatenate([omegas, -omegas, omegas_prime, -omegas_prime]))
    w_all = _ordered_double_transforms(theta, waveform.dt, needed, needed)
    pos = {om: i for i, om in enumerate(needed)}

    def W(a, b):
        return w_all[pos[a], pos[b]]

    diag_w = np.array([W(w, -w) for w in omegas])
    diag_wp = np.array([W(wp, -wp) for wp in omegas_prime])
    values = np.empty((omegas.size, omegas_prime.size), dtype=complex)
    for i, w in enumerate(omegas):
        for j, wp in enumerate(omegas_prime):
            values[i, j] = diag_w[i] * diag_wp[j] + W(w, wp) * (W(-w, -wp) + W(-wp, -w))
    return HigherOrderFFGrid(
        omegas=omegas, omegas_prime=omegas_prime, values=values,
        total_time=waveform.total_time,
    )


def higher_order_ff_brute(waveform: PiecewiseConstantWaveform, omega: float,
                          omega_prime: float) -> complex:
    """Direct quadruple Riemann sum for G_Z at one frequency pair (O(N^4)).

    Shares no code with the fast path; the test suite uses it as the
    correctness oracle at small N.
    """
    n = waveform.n
    dt = waveform.dt
    theta = rotation_angle(waveform)[:-1]
    t = np.arange(n) * dt
    lower = np.tril(np.ones((n, n)))  # j2 <= j1
    sin_diff = np.sin(theta[:, None] - theta[None, :]) * lower

    e_w = np.exp(1j * omega * t)
    e_wp = np.exp(1j * omega_prime * t)
    total = 0.0 + 0.0j
    # pairing e^{iw(t1-t2)} e^{iw'(t3-t4)}
    a12 = np.einsum("ab,a,b->", sin_diff, e_w, np.conj(e_w))
    a34 = np.einsum("cd,c,d->", sin_diff, e_wp, np.conj(e_wp))
    total += a12 * a34
    # pairing e^{iw(t1-t3)} e^{iw'(t2-t4)}
    b12 = np.einsum("ab,a,b->ab", sin_diff, e_w, e_wp)
    b34 = np.einsum("cd,c,d->cd", sin_diff, np.conj(e_w), np.conj(e_wp))
    total += np.sum(b12) * np.sum(b34)
    # pairing e^{iw(t1-t4)} e^{iw'(t2-t3)}
    c34 = np.einsum("cd,c,d->cd", sin_diff, np.conj(e_wp), np.conj(e_w))
    total += np.sum(b12) * np.sum(c34)
    return complex(total * dt**4)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def ff_to_csv(grid: FilterFunctionGrid, path):
    """CSV columns ``omega_rad_per_s, value``."""
    with open(path, "w") as fh:
        fh.write("omega_rad_per_s,value\n")
        for w, v in zip(grid.omegas, grid.values):
            fh.write(f"{w:.17g},{v:.17g}\n")


def higher_order_ff_to_csv(grid: HigherOrderFFGrid, path):
    """CSV columns ``omega, omega_prime, re, im`` (rad/s and s^4)."""
    with open(path, "w") as fh:
        fh.write("omega,omega_prime,re,im\n")
        for i, w in enumerate(grid.omegas):
            for j, wp in enumerate(grid.omegas_prime):
                z = grid.values[i, j]
                fh.write(f"{w:.17g},{wp:.17g},{z.real:.17g},{z.imag:.17g}\n")
