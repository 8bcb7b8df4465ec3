"""Control waveform construction.

All controls are piecewise-constant amplitude waveforms Omega(t) on a
uniform grid: sample m holds on [m*dt, (m+1)*dt).  Three families matter
here:

* dephasing-robust sinusoids  Omega_0 * sin(lambda*t)  with lambda = 2*pi*M/T
  and Omega_0/lambda a root of the Bessel function J0 (these null the DC
  component of the dephasing filter),
* sine-modulated Slepian (DPSS) envelopes, the standard spectrally
  concentrated probe, and
* free linear combinations of cosine/sine-modulated DPSS, the search space
  of the waveform optimizer.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .slepian import DpssSet, dpss

__all__ = [
    "PiecewiseConstantWaveform",
    "WaveformCoefficients",
    "bessel_j0",
    "bessel_j0_roots",
    "root_index_for_peak_rate",
    "dephasing_robust",
    "modulated_dpss_waveform",
    "synthesize",
    "rotation_angle",
    "waveform_to_csv",
    "waveform_from_csv",
]

# net rotation below this fraction of the absolute-integral scale counts as zero
IDENTITY_RTOL = 1e-9


@dataclass(frozen=True)
class PiecewiseConstantWaveform:
    """Amplitude samples Omega_m (rad/s) held constant over segments of dt (s)."""

    samples: np.ndarray
    dt: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size < 1:
            raise ParameterError("waveform needs at least one sample")
        if not self.dt > 0.0:
            raise ParameterError(f"dt must be positive, got {self.dt}")

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def total_time(self) -> float:
        return self.n * self.dt

    @property
    def net_rotation(self) -> float:
        """Total rotation angle dt * sum(Omega_m) in rad."""
        return self.dt * float(np.sum(self.samples))

    @property
    def identity_gate(self) -> bool:
        """True when the amplitude integrates to zero (net identity)."""
        scale = max(1.0, self.dt * float(np.sum(np.abs(self.samples))))
        return abs(self.net_rotation) < IDENTITY_RTOL * scale


@dataclass(frozen=True)
class WaveformCoefficients:
    """Amplitudes of the cosine/sine-modulated DPSS expansion.

    The synthesized waveform is
        Omega_m = sum_k [cos_coeffs[k]*cos(omega0*m*dt)
                         + sin_coeffs[k]*sin(omega0*m*dt)] * v_m^(k).
    """

    omega0: float
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.cos_coeffs, dtype=float))
        s = np.atleast_1d(np.asarray(self.sin_coeffs, dtype=float))
        object.__setattr__(self, "cos_coeffs", c)
        object.__setattr__(self, "sin_coeffs", s)
        if c.shape != s.shape or c.ndim != 1 or c.size < 1:
            raise ParameterError("cos/sin coefficient arrays must be 1-D and equal length")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(s))):
            raise ParameterError("coefficients must be finite")

    @property
    def num_orders(self) -> int:
        return self.cos_coeffs.size

    def as_vector(self) -> np.ndarray:
        """Stacked [cos_coeffs, sin_coeffs], the optimizer's variable layout."""
        return np.concatenate([self.cos_coeffs, self.sin_coeffs])

    @classmethod
    def from_vector(cls, omega0: float, x: np.ndarray) -> "WaveformCoefficients":
        x = np.asarray(x, dtype=float)
        if x.size % 2:
            raise ParameterError("coefficient vector must have even length 2K")
        k = x.size // 2
        return cls(omega0=omega0, cos_coeffs=x[:k], sin_coeffs=x[k:])


# ---------------------------------------------------------------------------
# Bessel J0 and its roots
# ---------------------------------------------------------------------------

_SERIES_CUT = 14.0


def bessel_j0(x):
    """J0 evaluated by ascending series (|x| <= 14) or Hankel asymptotics.

    Good to ~1e-11 absolute everywhere, which brackets roots to better than
    1e-10.  Self-contained on purpose: the root finder below is exercised
    against an independent library oracle in the tests.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) <= _SERIES_CUT
    if np.any(small):
        out[small] = _j0_series(x[small])
    if np.any(~small):
        out[~small] = _j0_asymptotic(np.abs(x[~small]))
    return out if out.ndim else float(out)


def _j0_series(x):
    q = -0.25 * x * x
    term = np.ones_like(x)
    acc = np.ones_like(x)
    for k in range(1, 60):
        term = term * q / (k * k)
        acc += term
        if np.all(np.abs(term) < 1e-18 * (1.0 + np.abs(acc))):
            break
    return acc


def _j0_asymptotic(x):
    # Hankel expansion: J0 = sqrt(2/(pi x)) [P cos(x - pi/4) - Q sin(x - pi/4)]
    # with a_k = prod((2j-1)^2) / (k! 8^k) split into even (P) and odd (Q) k.
    inv = 1.0 / x
    coeffs = [1.0]
    for k in range(1, 12):
        coeffs.append(coeffs[-1] * (2 * k - 1) ** 2 / (8.0 * k))
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for k, a in enumerate(coeffs):
        term = a * inv**k
        if k % 2 == 0:
            p += (-1.0) ** (k // 2) * term
        else:
            q += -((-1.0) ** (k // 2)) * term
    chi = x - 0.25 * np.pi
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j0_roots(count: int) -> np.ndarray:
    """First ``count`` positive roots of J0, ascending, accurate to 1e-10.

    Bracketing uses McMahon's expansion j_r ~ (r - 1/4)*pi; each root is then
    polished by bisection on the series/asymptotic J0 evaluator.
    """
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    roots = np.empty(count)
    for r in range(1, count + 1):
        beta = (r - 0.25) * np.pi
        a, b = beta - 0.2, beta + 0.4
        fa = bessel_j0(a)
        if bessel_j0(b) * fa > 0:  # cannot happen for McMahon brackets, but be safe
            raise RuntimeError(f"failed to bracket J0 root {r}")
        for _ in range(80):
            mid = 0.5 * (a + b)
            if mid == a or mid == b or b - a <= 1e-13 * max(1.0, mid):
                break
            fm = bessel_j0(mid)
            if fm == 0.0:
                a = b = mid
                break
            if fm * fa > 0:
                a, fa = mid, fm
            else:
                b = mid
        roots[r - 1] = 0.5 * (a + b)
    return roots


def root_index_for_peak_rate(modulation_freq: float, target_rate: float) -> int:
    """1-based index of the J0 root with j * modulation_freq closest to target_rate.

    Used to sweep modulation frequency at (approximately) fixed peak Rabi
    rate: larger roots for smaller modulation frequencies.
    """
    if modulation_freq <= 0 or target_rate <= 0:
        raise ParameterError("modulation_freq and target_rate must be positive")
    guess = max(1, int(round(target_rate / (np.pi * modulation_freq) + 0.25)))
    candidates = bessel_j0_roots(guess + 1)
    errors = np.abs(candidates * modulation_freq - target_rate)
    return int(np.argmin(errors)) + 1


# ---------------------------------------------------------------------------
# Waveform families
# ---------------------------------------------------------------------------


def dephasing_robust(total_time: float, periods: int, root_index: int,
                     n_samples: int) -> PiecewiseConstantWaveform:
    """Discretized dephasing-robust waveform Omega_0 * sin(lambda * t).

    lambda = 2*pi*periods/total_time and Omega_0 = lambda * j_{0,root_index},
    sampled at the left endpoint of each segment (the first sample, at t=0,
    is zero).  The amplitude integrates to zero over the whole interval, so
    the control is a net identity.

    Parameters
    ----------
    total_time : float
        Duration T in seconds.
    periods : int
        Number M of full sine periods; lambda = 2*pi*M/T.
    root_index : int
        1-based index of the J0 root setting Omega_0/lambda.
    n_samples : int
        Number N of piecewise-constant segments; dt = T/N.
    """
    if periods < 1:
        raise ParameterError(f"periods must be >= 1, got {periods}")
    if root_index < 1:
        raise ParameterError(f"root_index must be >= 1, got {root_index}")
    if n_samples < 2 * periods:
        raise ParameterError(
            f"need n_samples >= 2*periods to sample the modulation, got {n_samples} < {2 * periods}"
        )
    if total_time <= 0:
        raise ParameterError("total_time must be positive")
    dt = total_time / n_samples
    lam = 2.0 * np.pi * periods / total_time
    omega0 = lam * bessel_j0_roots(root_index)[-1]
    m = np.arange(n_samples)
    return PiecewiseConstantWaveform(samples=omega0 * np.sin(lam * m * dt), dt=dt)


def modulated_dpss_waveform(n: int, half_bandwidth: float, peak_rate: float,
                            modulation_freq: float, dt: float) -> PiecewiseConstantWaveform:
    """Sine-modulated order-0 Slepian waveform.

    Omega_m = peak_rate * v_m * sin(modulation_freq * m * dt) where v is the
    k=0 DPSS rescaled so its maximum element is 1 (peak_rate is then the
    literal peak Rabi rate).  The modulation frequency must be an integer
    multiple of 2*pi/T so the sine closes over the waveform.

    The envelope is sampled in the periodic convention (a length N+1
    symmetric sequence with the last point dropped), which has the exact
    index-reversal symmetry v_m = v_{N-m} for m >= 1.  Together with
    sin(lambda*m*dt) = -sin(lambda*(N-m)*dt) and the vanishing m = 0 sample
    this cancels the sum pairwise, so the net rotation is zero to roundoff
    and the control is a strict identity gate.
    """
    if n * half_bandwidth < 1.0:
        raise ParameterError("need a time-bandwidth product N*W >= 1")
    total_time = n * dt
    cycles = modulation_freq * total_time / (2.0 * np.pi)
    if abs(cycles - round(cycles)) > 1e-9 * max(1.0, abs(cycles)):
        raise ParameterError(
            "modulation_freq must be an integer multiple of 2*pi/total_time "
            f"(got {cycles} cycles)"
        )
    from scipy.signal import windows

    envelope = windows.dpss(n, half_bandwidth * n, sym=False)
    envelope = envelope / np.max(np.abs(envelope))
    m = np.arange(n)
    return PiecewiseConstantWaveform(
        samples=peak_rate * envelope * np.sin(modulation_freq * m * dt), dt=dt
    )


def synthesize(coeffs: WaveformCoefficients, dpss_set: DpssSet,
               dt: float) -> PiecewiseConstantWaveform:
    """Waveform of the cosine/sine-modulated DPSS superposition."""
    if dpss_set.num_sequences < coeffs.num_orders:
        raise ParameterError(
            f"need {coeffs.num_orders} DPSS orders, set provides {dpss_set.num_sequences}"
        )
    basis = modulation_basis(dpss_set, coeffs.omega0, dt, coeffs.num_orders)
    return PiecewiseConstantWaveform(samples=basis @ coeffs.as_vector(), dt=dt)


def modulation_basis(dpss_set: DpssSet, omega0: float, dt: float,
                     num_orders: int | None = None) -> np.ndarray:
    """(N, 2K) matrix whose columns are cos- then sin-modulated DPSS."""
    k = dpss_set.num_sequences if num_orders is None else num_orders
    phase = omega0 * np.arange(dpss_set.n) * dt
    v = dpss_set.sequences[:k]
    cos_cols = v * np.cos(phase)[None, :]
    sin_cols = v * np.sin(phase)[None, :]
    return np.concatenate([cos_cols, sin_cols], axis=0).T


def rotation_angle(waveform: PiecewiseConstantWaveform) -> np.ndarray:
    """Accumulated rotation angle Theta at the N+1 segment boundaries.

    Theta_0 = 0 and Theta_{i+1} = Theta_i + dt * Omega_i (left-endpoint
    rule; Theta is the exact integral of the piecewise-constant amplitude).
    """
    theta = np.empty(waveform.n + 1)
    theta[0] = 0.0
    np.cumsum(waveform.samples * waveform.dt, out=theta[1:])
    return theta


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def waveform_to_csv(waveform: PiecewiseConstantWaveform, path, parameters: dict | None = None):
    """Write samples as CSV columns ``t_start_s, omega_rad_per_s``.

    Grid metadata and generator parameters go into ``#`` header comments.
    """
    buf = io.StringIO()
    buf.write(f"# dt_s = {waveform.dt!r}\n")
    buf.write(f"# n_samples = {waveform.n}\n")
    for key, value in (parameters or {}).items():
        buf.write(f"# {key} = {value!r}\n")
    buf.write("t_start_s,omega_rad_per_s\n")
    for m, omega in enumerate(waveform.samples):
        buf.write(f"{m * waveform.dt:.17g},{omega:.17g}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def waveform_from_csv(path) -> PiecewiseConstantWaveform:
    """Read a waveform written by :func:`waveform_to_csv`."""
    dt = None
    samples = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "dt_s" in line and "=" in line:
                    dt = float(line.split("=", 1)[1])
                continue
            if line.startswith("t_start_s"):
                continue
            samples.append(float(line.split(",")[1]))
    if dt is None:
        raise ParameterError(f"{path} has no '# dt_s = ...' header")
    return PiecewiseConstantWaveform(samples=np.asarray(samples), dt=dt)
