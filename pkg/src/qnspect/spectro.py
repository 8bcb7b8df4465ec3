"""Linear inversion of amplitude-noise measurements into a spectrum estimate.

Discretizing the overlap integral <Delta a1^2> = (1/pi) int F_Omega S dw
into L bands of width delta_omega turns one tomographic measurement per
modulation frequency into a row of the linear system F . S = P.  Band
integrals use the actual filter functions (trapezoid quadrature resolving
the 2*pi/T linewidth), the first band is widened to [0, 1.5*delta_omega] so
it encloses the filter peak sitting at lambda = delta_omega, and the system
is solved by non-negative least squares.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridError, NonConvergenceError, ParameterError
from .filterfn import amplitude_ff
from .waveform import PiecewiseConstantWaveform

__all__ = ["OverlapMatrix", "ReconstructionResult", "overlap_matrix", "nnls", "reconstruct"]


@dataclass(frozen=True)
class OverlapMatrix:
    """Band-integrated amplitude filter functions, one row per probe waveform."""

    matrix: np.ndarray          # (R, L), units s (rad^2 s^2 integrated over rad/s / pi)
    delta_omega: float
    band_centers: np.ndarray    # (L,) = (1..L) * delta_omega
    row_labels: np.ndarray      # identifier per probe waveform (its modulation index)


@dataclass(frozen=True)
class ReconstructionResult:
    frequencies: np.ndarray
    estimates: np.ndarray
    residual_norm: float
    condition_number: float
    true_spectrum: np.ndarray | None = None
    relative_errors: np.ndarray | None = None


def overlap_matrix(waveforms, num_bands: int, delta_omega: float,
                   points_per_linewidth: int = 8,
                   row_labels=None) -> OverlapMatrix:
    """Assemble the band-integral matrix [F]_rl = (1/pi) int_band_l F_Omega_r dw.

    Bands: l = 1 integrates [0, 1.5*delta_omega]; l > 1 integrates
    [(l - 1/2)*delta_omega, (l + 1/2)*delta_omega].

    Parameters
    ----------
    waveforms : sequence of PiecewiseConstantWaveform
        All sharing the same total time.
    num_bands : int
        L, the number of spectral estimation bands.
    delta_omega : float
        Band width in rad/s; L*delta_omega must not exceed the waveform
        Nyquist frequency pi/dt.
    points_per_linewidth : int
        Trapezoid resolution in points per 2*pi/T; at least 8 is required to
        resolve the filter peaks.
    """
    waveforms = list(waveforms)
    if not waveforms:
        raise ParameterError("need at least one probe waveform")
    total_time = waveforms[0].total_time
    for wf in waveforms:
        if abs(wf.total_time - total_time) > 1e-12 * total_time:
            raise ParameterError("all probe waveforms must share the total time")
    if num_bands * delta_omega > np.pi / waveforms[0].dt * (1 + 1e-12):
        raise ParameterError("num_bands * delta_omega exceeds the Nyquist frequency")
    if points_per_linewidth < 8:
        raise GridError("points_per_linewidth below 8 under-resolves the filter peaks")

    linewidth = 2.0 * np.pi / total_time
    edges = [(0.0, 1.5 * delta_omega)] + [
        ((l - 0.5) * delta_omega, (l + 0.5) * delta_omega) for l in range(2, num_bands + 1)
    ]
    grids = []
    for lo, hi in edges:
        npts = max(9, int(np.ceil((hi - lo) / linewidth * points_per_linewidth)) + 1)
        grids.append(np.linspace(lo, hi, npts))

    labels = np.arange(1, len(waveforms) + 1) if row_labels is None else np.asarray(row_labels)
    matrix = np.empty((len(waveforms), num_bands))
    for r, wf in enumerate(waveforms):
        for l, grid in enumerate(grids):
            ff = amplitude_ff(wf, grid)
            matrix[r, l] = np.trapezoid(ff.values, grid) / np.pi
    return OverlapMatrix(
        matrix=matrix,
        delta_omega=delta_omega,
        band_centers=np.arange(1, num_bands + 1) * delta_omega,
        row_labels=labels,
    )


def nnls(matrix: np.ndarray, y: np.ndarray, max_iter: int | None = None) -> np.ndarray:
    """Lawson-Hanson active-set solver for min ||A x - y|| with x >= 0.

    At the returned solution the KKT conditions hold: x >= 0, and the
    gradient w = A^T (y - A x) satisfies w <= tol on the zero set and
    |w| <= tol on the support, with tol = 1e-10 * max|A^T y|.

    Raises
    ------
    NonConvergenceError
        If the iteration cap is reached; the best iterate is attached.
    """
    a = np.asarray(matrix, dtype=float)
    y = np.asarray(y, dtype=float)
    if a.ndim != 2 or y.shape != (a.shape[0],):
        raise ParameterError("matrix and measurement vector dimensions disagree")
    n = a.shape[1]
    if max_iter is None:
        max_iter = 5 * n + 50

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    tol = 1e-10 * max(np.abs(a.T @ y).max(), 1e-300)

    for _ in range(max_iter):
        w = a.T @ (y - a @ x)
        candidates = ~passive & (w > tol)
        if not candidates.any():
            return x
        entering = int(np.flatnonzero(candidates)[np.argmax(w[candidates])])
        passive[entering] = True

        while True:
            z = np.zeros(n)
            sub = np.flatnonzero(passive)
            z[sub], *_ = np.linalg.lstsq(a[:, sub], y, rcond=None)
            if z[sub].min() > 0.0:
                x = z
                break
            shrink = passive & (z <= 0.0)
            alpha = np.min(x[shrink] / (x[shrink] - z[shrink]))
            x = x + alpha * (z - x)
            drop = passive & (x <= 1e-12 * max(1.0, np.abs(x).max()))
            passive[drop] = False
            x[~passive] = 0.0
    raise NonConvergenceError("NNLS iteration cap reached", best=x)


def reconstruct(measurements, matrix: OverlapMatrix, true_spectrum=None,
                weights=None) -> ReconstructionResult:
    """Invert per-modulation-frequency estimator values into a spectrum.

    Parameters
    ----------
    measurements : array, one tomographic estimator value per matrix row.
    matrix : OverlapMatrix
    true_spectrum : optional array of S(l * delta_omega) for error reporting.
    weights : optional per-row nonnegative weights applied to rows and
        measurements before the (otherwise unweighted) regression.
    """
    y = np.asarray(measurements, dtype=float)
    a = matrix.matrix
    if y.shape != (a.shape[0],):
        raise ParameterError("need exactly one measurement per matrix row")
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != y.shape or np.any(weights < 0):
            raise ParameterError("weights must be one nonnegative value per row")
        a = a * weights[:, None]
        y = y * weights

    estimates = nnls(a, y)
    residual = float(np.linalg.norm(a @ estimates - y))
    cond = float(np.linalg.cond(a))
    rel = None
    truth = None
    if true_spectrum is not None:
        truth = np.asarray(true_spectrum, dtype=float)
        if truth.shape != estimates.shape:
            raise ParameterError("true spectrum must have one value per band")
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(truth != 0.0, (estimates - truth) / truth, np.nan)
    return ReconstructionResult(
        frequencies=matrix.band_centers,
        estimates=estimates,
        residual_norm=residual,
        condition_number=cond,
        true_spectrum=truth,
        relative_errors=rel,
    )
