"""Scan results, curve fits and the CSV number format shared by all outputs."""

import csv
import io
import logging
import math
import warnings
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import OptimizeWarning, curve_fit

from cantibec.errors import OutputError

logger = logging.getLogger(__name__)

FLAG_OK = "ok"


def format_number(value: float) -> str:
    """Scientific notation with 9 significant digits."""
    return f"{value:.8e}"


class LorentzianFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    center: float
    fwhm: float
    amplitude: float
    baseline: float


class LinearFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    slope: float
    intercept: float
    r_squared: float
    points: int


class ScanResult(BaseModel):
    """A series of (abscissa, observable) points with optional fit metadata.

    ``flags`` holds one entry per point, ``"ok"`` unless the point failed, in
    which case its observable is NaN. ``notes`` holds scan-level remarks.
    """

    kind: str
    abscissa_label: str
    observable_label: str
    abscissa: list[float]
    observable: list[float]
    stderr: list[float] = Field(default_factory=list)
    fit: LorentzianFit | None = None
    linear: LinearFit | None = None
    flags: list[str] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)
    metadata: dict[str, str | float | int] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_lengths(self) -> "ScanResult":
        n = len(self.abscissa)
        if len(self.observable) != n:
            raise ValueError("abscissa and observable differ in length")
        if not self.stderr:
            self.stderr = [0.0] * n
        if len(self.stderr) != n:
            raise ValueError("stderr and abscissa differ in length")
        if not self.flags:
            self.flags = [FLAG_OK] * n
        if len(self.flags) != n:
            raise ValueError("flags and abscissa differ in length")
        return self

    def usable_points(self) -> tuple[list[float], list[float]]:
        """Abscissa and observable of the points that did not fail."""
        kept = [
            (a, o) for a, o, f in zip(self.abscissa, self.observable, self.flags)
            if f == FLAG_OK and math.isfinite(o)
        ]
        return [a for a, _ in kept], [o for _, o in kept]


def lorentzian(x, center, fwhm, amplitude, baseline):
    return baseline + amplitude / (1 + ((x - center) / (0.5 * fwhm)) ** 2)


def fit_lorentzian(x, y, dip: bool = True) -> LorentzianFit | None:
    """Least-squares Lorentzian through (x, y).

    Args:
        x: Abscissa values
        y: Observable values
        dip: Fit a minimum (True) or a peak (False)

    Returns:
        The fit, or None for flat data, when curve_fit does not converge or
        when the parameter covariance cannot be estimated.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 4 or np.ptp(y) <= 1e-9 * max(np.max(np.abs(y)), 1e-300):
        logger.info("flat scan, Lorentzian fit rejected")
        return None

    # fit in centred, rescaled coordinates
    x0 = float(np.mean(x))
    sx = float(np.ptp(x)) or 1.0
    u = (x - x0) / sx
    i_ext = int(np.argmin(y) if dip else np.argmax(y))
    baseline = float(np.max(y) if dip else np.min(y))
    amplitude = float(y[i_ext] - baseline)
    half = baseline + 0.5 * amplitude
    inside = (y <= half) if dip else (y >= half)
    width = max(float(np.ptp(u[inside])) if inside.sum() > 1 else 0.0, float(np.min(np.diff(np.sort(u)))))
    p0 = [u[i_ext], width, amplitude, baseline]
    try:
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("error", OptimizeWarning)
            params, _ = curve_fit(lorentzian, u, y, p0=p0, maxfev=20000)
    except (RuntimeError, ValueError, OptimizeWarning) as e:
        logger.warning(f"Lorentzian fit rejected: {e}")
        return None
    center, fwhm, amplitude, baseline = params
    if not np.all(np.isfinite(params)) or fwhm == 0:
        logger.warning("Lorentzian fit returned non-finite parameters")
        return None
    return LorentzianFit(
        center=x0 + center * sx,
        fwhm=abs(fwhm) * sx,
        amplitude=float(amplitude),
        baseline=float(baseline),
    )


def linear_fit(x, y) -> LinearFit:
    """Ordinary least-squares line with coefficient of determination."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        raise ValueError("a linear fit needs at least two points")
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sum((y - (slope * x + intercept)) ** 2))
    total = float(np.sum((y - np.mean(y)) ** 2))
    r_squared = 1.0 - residual / total if total > 0 else (1.0 if residual == 0 else 0.0)
    return LinearFit(slope=float(slope), intercept=float(intercept), r_squared=r_squared, points=len(x))


def scan_csv_text(result: ScanResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["abscissa", "observable", "stderr"])
    for a, o, s in zip(result.abscissa, result.observable, result.stderr):
        writer.writerow([format_number(a), format_number(o), format_number(s)])
    if result.fit is not None:
        buffer.write(f"# fit_center={format_number(result.fit.center)}, fit_fwhm={format_number(result.fit.fwhm)}\n")
        buffer.write(
            f"# fit_amplitude={format_number(result.fit.amplitude)}, "
            f"fit_baseline={format_number(result.fit.baseline)}\n"
        )
    if result.linear is not None:
        buffer.write(
            f"# linear_slope={format_number(result.linear.slope)}, "
            f"linear_r2={format_number(result.linear.r_squared)}\n"
        )
    return buffer.getvalue()


def write_text(path: Path, text: str) -> Path:
    """Write with ``\\n`` line endings, mapping OS failures to OutputError."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e
    return path


def write_scan_csv(result: ScanResult, path: Path) -> Path:
    return write_text(path, scan_csv_text(result))
