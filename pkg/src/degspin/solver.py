"""1D free Schrodinger evolution of the lower 2-spinor and reconstruction of the full LL spinor.

Space is periodic.  The Laplacian is the compact fourth-order (Numerov)
operator ``(1 + delta^2/12)^-1 delta^2 / dx^2``, so each Crank-Nicolson
step is one cyclic tridiagonal solve:

    (B - r delta^2) chi^{n+1} = (B + r delta^2) chi^n,
    B = 1 + delta^2 / 12,  r = i dt / (4 m dx^2).
"""

from __future__ import annotations

import csv
import logging
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import IntegratorFailureError, InvalidMassError
from .flat import GaussianPacket1D
from .spinor import SIGMA, SpinorField, dirac, ll_residual

log = logging.getLogger(__name__)

MODES = ("planewave", "wavepacket", "reduce-check")
NORM_DRIFT_LIMIT = 1e-6
CSV_HEADER = ["t", "x"] + [f"{p}_psi{i}" for i in range(4) for p in ("re", "im")]


@dataclass
class SolveConfig:
    mass: float = 1.0
    grid_points: int = 512
    dx: float = 0.05
    dt: float = 0.001
    steps: int = 1000
    sigma0: float = 1.0
    k0: float = 1.0
    x0: float = 0.0
    mode: str = "wavepacket"
    k: tuple = (1.0, 0.0, 0.0)
    spinor: tuple = (1.0, 0.0)
    save_every: int = 100

    def validate(self):
        if not (np.isfinite(self.mass) and self.mass > 0):
            raise InvalidMassError(f"mass must be positive, got {self.mass}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.grid_points < 16:
            raise ValueError("grid_points must be at least 16")
        if self.dx <= 0 or self.dt <= 0 or self.sigma0 <= 0:
            raise ValueError("dx, dt and sigma0 must be positive")
        if self.steps < 0 or self.save_every < 1:
            raise ValueError("steps must be >= 0 and save_every >= 1")
        if self.dt > self.dx**2 * self.mass:
            warnings.warn(
                f"dt = {self.dt} exceeds dx^2 * mass = {self.dx**2 * self.mass}; expect phase errors",
                stacklevel=2,
            )
        return self

    def grid(self) -> np.ndarray:
        n = self.grid_points
        return (np.arange(n) - n // 2) * self.dx

    def lower_spinor(self) -> np.ndarray:
        u = np.asarray(self.spinor, dtype=complex)
        return u / np.linalg.norm(u)


@dataclass
class Trajectory:
    times: np.ndarray
    x: np.ndarray
    psi: np.ndarray  # (n_times, n_x, 4)

    def field(self) -> SpinorField:
        dt = self.times[1] - self.times[0] if len(self.times) > 1 else 1.0
        return SpinorField(self.psi, axes=(0, 1), spacing=(dt, self.x[1] - self.x[0]),
                           origin=(self.times[0], self.x[0]), periodic=(False, True),
                           uniform_axes=(2, 3))


@dataclass
class RunReport:
    mode: str
    residual_max: float
    residual_l2: float
    norm_drift: Optional[float]
    l2_error: Optional[float]
    time_error: Optional[float]
    wall_time: float
    output: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# Crank-Nicolson core


def _cyclic_tridiagonal_solver(diag: complex, off: complex, n: int):
    """Solver for the constant cyclic tridiagonal system via Sherman-Morrison."""
    gamma = -diag
    main = np.full(n, diag, dtype=complex)
    main[0] -= gamma
    main[-1] -= off * off / gamma
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = off
    ab[1] = main
    ab[2, :-1] = off
    u = np.zeros(n, dtype=complex)
    u[0], u[-1] = gamma, off
    z = solve_banded((1, 1), ab, u)
    denom = 1 + z[0] + off * z[-1] / gamma

    def solve(rhs):
        y = solve_banded((1, 1), ab, rhs, check_finite=False)
        return y - (y[0] + off * y[-1] / gamma) / denom * z

    return solve


def _delta2(v):
    return np.roll(v, 1) - 2 * v + np.roll(v, -1)


class CrankNicolson:
    """Periodic compact-Laplacian Crank-Nicolson propagator for one scalar component."""

    def __init__(self, n: int, dx: float, dt: float, mass: float):
        self.n, self.dx, self.dt, self.mass = n, dx, dt, mass
        self.r = 1j * dt / (4 * mass * dx**2)
        # LHS = B - r delta^2
        self._solve = _cyclic_tridiagonal_solver(10 / 12 + 2 * self.r, 1 / 12 - self.r, n)

    def step(self, chi: np.ndarray) -> np.ndarray:
        rhs = chi + _delta2(chi) / 12 + self.r * _delta2(chi)
        return self._solve(rhs)

    def eigenvalues(self) -> np.ndarray:
        """Spectrum of the discrete Hamiltonian on FFT modes (``np.fft.fftfreq`` ordering)."""
        theta = 2 * np.pi * np.fft.fftfreq(self.n)
        lap = -(2 - 2 * np.cos(theta)) / (1 - (2 - 2 * np.cos(theta)) / 12) / self.dx**2
        return -lap / (2 * self.mass)

    def exact_in_time(self, chi0: np.ndarray, t: float) -> np.ndarray:
        """Semi-discrete solution: the same spatial operator propagated exactly in time."""
        return np.fft.ifft(np.exp(-1j * self.eigenvalues() * t) * np.fft.fft(chi0))


def l2_norm(v, dx: float) -> float:
    return float(np.sqrt(np.sum(np.abs(v) ** 2) * dx))


def reconstruct_1d(chi: np.ndarray, u: np.ndarray, dx: float, mass: float) -> np.ndarray:
    """4-spinor ``(sigma_1 u d_x chi / 2mi, u chi)`` with a periodic central difference."""
    dchi = (np.roll(chi, -1, axis=-1) - np.roll(chi, 1, axis=-1)) / (2 * dx)
    upper = (dchi / (2j * mass))[..., None] * (SIGMA[0] @ u)
    return np.concatenate([upper, chi[..., None] * u], axis=-1)


def _ll_window(window: np.ndarray, x: np.ndarray, t0: float, dt: float, mass: float) -> np.ndarray:
    psi = SpinorField(window, axes=(0, 1), spacing=(dt, x[1] - x[0]), origin=(t0, x[0]),
                      periodic=(False, True), uniform_axes=(2, 3))
    return ll_residual(psi, mass, dirac(psi)).values[0]


def evolve_wavepacket(cfg: SolveConfig, output=None, reference: bool = True, residual: bool = True):
    """Evolve a Gaussian packet; returns ``(RunReport, Trajectory)``.

    The report carries the L2 error against the analytic spreading Gaussian,
    the time-discretization error against the semi-discrete solution, the
    norm drift and the LL residual of the reconstructed 4-spinor (central
    differences in time over consecutive steps; skipped when ``residual`` is
    false).
    """
    cfg.validate()
    start = time.perf_counter()
    x = cfg.grid()
    u = cfg.lower_spinor()
    packet = GaussianPacket1D(cfg.mass, cfg.sigma0, cfg.k0, cfg.x0)
    chi0 = packet(x, 0.0).astype(complex)
    prop = CrankNicolson(cfg.grid_points, cfg.dx, cfg.dt, cfg.mass)

    norm0 = l2_norm(chi0, cfg.dx)
    drift = 0.0
    res_max, res_sq, res_n = 0.0, 0.0, 0
    times, slices = [0.0], [reconstruct_1d(chi0, u, cfg.dx, cfg.mass)]
    prev, cur = None, chi0
    for n in range(1, cfg.steps + 1):
        nxt = prop.step(cur)
        drift = max(drift, abs(l2_norm(nxt, cfg.dx) - norm0) / norm0)
        if drift > NORM_DRIFT_LIMIT:
            raise IntegratorFailureError(f"norm drift {drift:.3e} at step {n}")
        if residual and prev is not None:
            window = reconstruct_1d(np.stack([prev, cur, nxt]), u, cfg.dx, cfg.mass)
            r = np.linalg.norm(_ll_window(window, x, (n - 2) * cfg.dt, cfg.dt, cfg.mass), axis=-1)
            res_max = max(res_max, float(r.max()))
            res_sq += float(np.sum(r**2))
            res_n += 1
        prev, cur = cur, nxt
        if n % cfg.save_every == 0 or n == cfg.steps:
            times.append(n * cfg.dt)
            slices.append(reconstruct_1d(cur, u, cfg.dx, cfg.mass))

    T = cfg.steps * cfg.dt
    l2_error = l2_norm(cur - packet(x, T), cfg.dx)
    time_error = l2_norm(cur - prop.exact_in_time(chi0, T), cfg.dx) if reference else None
    traj = Trajectory(np.array(times), x, np.stack(slices))
    report = RunReport(
        mode="wavepacket",
        residual_max=res_max,
        residual_l2=float(np.sqrt(res_sq * cfg.dx * cfg.dt)),
        norm_drift=drift,
        l2_error=l2_error,
        time_error=time_error,
        wall_time=0.0,
        extra={"final_time": T, "residual_slices": res_n},
    )
    if output is not None:
        write_csv(traj, output)
        report.output = str(output)
    report.wall_time = time.perf_counter() - start
    log.info("wavepacket: L2 error %.3e, drift %.3e", l2_error, drift)
    return report, traj


def final_lower(traj: Trajectory, cfg: SolveConfig) -> np.ndarray:
    """Scalar wave function recovered from the lower block of the last slice."""
    return traj.psi[-1, :, 2:] @ np.conj(cfg.lower_spinor())


# --------------------------------------------------------------------------
# CSV


def write_csv(traj: Trajectory, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for t, sl in zip(traj.times, traj.psi):
            for xv, spinor in zip(traj.x, sl):
                row = [t, xv]
                for z in spinor:
                    row += [z.real, z.imag]
                w.writerow([f"{v:.17g}" for v in row])
    return path


def read_csv(path) -> Trajectory:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected trajectory header {header}")
        rows = np.array([[float(v) for v in row] for row in reader])
    times = np.unique(rows[:, 0])
    nt = len(times)
    nx = len(rows) // nt
    rows = rows.reshape(nt, nx, 10)
    psi = rows[..., 2::2] + 1j * rows[..., 3::2]
    return Trajectory(rows[:, 0, 0], rows[0, :, 1], psi)
