"""Wave-function reconstruction, density fields and energy sweeps.

The solver returns radial channel functions psi_j(rho_k) on the angular
nodes phi_j.  The full wave function follows from the cardinal-function
expansion

    Psi(rho, phi) = rho^{-1/2} sum_j D_M(phi - phi_j) psi_j(rho),

where D_M is the Dirichlet kernel of the angular grid (D_M(phi_j - phi_j')
= delta_jj').  Radial values between nodes come from local cubic Lagrange
interpolation in the map variable t = sqrt(rho/rho_max), where the physical
Psi is a smooth even function; this interpolation affects plotted densities
only, never eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .angular import AngularScheme, build_angular_scheme
from .eigensolver import Eigenpair, Spectrum, spectrum_scan, count_levels_below
from .hamiltonian import BlockBandedHamiltonian, assemble
from .model import (
    SystemConfig,
    analytic_field_free_level,
    au_to_tesla,
    hartree_to_mev,
    tesla_to_au,
)
from .radial import RadialScheme, build_radial_scheme, mass_weights


def channel_functions(pair: Eigenpair, ang: AngularScheme, rad: RadialScheme) -> np.ndarray:
    """psi_j(rho_k) of a solver eigenpair, quadrature-normalized; shape (2M+1, N)."""
    S = ang.size
    v = pair.vector.reshape(rad.N, S)
    scale = np.sqrt(S / (2.0 * math.pi)) / np.sqrt(mass_weights(rad))
    return (v * scale[:, None]).T * np.sqrt(rad.nodes)[None, :]


def _dirichlet_kernel(delta: np.ndarray, size: int) -> np.ndarray:
    """Angular cardinal function sum_m e^{i m delta} / (2M+1), real-valued."""
    delta = np.asarray(delta, dtype=float)
    num = np.sin(0.5 * size * delta)
    den = size * np.sin(0.5 * delta)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = num / den
    # delta -> multiple of 2 pi: kernel value 1 (or -1 pattern for even size;
    # size = 2M+1 is odd, so the kernel is 2 pi periodic with value 1)
    sing = np.isclose(np.mod(delta + math.pi, 2 * math.pi) - math.pi, 0.0, atol=1e-12)
    if np.isscalar(out) or out.ndim == 0:
        return float(1.0 if sing else out)
    out[sing] = 1.0
    return out


def _interp_t(values: np.ndarray, rad: RadialScheme, t_eval: np.ndarray) -> np.ndarray:
    """Local cubic Lagrange interpolation on the uniform t grid.

    `values` has shape (..., N) on nodes t_k = k/N, k=1..N; stencils shift
    one-sided near both ends (the interpolated functions are smooth in t),
    and points beyond t=1 return 0 (decay region).
    """
    N = rad.N
    h = 1.0 / N
    t = np.clip(np.asarray(t_eval, dtype=float), 0.0, None)
    out = np.zeros(values.shape[:-1] + t.shape, dtype=values.dtype)
    ok = t <= 1.0
    if not np.any(ok):
        return out
    tv = t[ok]
    lo = np.clip(np.floor(tv / h).astype(int) - 1, 1, N - 3)
    idx = np.stack([lo, lo + 1, lo + 2, lo + 3], axis=0)
    tn = idx * h
    w = np.ones((4,) + tv.shape)
    for a in range(4):
        for b in range(4):
            if a != b:
                w[a] *= (tv - tn[b]) / (tn[a] - tn[b])
    vals = values[..., idx - 1]  # (..., 4, pts)
    out[..., ok] = np.einsum("ap,...ap->...p", w, vals)
    return out


def reconstruct_wavefunction(
    pair: Eigenpair,
    ang: AngularScheme,
    rad: RadialScheme,
    rho,
    phi,
) -> np.ndarray:
    """Complex amplitude Psi(rho, phi); accepts scalars or broadcastable arrays.

    Exact at grid points by the cardinal property; zero outside
    [rho_1, rho_N] where the state has decayed.
    """
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    rho_b, phi_b = np.broadcast_arrays(rho, phi)
    psi = channel_functions(pair, ang, rad)          # (S, N)
    cap_psi = psi / np.sqrt(rad.nodes)[None, :]      # Psi_j on nodes, smooth in t
    t_eval = np.sqrt(np.clip(rho_b, 0.0, None) / rad.rho_max)
    rad_vals = _interp_t(cap_psi, rad, t_eval)       # (S, ...)
    kern = _dirichlet_kernel(phi_b[None, ...] - ang.nodes.reshape((-1,) + (1,) * phi_b.ndim),
                             ang.size)
    out = np.einsum("j...,j...->...", kern, rad_vals)
    out = np.where((rho_b >= rad.nodes[0]) & (rho_b <= rad.rho_max), out, 0.0)
    return out if out.ndim else complex(out)


@dataclass
class DensityField:
    """|Psi|^2 sampled on a Cartesian grid."""

    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)   # shape (ny, nx)
    extents: tuple = (0.0, 0.0, 0.0, 0.0)    # x_min, x_max, y_min, y_max
    norm_estimate: float = 0.0

    def anisotropy(self) -> float:
        """x-extent over y-extent of the half-maximum region."""
        half = 0.5 * self.values.max()
        mask = self.values >= half
        if not mask.any():
            return 1.0
        xs = self.x[mask.any(axis=0)]
        ys = self.y[mask.any(axis=1)]
        wx = np.ptp(xs) if len(xs) > 1 else (self.x[1] - self.x[0])
        wy = np.ptp(ys) if len(ys) > 1 else (self.y[1] - self.y[0])
        return float(wx / wy)


def state_norm(pair: Eigenpair, ang: AngularScheme, rad: RadialScheme) -> float:
    """Quadrature norm int |Psi|^2 rho drho dphi of a reconstructed state."""
    psi = channel_functions(pair, ang, rad)
    w = mass_weights(rad)
    cap = np.abs(psi) ** 2 / rad.nodes[None, :]
    return float((2.0 * math.pi / ang.size) * np.sum(cap * w[None, :]))


def support_radius(pair: Eigenpair, ang: AngularScheme, rad: RadialScheme,
                   fraction: float = 0.9999) -> float:
    """Radius enclosing the given norm fraction (density-plot extents)."""
    psi = channel_functions(pair, ang, rad)
    w = mass_weights(rad)
    radial_profile = np.sum(np.abs(psi) ** 2 / rad.nodes[None, :], axis=0) * w
    cum = np.cumsum(radial_profile)
    cum /= cum[-1]
    k = int(np.searchsorted(cum, fraction))
    return float(rad.nodes[min(k + 1, rad.N - 1)])


def density_field(
    pair: Eigenpair,
    ang: AngularScheme,
    rad: RadialScheme,
    extents: tuple | None = None,
    resolution: int = 512,
) -> DensityField:
    """|Psi(x, y)|^2 on a Cartesian grid; default extents enclose 99.99% norm."""
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    if extents is None:
        r = support_radius(pair, ang, rad)
        extents = (-r, r, -r, r)
    x_min, x_max, y_min, y_max = extents
    x = np.linspace(x_min, x_max, resolution)
    y = np.linspace(y_min, y_max, resolution)
    xx, yy = np.meshgrid(x, y)
    rho = np.hypot(xx, yy)
    phi = np.arctan2(yy, xx)
    amp = reconstruct_wavefunction(pair, ang, rad, rho, phi)
    vals = np.abs(amp) ** 2
    return DensityField(
        x=x, y=y, values=vals, extents=tuple(extents),
        norm_estimate=state_norm(pair, ang, rad),
    )


@dataclass
class SweepRow:
    state: int
    B: float
    B_unit: str
    alpha_deg: float
    energy: float
    energy_unit: str
    error_flag: str = ""


@dataclass
class EnergyTable:
    """Energy rows keyed by (state, B, alpha); units recorded per row."""

    rows: list = field(default_factory=list)

    def add(self, row: SweepRow):
        key = (row.state, row.B, row.alpha_deg)
        if any((r.state, r.B, r.alpha_deg) == key for r in self.rows):
            raise ValueError(f"duplicate sweep row for {key}")
        self.rows.append(row)

    def energy(self, state: int, B: float, alpha_deg: float) -> float:
        for r in self.rows:
            if (r.state, r.B, r.alpha_deg) == (state, B, alpha_deg):
                return r.energy
        raise KeyError((state, B, alpha_deg))

    def curve(self, state: int, B: float) -> tuple[np.ndarray, np.ndarray]:
        """(alpha_deg, energy) arrays for one state at fixed B, sorted."""
        pts = sorted((r.alpha_deg, r.energy) for r in self.rows
                     if r.state == state and r.B == B and not r.error_flag)
        a = np.array([p[0] for p in pts])
        e = np.array([p[1] for p in pts])
        return a, e


def lowest_levels(
    cfg: SystemConfig,
    ang: AngularScheme,
    rad: RadialScheme,
    count: int,
    tol: float = 1e-10,
    seed: int = 11,
    keep_vectors: bool = False,
) -> Spectrum:
    """The `count` lowest levels of the assembled Hamiltonian.

    The window is bracketed automatically: the lower edge starts below the
    field-free ground state and is pushed down until no level lies beneath
    it; the upper edge grows until enough levels are inside.
    """
    h = assemble(cfg, ang, rad)
    e_lo = min(1.4 * analytic_field_free_level(1, cfg), -0.1 / cfg.epsilon**2) - 0.05
    while count_levels_below(h, e_lo) > 0:
        e_lo -= max(1.0, abs(e_lo))
    e_hi = e_lo + 1.0
    n_lo = count_levels_below(h, e_lo)
    while count_levels_below(h, e_hi) - n_lo < count:
        e_hi += max(1.0, 0.35 * (e_hi - e_lo))
    return spectrum_scan(h, (e_lo, e_hi), target_count=count, tol=tol, seed=seed,
                         keep_vectors=keep_vectors)


def _overlap_relabel(prev_pairs: list[Eigenpair], cur_pairs: list[Eigenpair]) -> list[int]:
    """Greedy max-overlap assignment: position i of the result names the
    current-pair index that continues previous curve label i."""
    if not prev_pairs:
        return list(range(len(cur_pairs)))
    ov = np.abs(np.array([[np.vdot(p.vector, q.vector) for q in cur_pairs]
                          for p in prev_pairs]))
    taken = set()
    labels = [-1] * len(prev_pairs)
    for i in np.argsort(-ov.max(axis=1)):          # most confident first
        order = np.argsort(-ov[i])
        for j in order:
            if j not in taken:
                labels[i] = int(j)
                taken.add(int(j))
                break
    return labels


def energy_sweep(
    system,
    states: list[int],
    points: list[tuple[float, float]],
    b_unit: str = "au",
    grid=None,
    tol: float = 1e-10,
    seed: int = 11,
    track: bool = False,
) -> EnergyTable:
    """Energies of the requested states over (B, alpha_deg) sweep points.

    `system` is a callable (B_au, alpha_rad) -> SystemConfig; `grid` is a
    callable (B_au) -> (M, N, rho_max) or a fixed tuple.  State index 0 is
    the ground state, so the paper's first excited state is state 1.
    Exciton sweeps pass b_unit='T' and get energies in meV; hydrogen sweeps
    stay in atomic units.  Unconverged points are flagged, never filled.

    With `track=True`, state labels within an angle sweep at fixed B follow
    the eigenvector-overlap continuation from the previous angle instead of
    plain energy order, which keeps curve labels stable through avoided
    crossings (requires a B-independent grid so vectors are comparable).
    """
    from .config import auto_grid  # deferred import; config has no heavy deps

    table = EnergyTable()
    n_top = max(states)
    prev: dict[float, list[Eigenpair]] = {}
    for (b_val, alpha_deg) in sorted(points):
        b_au = tesla_to_au(b_val) if b_unit == "T" else b_val
        cfg = system(b_au, math.radians(alpha_deg))
        if callable(grid):
            M, N, rho_max = grid(b_au)
        elif grid is not None:
            M, N, rho_max = grid
        else:
            M, N, rho_max = auto_grid(cfg, n_top)
        ang = build_angular_scheme(M)
        rad = build_radial_scheme(N, rho_max)
        try:
            spec = lowest_levels(cfg, ang, rad, n_top + 1, tol=tol, seed=seed,
                                 keep_vectors=track)
            pairs = sorted(spec.pairs, key=lambda p: p.energy) if track else []
            flat = np.repeat(spec.energies, spec.multiplicities)
            complete = spec.complete
        except Exception:
            pairs = []
            flat = np.array([])
            complete = False
        if track and pairs:
            labels = _overlap_relabel(prev.get(b_val, []), pairs)
            if prev.get(b_val):
                flat = np.array([pairs[j].energy if j >= 0 else math.nan
                                 for j in labels])
            prev[b_val] = [pairs[j] for j in labels if j >= 0] or pairs
        for s in states:
            if s < len(flat) and math.isfinite(flat[s]):
                e = float(flat[s])
                flag = "" if complete else "incomplete"
            else:
                e = math.nan
                flag = "unconverged"
            energy = hartree_to_mev(e) if b_unit == "T" else e
            table.add(SweepRow(state=s, B=b_val, B_unit=b_unit, alpha_deg=alpha_deg,
                               energy=energy, energy_unit="meV" if b_unit == "T" else "au",
                               error_flag=flag))
    return table
