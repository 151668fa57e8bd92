"""Continuation of named states from the axially symmetric limit.

At alpha=0 the published excited states carry exact angular-momentum
labels: E1 is the lowest m=-1 level, E2 the lowest m=-2 level, E3 the
second m=0 level.  Once the field tilts, m is no longer conserved and
high-|m| states of the near-degenerate Zeeman ladder sweep through the
spectrum, so plain energy order does not identify the published states at
every (B, alpha).  This module follows each labeled state from alpha=0 by
eigenvector overlap along a march in alpha, solving a window around the
predicted energies at each step; crossings with ladder states are passed
diabatically, which is how the published angle curves behave.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import eig_banded

from .angular import AngularScheme, build_angular_scheme
from .eigensolver import spectrum_scan
from .hamiltonian import assemble, radial_mode_hamiltonian
from .model import SystemConfig, hydrogen_2d
from .radial import RadialScheme, build_radial_scheme

#: (m, radial index) labels of the published excited states at alpha=0
TABLE_STATE_LABELS = {1: (-1, 0), 2: (-2, 0), 3: (0, 1)}


def mode_vector_2d(cfg: SystemConfig, ang: AngularScheme, rad: RadialScheme,
                   m: int, k: int) -> tuple[float, np.ndarray]:
    """Energy and 2D solver vector of the (m, k) state at alpha=0.

    The decoupled radial eigenvector u embeds exactly as
    z[k_rad, j] = u[k_rad] exp(i m phi_j) / sqrt(2M+1), an eigenvector of
    the full Hamiltonian whenever the potential is axially symmetric.
    """
    if abs(m) > ang.M:
        raise ValueError(f"|m|={abs(m)} exceeds angular truncation M={ang.M}")
    ab = radial_mode_hamiltonian(cfg, rad, m)
    w, v = eig_banded(ab, lower=True, select="i", select_range=(k, k))
    phase = np.exp(1j * m * ang.nodes) / math.sqrt(ang.size)
    z = (v[:, 0].astype(complex)[:, None] * phase[None, :]).reshape(-1)
    return float(w[0]), z


def track_states_alpha(
    system,
    B_au: float,
    target_angles_deg: list[float],
    labels: dict[int, tuple[int, int]] = None,
    grid: tuple[int, int, float] = None,
    step_deg: float = 9.0,
    tol: float = 1e-10,
    seed: int = 11,
) -> dict[float, dict[int, float]]:
    """March the labeled states in alpha and report them at target angles.

    `system` is a callable (B_au, alpha_rad) -> SystemConfig.  Returns
    {angle_deg: {state: energy}} for every requested angle (0 included if
    requested).  Raises RuntimeError when the overlap continuation becomes
    ambiguous even after step refinement.
    """
    labels = labels or TABLE_STATE_LABELS
    if grid is None:
        from .config import auto_grid
        grid = auto_grid(system(B_au, 0.0), 4)
    M, N, rho_max = grid
    ang = build_angular_scheme(M)
    rad = build_radial_scheme(N, rho_max)

    cfg0 = system(B_au, 0.0)
    energies = {}
    vectors = {}
    for state, (m, k) in labels.items():
        e, z = mode_vector_2d(cfg0, ang, rad, m, k)
        energies[state] = e
        vectors[state] = z

    out: dict[float, dict[int, float]] = {}
    targets = sorted(set(target_angles_deg))
    if targets and targets[0] == 0.0:
        out[0.0] = dict(energies)

    alpha = 0.0
    prev_energies = dict(energies)
    top = max(targets) if targets else 0.0
    checkpoints = [t for t in targets if t > 0.0]
    step = step_deg
    guard = 0
    while alpha < top - 1e-9:
        guard += 1
        if guard > 400:
            raise RuntimeError("alpha continuation failed to advance")
        next_alpha = min(alpha + step, top)
        for t in checkpoints:
            if alpha < t < next_alpha:
                next_alpha = t
                break
        cfg = system(B_au, math.radians(next_alpha))
        h = assemble(cfg, ang, rad)
        # windows around linear predictions of the tracked energies
        frac = (next_alpha - alpha) / max(step, 1e-12)
        pred = {s: energies[s] + (energies[s] - prev_energies[s]) * frac
                for s in energies}
        scale = 1.0 + max(abs(v) for v in pred.values())
        margin = max(0.12 * scale * (next_alpha - alpha) / 9.0, 0.02 * scale)
        lo = min(pred.values()) - margin
        hi = max(pred.values()) + margin
        spec = spectrum_scan(h, (lo, hi), tol=tol, seed=seed, keep_vectors=True)
        ok, new_e, new_v = _match(vectors, spec.pairs)
        if not ok:
            # widen once, then fall back to a halved step
            spec = spectrum_scan(h, (lo - 4 * margin, hi + 4 * margin),
                                 tol=tol, seed=seed, keep_vectors=True)
            ok, new_e, new_v = _match(vectors, spec.pairs)
        if not ok:
            if step <= step_deg / 8:
                raise RuntimeError(
                    f"overlap continuation ambiguous at alpha={next_alpha:.2f} deg"
                )
            step /= 2
            continue
        prev_energies = dict(energies) if next_alpha - alpha > 1e-9 else prev_energies
        energies = new_e
        vectors = new_v
        alpha = next_alpha
        if alpha in targets or any(abs(alpha - t) < 1e-9 for t in targets):
            out[alpha] = dict(energies)
        if step < step_deg:
            step = min(step * 2, step_deg)
    return out


def _match(vectors: dict[int, np.ndarray], pairs):
    """Greedy max-overlap assignment of tracked states to scan eigenpairs."""
    if not pairs:
        return False, None, None
    new_e = {}
    new_v = {}
    taken = set()
    for state, z in vectors.items():
        ov = np.array([abs(np.vdot(z, p.vector)) if i not in taken else -1.0
                       for i, p in enumerate(pairs)])
        j = int(np.argmax(ov))
        if ov[j] < 0.55:
            return False, None, None
        taken.add(j)
        new_e[state] = float(pairs[j].energy)
        new_v[state] = pairs[j].vector
    return True, new_e, new_v


def hydrogen_table_states(
    B: float,
    angles_deg=(0, 27, 54, 81),
    grid: tuple[int, int, float] = None,
    tol: float = 1e-10,
    seed: int = 11,
) -> dict[float, dict[int, float]]:
    """E1..E3 of 2D hydrogen at one field strength over the table angles."""
    def system(b_au, alpha):
        return hydrogen_2d(B=b_au, alpha=alpha)

    return track_states_alpha(system, B, list(float(a) for a in angles_deg),
                              grid=grid, tol=tol, seed=seed)
