"""Shifted inverse iteration on the block-banded Hamiltonian.

Linear systems (H - sigma) x = b are solved by a block generalization of the
forward-elimination/back-substitution sweep: three radial nodes are grouped
into one super-block, which turns the bandwidth-3 block-banded matrix into a
block-tridiagonal one, and the classic sweep recurrence

    Stilde_0 = A_0,   Stilde_{i+1} = A_{i+1} - U_i^H Stilde_i^{-1} U_i

runs over the Hermitian super-block Schur complements.  The same recurrence
with LDL^H pivot factorizations yields the inertia (eigenvalue count below
the shift), which `spectrum_scan` uses to bisect an energy window into
chunks and to certify that every level in the window was found exactly once.

Numerically everything runs on the quadrature-form pencil (A, W) of the
Hamiltonian (H = W^{-1/2} A W^{-1/2}, W the diagonal radial weights): the
standard form has near-origin diagonal entries growing like N^4, and
operating on it directly would inject eps*||H|| rounding into eigenvalues,
while ||A|| stays O(N).  Results are reported in the standard-form
convention (unit 2-norm vectors).

Eigenpairs at a shift are extracted by inverse subspace iteration with
Rayleigh-Ritz projection; `shifted_inverse_iteration` is the single-vector
variant converging to the eigenvalue nearest the shift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, ldl, lu_factor, lu_solve, qr

from .hamiltonian import BlockBandedHamiltonian

#: resource guard for spectrum_scan
MAX_WINDOW_LEVELS = 10_000

#: relative energy tolerance for deduplicating repeated eigenvalues
DEDUP_RTOL = 1e-9


class NearSingularShift(RuntimeError):
    """Shift coincides with an eigenvalue; caller should perturb sigma."""


class WindowTooLarge(ValueError):
    """Requested window contains more levels than the resource guard allows."""


@dataclass
class Eigenpair:
    """Converged (or flagged) eigenpair of the discrete Hamiltonian.

    `vector` is the unit-2-norm solver vector of length N*(2M+1) in the
    standard-form convention; `channels` maps it to psi_j(rho_k) =
    sqrt(rho_k) Psi(rho_k, phi_j), normalized to unit wave-function norm
    under the grid quadrature.  `residual_norm` is the dimensionless pencil
    residual ||A psi - E W psi|| / (||A psi|| + |E| ||W psi||).
    """

    energy: float
    vector: np.ndarray = field(repr=False)
    residual_norm: float = 0.0
    converged: bool = True
    iterations: int = 0
    shift: float = 0.0

    def channels(self, h: BlockBandedHamiltonian) -> np.ndarray:
        S = h.block_size
        v = self.vector.reshape(h.N, S)
        scale = np.sqrt(S / (2.0 * np.pi)) / np.sqrt(h.weights)
        return (v * scale[:, None]).T * np.sqrt(h.radial.nodes)[None, :]


@dataclass
class Spectrum:
    """Sorted eigenvalues in a window with multiplicity and provenance."""

    energies: np.ndarray                 # deduplicated, ascending
    multiplicities: np.ndarray           # int, same length
    pairs: list = field(repr=False, default_factory=list)  # one Eigenpair per vector
    window: tuple = (0.0, 0.0)
    shifts: list = field(default_factory=list)
    dedup_tol: float = DEDUP_RTOL
    expected_count: int = 0
    complete: bool = True

    @property
    def count(self) -> int:
        return int(self.multiplicities.sum())


class BlockSweepFactorization:
    """LU sweep factorization of (H - sigma I) over node-triple super-blocks.

    Internally factors the pencil matrix (A - sigma W); `solve` accepts and
    returns standard-form vectors, `solve_form` works on Psi-shaped vectors.
    """

    def __init__(self, h: BlockBandedHamiltonian, sigma: float, pivot_rtol: float = 1e-14):
        self.h = h
        self.sigma = sigma
        self.nsup = (h.N + 2) // 3
        self._sqrtw = np.sqrt(h.weights)
        self._off = [h.form_off(d) for d in (1, 2, 3)]
        self._lu = []
        prev = None
        for i in range(self.nsup):
            a = self._super_diag(i)
            if prev is not None:
                u = self._coupling(i - 1)
                a = a - u.conj().T @ lu_solve(prev, u)
                a = 0.5 * (a + a.conj().T)
            if not np.all(np.isfinite(a)):
                raise NearSingularShift(f"sweep lost finiteness at shift {sigma}")
            lu, piv = lu_factor(a, check_finite=False)
            d = np.abs(np.diag(lu))
            if d.min() <= pivot_rtol * max(d.max(), 1.0):
                raise NearSingularShift(
                    f"shift {sigma} is within pivot tolerance of an eigenvalue"
                )
            prev = (lu, piv)
            self._lu.append(prev)

    # -- structure helpers ---------------------------------------------------

    def _nodes_of(self, i: int) -> range:
        lo = 3 * i
        return range(lo, min(lo + 3, self.h.N))

    def _coupling_scalars(self, i: int):
        """(r, c, value) entries of U_i; each is value * I_S at block (r, c)."""
        out = []
        rows = list(self._nodes_of(i))
        cols = list(self._nodes_of(i + 1))
        for r, k in enumerate(rows):
            for c, kc in enumerate(cols):
                d = kc - k
                if 1 <= d <= 3:
                    out.append((r, c, self._off[d - 1][k]))
        return out

    def _super_diag(self, i: int) -> np.ndarray:
        """Dense super-block of (A - sigma W) over node group i."""
        h, S = self.h, self.h.block_size
        nodes = list(self._nodes_of(i))
        n = len(nodes)
        blk = np.zeros((n * S, n * S), dtype=complex)
        idx = np.arange(S)
        w = h.weights
        for r, k in enumerate(nodes):
            db = h.form_diag_block(k)
            db[idx, idx] -= self.sigma * w[k]
            blk[r * S:(r + 1) * S, r * S:(r + 1) * S] = db
            for c in range(r + 1, n):
                cc = self._off[c - r - 1][k]
                blk[r * S + idx, c * S + idx] = cc
                blk[c * S + idx, r * S + idx] = cc
        return blk

    def _coupling(self, i: int) -> np.ndarray:
        """Dense coupling block U_i (rows super i, cols super i+1)."""
        S = self.h.block_size
        nr = len(self._nodes_of(i)) * S
        nc = len(self._nodes_of(i + 1)) * S
        u = np.zeros((nr, nc), dtype=complex)
        idx = np.arange(S)
        for r, c, val in self._coupling_scalars(i):
            u[r * S + idx, c * S + idx] = val
        return u

    def _apply_coupling(self, i: int, x: np.ndarray, adjoint: bool = False) -> np.ndarray:
        """U_i @ x (or U_i^H @ x) using the scalar-diagonal block structure."""
        S = self.h.block_size
        nr = len(self._nodes_of(i)) * S
        nc = len(self._nodes_of(i + 1)) * S
        if adjoint:
            y = np.zeros((nc,) + x.shape[1:], dtype=complex)
            for r, c, val in self._coupling_scalars(i):
                y[c * S:(c + 1) * S] += val * x[r * S:(r + 1) * S]
        else:
            y = np.zeros((nr,) + x.shape[1:], dtype=complex)
            for r, c, val in self._coupling_scalars(i):
                y[r * S:(r + 1) * S] += val * x[c * S:(c + 1) * S]
        return y

    # -- solves --------------------------------------------------------------

    def solve_form(self, rhs: np.ndarray) -> np.ndarray:
        """x with (A - sigma W) x = rhs; rhs shape (dim,) or (dim, nrhs)."""
        one = rhs.ndim == 1
        b = rhs.reshape(self.h.dim, -1)
        S = self.h.block_size
        segs = []
        pos = 0
        for i in range(self.nsup):
            n = len(self._nodes_of(i)) * S
            segs.append(b[pos:pos + n].astype(complex))
            pos += n
        for i in range(1, self.nsup):
            segs[i] = segs[i] - self._apply_coupling(
                i - 1, lu_solve(self._lu[i - 1], segs[i - 1]), adjoint=True
            )
        x = [None] * self.nsup
        x[-1] = lu_solve(self._lu[-1], segs[-1])
        for i in range(self.nsup - 2, -1, -1):
            x[i] = lu_solve(self._lu[i], segs[i] - self._apply_coupling(i, x[i + 1]))
        out = np.vstack(x)
        return out[:, 0] if one else out

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """x with (H - sigma I) x = rhs in the standard-form convention."""
        sw = np.repeat(self._sqrtw, self.h.block_size)
        b = np.asarray(rhs, dtype=complex)
        shaped = sw if b.ndim == 1 else sw[:, None]
        return shaped * self.solve_form(shaped * b)


def count_levels_below(h: BlockBandedHamiltonian, sigma: float, _retry: int = 0) -> int:
    """Number of eigenvalues of H below sigma (Sylvester inertia).

    Hermitian sweep recurrence on (A - sigma W); the negative-eigenvalue
    counts of the LDL^H pivot blocks of the Schur complements add up to the
    inertia.  Factors are discarded on the fly, so memory stays at one
    super-block.
    """
    helper = BlockSweepFactorization.__new__(BlockSweepFactorization)
    helper.h = h
    helper.sigma = sigma
    helper.nsup = (h.N + 2) // 3
    helper._off = [h.form_off(d) for d in (1, 2, 3)]
    try:
        count = 0
        prev_lu = None
        prev = None
        for i in range(helper.nsup):
            a = helper._super_diag(i)
            if prev is not None:
                u = helper._coupling(i - 1)
                a = a - u.conj().T @ lu_solve(prev_lu, u)
                a = 0.5 * (a + a.conj().T)
            if not np.all(np.isfinite(a)):
                raise np.linalg.LinAlgError("non-finite Schur complement")
            count += _negative_inertia(a)
            prev = a
            prev_lu = lu_factor(a, check_finite=False)
        return count
    except np.linalg.LinAlgError:
        if _retry >= 3:
            raise
        bump = 1e-9 * max(1.0, abs(sigma)) * 10.0 ** _retry
        return count_levels_below(h, sigma + bump, _retry + 1)


def _negative_inertia(a: np.ndarray) -> int:
    """Negative eigenvalue count of a Hermitian matrix via LDL^H pivots."""
    np.fill_diagonal(a, a.diagonal().real)  # rounding-level imaginary parts
    _, d, _ = ldl(a, lower=True, hermitian=True)
    n = d.shape[0]
    count = 0
    i = 0
    while i < n:
        if i + 1 < n and abs(d[i, i + 1]) > 0:
            tr = (d[i, i] + d[i + 1, i + 1]).real
            det = (d[i, i] * d[i + 1, i + 1] - d[i, i + 1] * d[i + 1, i]).real
            if det < 0:
                count += 1       # one negative, one positive
            elif tr < 0:
                count += 2
            i += 2
        else:
            if d[i, i].real < 0:
                count += 1
            i += 1
    return count


def _factor_with_retry(h: BlockBandedHamiltonian, sigma: float, tries: int = 4):
    bump = 0.0
    for attempt in range(tries):
        try:
            return BlockSweepFactorization(h, sigma + bump)
        except NearSingularShift:
            bump = (10.0 ** attempt) * 1e-8 * max(1.0, abs(sigma))
    raise NearSingularShift(f"could not factor near sigma={sigma}")


def _pencil_rq_residual(h: BlockBandedHamiltonian, psi_flat: np.ndarray):
    """Rayleigh quotient, dimensionless residual and rounding floor of a vector."""
    psi = psi_flat.reshape(h.N, h.block_size)
    apsi = h.form_matvec(psi).reshape(-1)
    wpsi = (h.weights[:, None] * psi).reshape(-1)
    denom = float(np.real(np.vdot(psi_flat, wpsi)))
    theta = float(np.real(np.vdot(psi_flat, apsi))) / denom
    r = apsi - theta * wpsi
    scale = max(np.linalg.norm(apsi) + abs(theta) * np.linalg.norm(wpsi), 1e-300)
    floor_abs = np.finfo(float).eps * np.linalg.norm(
        h.form_matvec_abs(np.abs(psi)).reshape(-1)
        + abs(theta) * (h.weights[:, None] * np.abs(psi)).reshape(-1)
    )
    return theta, float(np.linalg.norm(r) / scale), float(floor_abs / scale)


def shifted_inverse_iteration(
    h: BlockBandedHamiltonian,
    sigma: float,
    tol: float = 1e-10,
    max_iter: int = 200,
    seed: int = 7,
    v0: np.ndarray | None = None,
    deflate: np.ndarray | None = None,
    factorization: BlockSweepFactorization | None = None,
) -> Eigenpair:
    """Eigenpair nearest the shift sigma by single-vector inverse iteration.

    Converges when the relative eigenvalue change drops below `tol` and the
    dimensionless residual below max(10*tol, rounding floor).  With
    `deflate`, the iterate is kept W-orthogonal to the given standard-form
    column vectors, which separates degenerate or clustered levels at a
    common shift.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    fac = factorization or _factor_with_retry(h, sigma)
    rng = np.random.default_rng(seed)
    sw = np.repeat(np.sqrt(h.weights), h.block_size)
    # work on z = W^{1/2} psi, which is the standard-form vector
    z = v0 if v0 is not None else rng.standard_normal(h.dim) + 1j * rng.standard_normal(h.dim)
    z = np.asarray(z, dtype=complex)
    if deflate is not None and deflate.size:
        z = z - deflate @ (deflate.conj().T @ z)
    z = z / np.linalg.norm(z)
    e_prev = np.inf
    energy = np.nan
    res = np.inf
    for it in range(1, max_iter + 1):
        # one pencil inverse-iteration step: psi <- (A - sigma W)^{-1} W psi
        # in z variables: z <- sqrtw * solve_form(sqrtw * z)
        znew = sw * fac.solve_form(sw * z)
        if deflate is not None and deflate.size:
            znew = znew - deflate @ (deflate.conj().T @ znew)
        nrm = np.linalg.norm(znew)
        if not np.isfinite(nrm) or nrm == 0:
            raise NearSingularShift(f"inverse iteration blew up at shift {fac.sigma}")
        z = znew / nrm
        energy, res, floor = _pencil_rq_residual(h, z / sw)
        if abs(energy - e_prev) < tol * max(1.0, abs(energy)) and res < max(10.0 * tol, 30.0 * floor):
            return Eigenpair(energy=energy, vector=z, residual_norm=res,
                             converged=True, iterations=it, shift=fac.sigma)
        e_prev = energy
    return Eigenpair(energy=energy, vector=z, residual_norm=res,
                     converged=False, iterations=max_iter, shift=fac.sigma)


def _subspace_extract(
    h: BlockBandedHamiltonian,
    sigma: float,
    count: int,
    window: tuple[float, float],
    tol: float,
    rng: np.random.Generator,
    max_iter: int = 36,
    pad: int = 4,
) -> list[Eigenpair]:
    """Inverse subspace iteration with Rayleigh-Ritz projection at one shift.

    Runs on the pencil (A, W); the subspace is W-orthonormalized by QR of
    the standard-form representation z = W^{1/2} psi.  Aims at the `count`
    window eigenvalues; returns all converged Ritz pairs (the caller filters
    and re-certifies counts against the inertia).
    """
    fac = _factor_with_retry(h, sigma)
    S = h.block_size
    sw = np.repeat(np.sqrt(h.weights), S)
    m = min(count + pad, h.dim)

    def _randcols(n):
        return rng.standard_normal((h.dim, n)) + 1j * rng.standard_normal((h.dim, n))

    z = _randcols(m)
    z, _ = qr(z, mode="economic", check_finite=False)
    thresh = max(10.0 * tol, 256.0 * np.finfo(float).eps)
    locked: list[Eigenpair] = []
    locked_z: np.ndarray | None = None
    theta = np.zeros(m)
    resid = np.full(m, np.inf)
    refactors = 0
    last_progress = 0
    it = 0
    for it in range(1, max_iter + 1):
        # keep the active width large enough for the remaining targets
        want_width = min(max(count - len(locked) + pad, pad), h.dim - len(locked))
        if z.shape[1] < want_width:
            z = np.hstack([z, _randcols(want_width - z.shape[1])])
        if locked_z is not None:
            z = z - locked_z @ (locked_z.conj().T @ z)
        z, _ = qr(z, mode="economic", check_finite=False)
        z = sw[:, None] * fac.solve_form(sw[:, None] * z)
        if locked_z is not None:
            z = z - locked_z @ (locked_z.conj().T @ z)
        z, _ = qr(z, mode="economic", check_finite=False)
        ma = z.shape[1]
        psi = (z / sw[:, None]).T.reshape(ma, h.N, S)
        apsi = h.form_matvec(psi).reshape(ma, h.dim).T
        # W-orthonormal basis (z orthonormal): projected mass is the identity
        hm = (z / sw[:, None]).conj().T @ apsi
        hm = 0.5 * (hm + hm.conj().T)
        theta, u = eigh(hm)
        z = z @ u
        apsi = apsi @ u
        wpsi = sw[:, None] * z
        rmat = apsi - wpsi * theta[None, :]
        scale = np.maximum(
            np.linalg.norm(apsi, axis=0) + np.abs(theta) * np.linalg.norm(wpsi, axis=0),
            1e-300,
        )
        resid = np.linalg.norm(rmat, axis=0) / scale
        inside = (theta >= window[0]) & (theta <= window[1])
        # candidate = in-window Ritz pair within reach of its rounding floor;
        # each candidate is polished by single-vector steps and then locked,
        # leaving the active subspace so later shift moves cannot evict it
        floors = np.finfo(float).eps * np.linalg.norm(
            h.form_matvec_abs(np.abs(psi)).reshape(ma, h.dim).T
            + np.abs(wpsi) * np.abs(theta)[None, :],
            axis=0,
        ) / scale
        candidate = inside & (resid < np.maximum(1e3 * floors, thresh))
        lock_now = []
        if it >= 2 and candidate.any():
            for idx in np.flatnonzero(candidate):
                zc = z[:, idx]
                theta_c, res_c, floor_c = theta[idx], resid[idx], floors[idx]
                for _ in range(2):
                    if res_c < max(10.0 * tol, 30.0 * floor_c):
                        break
                    zc = sw * fac.solve_form(sw * zc)
                    if locked_z is not None:
                        zc = zc - locked_z @ (locked_z.conj().T @ zc)
                    zc = zc / np.linalg.norm(zc)
                    theta_c, res_c, floor_c = _pencil_rq_residual(h, zc / sw)
                # polish may rotate inside quasi-degenerate clusters; accept
                # any window level (deflation forbids drifting onto a locked one)
                if (res_c < max(10.0 * tol, 30.0 * floor_c)
                        and window[0] <= theta_c <= window[1]
                        and abs(theta_c - theta[idx]) < 1e-2 * max(1.0, abs(theta_c))):
                    locked.append(
                        Eigenpair(energy=float(theta_c), vector=zc.copy(),
                                  residual_norm=float(res_c), converged=True,
                                  iterations=it, shift=fac.sigma)
                    )
                    lock_now.append(idx)
                    cols = [locked_z] if locked_z is not None else []
                    cols.append(zc[:, None])
                    locked_z, _ = qr(np.hstack(cols), mode="economic", check_finite=False)
        if lock_now:
            last_progress = it
            keep = np.setdiff1d(np.arange(ma), np.array(lock_now))
            z = z[:, keep]
            theta = theta[keep]
            resid = resid[keep]
            inside = inside[keep]
            if len(locked) >= count:
                break
        # sweep the shift bottom-up through the window: retarget the lowest
        # level not yet locked once the current neighborhood stops paying off
        if len(locked) < count and refactors < count + 6:
            stalled = (it - last_progress) >= 4
            if it == 3 or stalled:
                pending = inside
                if pending.any():
                    new_sigma = float(theta[pending].min())
                    new_sigma = min(max(new_sigma, window[0]), window[1])
                    if abs(new_sigma - fac.sigma) > 1e-9 * max(1.0, abs(new_sigma)):
                        fac = _factor_with_retry(h, new_sigma)
                        refactors += 1
                        last_progress = it
    pairs = list(locked)
    for idx in range(z.shape[1]):
        pairs.append(
            Eigenpair(energy=float(theta[idx]), vector=z[:, idx],
                      residual_norm=float(resid[idx]),
                      converged=bool(resid[idx] < thresh), iterations=it, shift=sigma)
        )
    return pairs


def spectrum_scan(
    h: BlockBandedHamiltonian,
    window: tuple[float, float],
    target_count: int | None = None,
    tol: float = 1e-10,
    seed: int = 7,
    chunk: int = 10,
    keep_vectors: bool = True,
) -> Spectrum:
    """All eigenvalues of H in [E_lo, E_hi], each found exactly once.

    Inertia counts certify completeness: the window is bisected until each
    subwindow holds at most `chunk` levels, every subwindow is solved by
    subspace inverse iteration at its midpoint shift, duplicates across
    subwindows are removed by vector overlap, and the merged result is
    checked against the total count.  Energies closer than
    DEDUP_RTOL*max(1,|E|) are merged with a multiplicity annotation.
    """
    e_lo, e_hi = window
    if not e_lo < e_hi:
        raise ValueError(f"window must satisfy E_lo < E_hi, got {window}")
    n_lo = count_levels_below(h, e_lo)
    n_hi = count_levels_below(h, e_hi)
    total = n_hi - n_lo
    if total > MAX_WINDOW_LEVELS:
        raise WindowTooLarge(f"window contains {total} levels (> {MAX_WINDOW_LEVELS})")
    if target_count is not None and total > target_count:
        lo, hi = e_lo, e_hi
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if count_levels_below(h, mid) - n_lo >= target_count:
                hi = mid
            else:
                lo = mid
        e_hi = hi
        n_hi = count_levels_below(h, e_hi)
        total = n_hi - n_lo
    if total == 0:
        return Spectrum(energies=np.array([]), multiplicities=np.array([], dtype=int),
                        window=(e_lo, e_hi), expected_count=0, complete=True)

    rng = np.random.default_rng(seed)
    tasks: list[tuple[float, float, int]] = []

    def _split(a: float, b: float, na: int, nb: int):
        cnt = nb - na
        if cnt == 0:
            return
        if cnt <= chunk or (b - a) < 1e-12 * max(1.0, abs(a) + abs(b)):
            tasks.append((a, b, cnt))
            return
        midpoint = 0.5 * (a + b)
        nm = count_levels_below(h, midpoint)
        _split(a, midpoint, na, nm)
        _split(midpoint, b, nm, nb)

    _split(e_lo, e_hi, n_lo, n_hi)

    found: list[Eigenpair] = []
    shifts = []
    for (a, b, cnt) in tasks:
        sigma = 0.5 * (a + b)
        shifts.append(sigma)
        pairs = _subspace_extract(h, sigma, cnt, (a, b), tol, rng)
        edge = 10.0 * DEDUP_RTOL * max(1.0, abs(a), abs(b))
        found.extend(p for p in pairs
                     if p.converged and a - edge <= p.energy <= b + edge)

    found = _dedup_pairs(found)
    if sum(1 for _ in found) != total:
        rescued = _rescue_missing(h, (e_lo, e_hi), n_lo, n_hi, found, tol, rng)
        shifts.extend(p.shift for p in rescued)
        found = _dedup_pairs(found + rescued)
    energies, mult, _ = _group_energies(found)
    complete = int(mult.sum()) == total
    return Spectrum(
        energies=energies,
        multiplicities=mult,
        pairs=found if keep_vectors else [],
        window=(e_lo, e_hi),
        shifts=shifts,
        expected_count=total,
        complete=complete,
    )


def _rescue_missing(
    h: BlockBandedHamiltonian,
    window: tuple[float, float],
    n_lo: int,
    n_hi: int,
    found: list[Eigenpair],
    tol: float,
    rng: np.random.Generator,
) -> list[Eigenpair]:
    """Locate and extract levels the subspace pass missed.

    Inertia bisection against the list of already-found energies walks down
    to narrow brackets that still miss levels; each bracket is solved by
    deflated single-vector inverse iteration at its midpoint.  Handles the
    slowly-converging quasi-degenerate clusters that defeat plain subspace
    iteration.
    """
    rescued: list[Eigenpair] = []

    def have_in(a: float, b: float) -> int:
        # right-open to match the strictly-below inertia convention
        n = sum(1 for p in found if a <= p.energy < b)
        return n + sum(1 for p in rescued if a <= p.energy < b)

    def extract(a: float, b: float, k: int):
        sigma = 0.5 * (a + b)
        span = max(b - a, 1e-12 * max(1.0, abs(sigma)))
        radius = max(50.0 * span, 1e-2 * max(1.0, abs(sigma)))
        deflate_cols = [p.vector for p in found + rescued
                        if abs(p.energy - sigma) < radius]
        for _ in range(k):
            dz = np.column_stack(deflate_cols) if deflate_cols else None
            if dz is not None:
                dz, _ = qr(dz, mode="economic", check_finite=False)
            try:
                pair = shifted_inverse_iteration(
                    h, sigma, tol=tol, max_iter=40,
                    seed=int(rng.integers(2**31)), deflate=dz,
                )
                if not pair.converged and np.isfinite(pair.energy):
                    # deflation against an imperfect quasi-degenerate partner
                    # floors the residual; a shift right on the settled energy
                    # suppresses the partner without deflation
                    pair = shifted_inverse_iteration(
                        h, pair.energy, tol=tol, max_iter=12,
                        v0=pair.vector,
                    )
            except NearSingularShift:
                sigma += 0.3 * span
                continue
            if pair.converged and a - 2.0 * span <= pair.energy <= b + 2.0 * span:
                rescued.append(pair)
                deflate_cols.append(pair.vector)
            else:
                break

    def recurse(a: float, b: float, na: int, nb: int, depth: int):
        missing = (nb - na) - have_in(a, b)
        if missing <= 0:
            return
        scale = max(1.0, abs(a), abs(b))
        # stop once the bracket holds only missing levels and is narrow
        # enough for deflated inverse iteration at its midpoint
        pure = missing == (nb - na)
        if (pure and b - a < 1e-4 * scale) or b - a < 1e-8 * scale or depth >= 48:
            extract(a, b, missing)
            return
        mid = 0.5 * (a + b)
        nm = count_levels_below(h, mid)
        recurse(a, mid, na, nm, depth + 1)
        recurse(mid, b, nm, nb, depth + 1)

    recurse(window[0], window[1], n_lo, n_hi, 0)
    return rescued


def _dedup_pairs(pairs: list[Eigenpair]) -> list[Eigenpair]:
    """Drop re-finds of one state (close energy and parallel vectors)."""
    pairs = sorted(pairs, key=lambda p: (p.energy, p.residual_norm))
    kept: list[Eigenpair] = []
    for p in pairs:
        dup = False
        for q in reversed(kept):
            if abs(p.energy - q.energy) > 1e-7 * max(1.0, abs(p.energy)):
                break
            if abs(np.vdot(p.vector, q.vector)) > 0.5:
                dup = True
                break
        if not dup:
            kept.append(p)
    return kept


def _group_energies(pairs: list[Eigenpair]):
    energies: list[float] = []
    mult: list[int] = []
    groups: list[list[Eigenpair]] = []
    for p in pairs:
        if energies and abs(p.energy - energies[-1]) < DEDUP_RTOL * max(1.0, abs(p.energy)):
            mult[-1] += 1
            groups[-1].append(p)
        else:
            energies.append(p.energy)
            mult.append(1)
            groups.append([p])
    return np.array(energies), np.array(mult, dtype=int), groups


def block_sweep_solve(h: BlockBandedHamiltonian, sigma: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (H - sigma I) x = rhs by the super-block sweep factorization."""
    fac = BlockSweepFactorization(h, sigma)
    return fac.solve(np.asarray(rhs, dtype=complex))
