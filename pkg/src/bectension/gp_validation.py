"""Desk-scale sharp-interface validation against the full pair energy.

Pipeline: solve the single-component ground state eta at healing length eps
(projected gradient flow with renormalization), minimize eps times the
weighted pair energy under the two mass constraints, and compare with the
limit value sigma(beta) * rho(t0)^(3/2) at the interface location t0 fixed
by the limit constraint.  The gap must shrink as eps decreases.

Everything is one-dimensional with the harmonic trap V(x) = x^2, so the
Thomas-Fermi cloud is (-lam, lam) with lam = (3/4)^(1/3) and the limit
energy is a single closed-form number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from . import analytic, solver, tf_geometry
from .grid import Grid1D, ProfilePair

TF_LAMBDA = tf_geometry.tf_lambda(1)


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    return eps


def default_eta_grid(eps: float) -> Grid1D:
    """Domain [-M, M] with M = lam + 2 and spacing eps/10 (layers resolved)."""
    eps = _check_eps(eps)
    return Grid1D.from_spacing(TF_LAMBDA + 2.0, eps / 10.0)


@dataclass
class GroundState:
    """Positive normalized minimizer of the single-component energy."""

    eps: float
    grid: Grid1D
    values: np.ndarray
    energy: float
    iterations: int

    def norm(self) -> float:
        w = self.grid.trapezoid_weights()
        return math.sqrt(self.grid.spacing * float(w @ (self.values**2)))


def _gp_energy(u, x, eps, h, w) -> float:
    du = np.diff(u)
    pot = x * x
    return 0.5 * (
        du @ du / h
        + h / eps**2 * np.sum(w * pot * u * u)
        + h / (2.0 * eps**2) * np.sum(w * u**4)
    )


def _gp_gradient(u, x, eps, h, w):
    du = np.diff(u)
    g = np.zeros_like(u)
    g[:-1] -= du / h
    g[1:] += du / h
    g += h / eps**2 * w * (x * x) * u
    g += h / eps**2 * w * u**3
    return g


def solve_ground_state(
    eps: float,
    grid: Grid1D | None = None,
    tol: float = 1e-9,
    max_iter: int = 100_000,
) -> GroundState:
    """Minimize the single-component energy on the unit sphere of L2.

    Projected gradient flow: descend, clip negative values, renormalize, and
    accept only energy decreases.  Converged when the max-norm of the
    sphere-tangent gradient falls below ``tol``.  Boundary values are pinned
    at zero; interior values of the result are strictly positive.
    """
    eps = _check_eps(eps)
    grid = grid or default_eta_grid(eps)
    x = grid.nodes
    h = grid.spacing
    w = grid.trapezoid_weights()

    u = np.sqrt(np.maximum(TF_LAMBDA**2 - x * x, 0.0)) + 0.05
    u[0] = u[-1] = 0.0

    def normalize(a):
        a = np.clip(a, 0.0, None)
        a[0] = a[-1] = 0.0
        nrm = math.sqrt(h * float(w @ (a * a)))
        return a / nrm

    def tangent(g, a):
        gc = 2.0 * h * w * a  # gradient of the discrete norm constraint
        gt = g - (g @ gc) / (gc @ gc) * gc
        gt[0] = gt[-1] = 0.0
        return gt

    u = normalize(u)
    energy = _gp_energy(u, x, eps, h, w)
    g = _gp_gradient(u, x, eps, h, w)
    gt = tangent(g, u)
    tau = h * eps**2
    it = 0
    flow_tol = max(tol, 1e-5)  # the Newton polish below takes over from here
    while it < max_iter:
        if np.abs(gt).max() <= flow_tol:
            break
        it += 1
        step = tau
        while True:
            cand = normalize(u - step * gt)
            e_new = _gp_energy(cand, x, eps, h, w)
            if e_new <= energy - 1e-4 * step * float(gt @ gt) or step < 1e-20:
                break
            step *= 0.5
        if e_new > energy:  # retraction noise floor reached; Newton takes over
            break
        g_new = _gp_gradient(cand, x, eps, h, w)
        gt_new = tangent(g_new, cand)
        s = cand - u
        y = gt_new - gt
        sy = s @ y
        tau = min(max((s @ s) / sy, 1e-14), 1e3) if sy > 0 else step * 2.0
        u, energy, gt = cand, e_new, gt_new

    # Bordered Newton polish on the stationarity system g = mu * grad(c),
    # c = 0: tridiagonal Hessian plus one constraint row, eliminated by
    # Sherman-Morrison on the banded factorization.  Quadratic convergence
    # carries the flow iterate down to the requested tolerance.
    n = grid.n_points
    for _ in range(60):
        g = _gp_gradient(u, x, eps, h, w)
        gc = 2.0 * h * w * u
        mu = float(g @ gc) / float(gc @ gc)
        gt = tangent(g, u)
        it += 1
        if np.abs(gt).max() <= tol:
            break
        c = h * float(w @ (u * u)) - 1.0
        diag = np.full(n, 2.0 / h) + h / eps**2 * w * (x * x + 3.0 * u * u) - mu * 2.0 * h * w
        off = np.full(n - 1, -1.0 / h)
        r1 = -(g - mu * gc)
        col = gc.copy()
        diag[0] = diag[-1] = 1.0
        off[0] = off[-1] = 0.0
        r1[0] = r1[-1] = 0.0
        col[0] = col[-1] = 0.0
        ab = np.zeros((3, n))
        ab[0, 1:] = off
        ab[1] = diag
        ab[2, :-1] = off
        z1 = solve_banded((1, 1), ab, r1)
        z2 = solve_banded((1, 1), ab, col)
        denom = float(gc @ z2)
        dmu = (-c - float(gc @ z1)) / denom if denom != 0.0 else 0.0
        du = z1 + dmu * z2
        u = normalize(u + du)
    else:
        raise solver.ConvergenceError(
            f"ground state stalled at tangent gradient {np.abs(gt).max():.3e}",
            None,
        )
    # The true state is strictly positive but decays below double precision
    # well before the boundary; floor the underflowed tail at a harmless
    # positive level so the positivity invariant stays checkable.
    floor = 1e-30 * u.max()
    u[1:-1] = np.maximum(u[1:-1], floor)
    u = normalize(u)
    u[1:-1] = np.maximum(u[1:-1], floor)
    energy = _gp_energy(u, x, eps, h, w)
    if not np.all(u[1:-1] > 0.0):
        raise RuntimeError("ground state lost interior positivity")
    return GroundState(eps=eps, grid=grid, values=u, energy=energy, iterations=it)


# ---------------------------------------------------------------------------
# weighted pair energy
# ---------------------------------------------------------------------------

def weighted_pair_energy(v, phi, eps: float, beta: float, eta: GroundState) -> solver.EnergyBreakdown:
    """Pair energy with ground-state weights:

      (1/2) int  eta^2 v'^2 + eta^4 (1-v^2)^2/(2 eps^2)
                 + eta^2 v^2 phi'^2 / 4 + beta eta^4 v^4 sin^2(phi)/(4 eps^2).

    Derivative terms carry squared cell midpoints of the weight fields, which
    matches the exact discrete product rule used by the decomposition check.
    """
    eps = _check_eps(eps)
    v = np.asarray(v, dtype=float)
    phi = np.asarray(phi, dtype=float)
    e = eta.values
    if v.shape != e.shape or phi.shape != e.shape:
        raise ValueError("fields must live on the ground-state grid")
    h = eta.grid.spacing
    w = eta.grid.trapezoid_weights()
    eta_mid = 0.5 * (e[:-1] + e[1:])
    etav_mid = 0.5 * (e[:-1] * v[:-1] + e[1:] * v[1:])
    dv = np.diff(v)
    dphi = np.diff(phi)
    e4 = e**4
    kinetic_v = 0.5 * np.sum(eta_mid**2 * dv * dv) / h
    double_well = h / (4.0 * eps**2) * np.sum(w * e4 * (1.0 - v * v) ** 2)
    kinetic_phi = 0.125 * np.sum(etav_mid**2 * dphi * dphi) / h
    coupling = beta * h / (8.0 * eps**2) * np.sum(w * e4 * v**4 * np.sin(phi) ** 2)
    return solver.EnergyBreakdown(kinetic_v, double_well, kinetic_phi, coupling)


def _pair_gradient(v, phi, eps, beta, eta: GroundState):
    e = eta.values
    h = eta.grid.spacing
    w = eta.grid.trapezoid_weights()
    eta_mid2 = (0.5 * (e[:-1] + e[1:])) ** 2
    ev = e * v
    ev_mid = 0.5 * (ev[:-1] + ev[1:])
    dv = np.diff(v)
    dphi = np.diff(phi)
    e4 = e**4
    sin_phi = np.sin(phi)
    cos_phi = np.cos(phi)

    gv = np.zeros_like(v)
    flux_v = eta_mid2 * dv / h
    gv[:-1] -= flux_v
    gv[1:] += flux_v
    gv -= h / eps**2 * w * e4 * (1.0 - v * v) * v
    # d/dv_i of sum (ev_mid)^2 dphi^2 / (8h): ev_mid couples two cells
    a = ev_mid * dphi * dphi / (8.0 * h)
    gv[:-1] += a * e[:-1]
    gv[1:] += a * e[1:]
    gv += beta * h / (2.0 * eps**2) * w * e4 * v**3 * sin_phi**2

    gphi = np.zeros_like(phi)
    flux_p = ev_mid**2 * dphi / (4.0 * h)
    gphi[:-1] -= flux_p
    gphi[1:] += flux_p
    gphi += beta * h / (4.0 * eps**2) * w * e4 * v**4 * sin_phi * cos_phi
    return gv, gphi


def decomposition_residual(v, phi, eps: float, beta: float, eta: GroundState) -> float:
    """Defect of the ground-state energy splitting.

    |E(u1, u2) - F(v, phi) - E(eta)| with u1 = eta v cos(phi/2) and
    u2 = eta v sin(phi/2), all three energies on the same grid and scheme.
    The continuum identity needs eta stationary and the total mass
    constraint; pairs should satisfy sum w eta^2 v^2 h = 1 for the residual
    to vanish under refinement.
    """
    eps = _check_eps(eps)
    v = np.asarray(v, dtype=float)
    phi = np.asarray(phi, dtype=float)
    e = eta.values
    x = eta.grid.nodes
    h = eta.grid.spacing
    w = eta.grid.trapezoid_weights()
    u1 = e * v * np.cos(0.5 * phi)
    u2 = e * v * np.sin(0.5 * phi)
    e1 = _gp_energy(u1, x, eps, h, w)
    e2 = _gp_energy(u2, x, eps, h, w)
    cross = (1.0 + beta) / (2.0 * eps**2) * h * np.sum(w * u1 * u1 * u2 * u2)
    f = weighted_pair_energy(v, phi, eps, beta, eta).total
    return abs(e1 + e2 + cross - f - eta.energy)


# ---------------------------------------------------------------------------
# constrained minimization of eps * F
# ---------------------------------------------------------------------------

@dataclass
class GammaRow:
    eps: float
    beta: float
    scaled_energy: float
    limit_energy: float
    gap: float
    mass_res_1: float
    mass_res_2: float
    v: np.ndarray = field(repr=False, default=None)
    phi: np.ndarray = field(repr=False, default=None)
    eta: GroundState = field(repr=False, default=None)


def interface_location(alpha1: float) -> float:
    """Jump point t0 of the limit constraint: mass alpha1 sits left of t0."""
    if not 0.0 < alpha1 < 1.0:
        raise ValueError("alpha1 must lie strictly between 0 and 1")
    if alpha1 == 0.5:
        return 0.0
    return tf_geometry._halfline_cut(alpha1, tf_geometry.tf_model(1))


def _mass_terms(v, phi, eta: GroundState):
    h = eta.grid.spacing
    w = eta.grid.trapezoid_weights()
    m = h * w * eta.values**2 * v * v
    return float(np.sum(m)), float(np.sum(m * np.cos(phi)))


def minimize_weighted_pair(
    eps: float,
    beta: float,
    alpha1: float = 0.5,
    sigma: float | None = None,
    eta: GroundState | None = None,
    start: tuple[np.ndarray, np.ndarray] | None = None,
    stages: int = 4,
    mu0: float = 10.0,
    multiplier_updates: int = 3,
    inner_tol: float = 1e-6,
    max_inner: int = 6000,
) -> GammaRow:
    """Minimize eps * F under both mass constraints; report the limit gap.

    Constraints are enforced by an augmented penalty tightened over
    continuation: the quadratic weight grows tenfold per stage while the
    linear multipliers absorb the constraint forces, so the final mass
    residuals drop below 1e-6 without an ill-conditioned penalty.
    """
    eps = _check_eps(eps)
    if beta <= 0:
        raise ValueError("beta must be positive")
    alpha2 = 1.0 - alpha1
    if eta is None:
        eta = solve_ground_state(eps)
    if sigma is None:
        sigma = solver.solve(beta).sigma
    grid = eta.grid
    x = grid.nodes
    h = grid.spacing
    w = grid.trapezoid_weights()
    e2 = eta.values**2

    t0 = interface_location(alpha1)
    rho0 = max(TF_LAMBDA**2 - t0 * t0, 0.0)
    limit_energy = sigma * rho0**1.5

    if start is None:
        m_bar, _ = analytic.minimize_plateau_objective(beta)
        T = analytic.optimal_plateau_halfwidth(m_bar, beta)
        arg = math.sqrt(rho0) * (x - t0) / eps
        v = np.where(np.abs(arg) <= T, m_bar,
                     np.tanh(np.maximum(np.abs(arg) - T, 0.0) / math.sqrt(2.0)
                             + math.atanh(min(m_bar, 1.0 - 1e-15))))
        phi = np.clip(0.5 * math.pi * (arg / max(T, 1e-12) + 1.0), 0.0, math.pi)
    else:
        v, phi = start[0].copy(), start[1].copy()
    mass = h * float(np.sum(w * e2 * v * v))
    v = v / math.sqrt(mass)

    target2 = alpha1 - alpha2
    lam1 = lam2 = 0.0
    mu = mu0
    v_hi = 1.5

    # Outside the cloud plus a margin every energy weight has decayed below
    # double-precision relevance; freezing the fields there removes a large
    # block of indifferent directions that would otherwise stall the descent.
    frozen = np.abs(x) > TF_LAMBDA + 0.35
    frozen[0] = frozen[-1] = True

    def objective_and_grad(v, phi):
        fv, fphi = _pair_gradient(v, phi, eps, beta, eta)
        f = weighted_pair_energy(v, phi, eps, beta, eta).total
        c1, c2 = _mass_terms(v, phi, eta)
        c1 -= 1.0
        c2 -= target2
        val = eps * f + lam1 * c1 + lam2 * c2 + 0.5 * mu * (c1 * c1 + c2 * c2)
        q1 = lam1 + mu * c1
        q2 = lam2 + mu * c2
        cos_phi = np.cos(phi)
        gv = eps * fv + 2.0 * h * w * e2 * v * (q1 + q2 * cos_phi)
        gphi = eps * fphi - h * w * e2 * v * v * np.sin(phi) * q2
        gv[frozen] = 0.0
        gphi[frozen] = 0.0
        return val, gv, gphi, c1, c2

    def pg_norm(v, phi, gv, gphi):
        pgv = np.where(v <= 0.0, np.minimum(gv, 0.0),
                       np.where(v >= v_hi, np.maximum(gv, 0.0), gv))
        pgp = np.where(phi <= 0.0, np.minimum(gphi, 0.0),
                       np.where(phi >= np.pi, np.maximum(gphi, 0.0), gphi))
        return max(np.abs(pgv).max(), np.abs(pgp).max())

    def descent_steps(v, phi, tol, max_it):
        val, gv, gphi, c1, c2 = objective_and_grad(v, phi)
        tau = h * eps
        it = 0
        while it < max_it and pg_norm(v, phi, gv, gphi) > tol:
            it += 1
            step = tau
            while True:
                v_new = np.clip(v - step * gv, 0.0, v_hi)
                phi_new = np.clip(phi - step * gphi, 0.0, np.pi)
                val_new, gv_new, gphi_new, c1, c2 = objective_and_grad(v_new, phi_new)
                dec = gv @ (v - v_new) + gphi @ (phi - phi_new)
                if val_new <= val - 1e-4 * dec or step < 1e-20:
                    break
                step *= 0.5
            if val_new > val:  # stalled at machine precision
                break
            sv, sp = v_new - v, phi_new - phi
            yv, yp = gv_new - gv, gphi_new - gphi
            sy = sv @ yv + sp @ yp
            tau = min(max((sv @ sv + sp @ sp) / sy, 1e-14), 1e3) if sy > 0 else step * 2.0
            v, phi, val, gv, gphi = v_new, phi_new, val_new, gv_new, gphi_new
        return v, phi

    def newton_block(v, phi, which, tol, max_steps):
        """Projected damped Newton on one field of the augmented objective.

        The banded part carries the pair-energy curvature; the penalty adds
        mu * grad(c) grad(c)^T, folded in by a Woodbury correction.
        """
        n = grid.n_points
        lo, hi = (0.0, v_hi) if which == "v" else (0.0, np.pi)
        val, gv, gphi, c1, c2 = objective_and_grad(v, phi)
        for _ in range(max_steps):
            g = gv if which == "v" else gphi
            x = v if which == "v" else phi
            pg = np.where(x <= lo, np.minimum(g, 0.0),
                          np.where(x >= hi, np.maximum(g, 0.0), g))
            if np.abs(pg).max() <= tol:
                break
            ev = eta.values * v
            ev_mid = 0.5 * (ev[:-1] + ev[1:])
            dphi = np.diff(phi)
            e4 = eta.values**4
            q1 = lam1 + mu * c1
            q2 = lam2 + mu * c2
            cos_phi = np.cos(phi)
            sin_phi = np.sin(phi)
            if which == "v":
                eta_mid2 = (0.5 * (eta.values[:-1] + eta.values[1:])) ** 2
                kin_diag = np.zeros(n)
                kin_diag[:-1] += eta_mid2 / h
                kin_diag[1:] += eta_mid2 / h
                off = -eta_mid2 / h
                # angle-kinetic curvature in v: per-cell squared linear form
                a = eta.values**2 / (16.0 * h)
                kin_diag[:-1] += a[:-1] * dphi * dphi
                kin_diag[1:] += a[1:] * dphi * dphi
                off = off + (eta.values[:-1] * eta.values[1:]) * dphi * dphi / (16.0 * h)
                kin_diag *= eps
                off = off * eps
                pot = eps * (
                    h / eps**2 * w * e4 * (3.0 * v * v - 1.0)
                    + 1.5 * beta * h / eps**2 * w * e4 * v * v * sin_phi**2
                )
                pot += 2.0 * h * w * e2 * (q1 + q2 * cos_phi)
                ucols = [
                    math.sqrt(mu) * 2.0 * h * w * e2 * v,
                    math.sqrt(mu) * 2.0 * h * w * e2 * v * cos_phi,
                ]
            else:
                a = ev_mid**2 / (4.0 * h)
                kin_diag = np.zeros(n)
                kin_diag[:-1] += a
                kin_diag[1:] += a
                off = -a
                kin_diag *= eps
                off = off * eps
                pot = eps * (beta * h / (4.0 * eps**2) * w * e4 * v**4 * np.cos(2.0 * phi))
                pot -= q2 * h * w * e2 * v * v * cos_phi
                ucols = [-math.sqrt(mu) * h * w * e2 * v * v * sin_phi]
            shift = max(0.0, -pot[~frozen].min()) if np.any(~frozen) else 0.0
            diag = kin_diag + pot + shift
            off = off.copy()
            rhs = -g.copy()
            diag[frozen] = 1.0
            rhs[frozen] = 0.0
            off[frozen[:-1]] = 0.0
            off[frozen[1:]] = 0.0
            U = np.column_stack(ucols)
            U[frozen] = 0.0
            ab = np.zeros((3, n))
            ab[0, 1:] = off
            ab[1] = diag
            ab[2, :-1] = off
            Z = solve_banded((1, 1), ab, np.column_stack([rhs, U]))
            z0, ZU = Z[:, 0], Z[:, 1:]
            S = np.eye(U.shape[1]) + U.T @ ZU
            d = z0 - ZU @ np.linalg.solve(S, U.T @ z0)
            slope = g @ d
            if not np.isfinite(slope) or slope >= 0.0:
                d = -pg
                slope = g @ d
            alpha = 1.0
            while True:
                x_new = np.clip(x + alpha * d, lo, hi)
                x_new[frozen] = x[frozen]
                if which == "v":
                    val_new, gv_new, gphi_new, c1n, c2n = objective_and_grad(x_new, phi)
                else:
                    val_new, gv_new, gphi_new, c1n, c2n = objective_and_grad(v, x_new)
                if val_new <= val + 1e-4 * alpha * slope or alpha < 1e-16:
                    break
                alpha *= 0.5
            if val_new > val:
                break
            if which == "v":
                v = x_new
            else:
                phi = x_new
            val, gv, gphi, c1, c2 = val_new, gv_new, gphi_new, c1n, c2n
        return v, phi, c1, c2

    def inner_minimize(v, phi, tol, max_it):
        v, phi = descent_steps(v, phi, max(tol, 1e-3), min(max_it, 300))
        c1 = c2 = None
        for _ in range(40):
            v, phi, c1, c2 = newton_block(v, phi, "phi", 0.5 * tol, 20)
            v, phi, c1, c2 = newton_block(v, phi, "v", 0.5 * tol, 20)
            _, gv, gphi, c1, c2 = objective_and_grad(v, phi)
            if pg_norm(v, phi, gv, gphi) <= tol:
                break
        return v, phi, c1, c2

    for stage in range(stages):
        tol_stage = max(inner_tol, 1e-4 * 10.0 ** (-stage))
        for _ in range(multiplier_updates):
            v, phi, c1, c2 = inner_minimize(v, phi, tol_stage, max_inner)
            lam1 += mu * c1
            lam2 += mu * c2
        mu *= 10.0

    scaled = eps * weighted_pair_energy(v, phi, eps, beta, eta).total
    c1, c2 = _mass_terms(v, phi, eta)
    return GammaRow(
        eps=eps,
        beta=beta,
        scaled_energy=scaled,
        limit_energy=limit_energy,
        gap=scaled - limit_energy,
        mass_res_1=abs(c1 - 1.0),
        mass_res_2=abs(c2 - target2),
        v=v,
        phi=phi,
        eta=eta,
    )


def gamma_table(
    eps_list,
    beta: float,
    alpha1: float = 0.5,
    sigma: float | None = None,
    **kwargs,
) -> list[GammaRow]:
    """One constrained solve per eps, warm-started from the previous row.

    ``eps_list`` must be decreasing with every entry at most 0.1.
    """
    eps_list = [float(e) for e in eps_list]
    if any(e > 0.1 for e in eps_list):
        raise ValueError("eps values above 0.1 are outside the validated regime")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    if sigma is None:
        sigma = solver.solve(beta).sigma
    rows: list[GammaRow] = []
    prev: GammaRow | None = None
    for eps in eps_list:
        eta = solve_ground_state(eps)
        start = None
        if prev is not None:
            x_new = eta.grid.nodes
            x_old = prev.eta.grid.nodes
            start = (
                np.interp(x_new, x_old, prev.v),
                np.interp(x_new, x_old, prev.phi),
            )
        row = minimize_weighted_pair(
            eps, beta, alpha1=alpha1, sigma=sigma, eta=eta, start=start, **kwargs
        )
        rows.append(row)
        prev = row
    return rows


def gamma_csv_rows(rows) -> list[dict]:
    return [
        {
            "eps": r.eps,
            "beta": r.beta,
            "scaled_energy": r.scaled_energy,
            "limit_energy": r.limit_energy,
            "gap": r.gap,
            "mass_res_1": r.mass_res_1,
            "mass_res_2": r.mass_res_2,
        }
        for r in rows
    ]
