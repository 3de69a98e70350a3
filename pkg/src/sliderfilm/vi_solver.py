"""Discrete film-pressure problem and its solvers.

The pressure at clearance beta and squeeze velocity gamma solves the
complementarity problem

    p >= 0,   A p - b >= 0,   p . (A p - b) = 0,

with A the five-point operator of -div((h0 + beta)^3 grad .) assembled
with edge-midpoint coefficients and b_i = -(dh0/dx1(x_i) + gamma) dx dy,
both with zero Dirichlet boundary.  A is a symmetric M-matrix, so the
problem has a unique solution and projected SOR converges.

The production solver sweeps nodes in lexicographic order.  It is
implemented as an anti-diagonal wavefront: for the five-point stencil
every west/south dependency of a node lies on the previous anti-diagonal
and every east/north dependency on the next, so updating whole
anti-diagonals in ascending order reproduces the lexicographic sweep
update-for-update while each diagonal is a vectorized slice.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NoConvergence, NonPositiveClearance
from .geometry import Grid, SliderShape, edge_midpoint_heights, lattice_grad_x1

__all__ = [
    "DiscreteSystem",
    "PressureField",
    "CompReport",
    "assemble_system",
    "solve_vi_psor",
    "solve_linear",
    "load_integral",
    "complementarity_report",
    "suggested_omega",
    "dump_debug_csv",
]


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    """Five-point operator and load vector on the interior nodes.

    cw/ce/cs/cn are the positive coupling magnitudes to the west, east,
    south and north neighbours (off-diagonal entries of A are their
    negatives); diag is their row sum.  All arrays have shape (ny, nx).
    """

    grid: Grid
    beta: float
    gamma: float
    diag: np.ndarray
    cw: np.ndarray
    ce: np.ndarray
    cs: np.ndarray
    cn: np.ndarray
    b: np.ndarray

    @property
    def n(self) -> int:
        return self.grid.n_interior

    def apply(self, p: np.ndarray) -> np.ndarray:
        """Matrix-vector product A p for p of shape (ny, nx)."""
        ny, nx = p.shape
        pad = np.zeros((ny + 2, nx + 2))
        pad[1:-1, 1:-1] = p
        return (
            self.diag * p
            - self.cw * pad[1:-1, :-2]
            - self.ce * pad[1:-1, 2:]
            - self.cs * pad[:-2, 1:-1]
            - self.cn * pad[2:, 1:-1]
        )

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense (A, b) with linear index j*nx + i; for small grids only."""
        nx, ny = self.grid.nx, self.grid.ny
        n = nx * ny
        A = np.zeros((n, n))
        for j in range(ny):
            for i in range(nx):
                k = j * nx + i
                A[k, k] = self.diag[j, i]
                if i > 0:
                    A[k, k - 1] = -self.cw[j, i]
                if i < nx - 1:
                    A[k, k + 1] = -self.ce[j, i]
                if j > 0:
                    A[k, k - nx] = -self.cs[j, i]
                if j < ny - 1:
                    A[k, k + nx] = -self.cn[j, i]
        return A, self.b.ravel().copy()


@dataclass(eq=False)
class PressureField:
    """Nodal solution with solver metadata.

    For complementarity solves, residual_comp = max |min(p, Ap - b)| and
    residual_lin = max violation of Ap >= b.  For plain linear solves,
    residual_lin holds the relative linear residual instead and values
    may be negative.
    """

    values: np.ndarray
    residual_comp: float
    residual_lin: float
    iterations: int


@dataclass(frozen=True)
class CompReport:
    residual: float
    n_active: int
    n_free: int


def assemble_system(
    grid: Grid, shape: SliderShape, beta: float, gamma: float
) -> DiscreteSystem:
    """Assemble the five-point system for clearance beta, squeeze gamma."""
    if beta <= 0.0:
        raise NonPositiveClearance(
            f"assembly requires beta > 0 (physical contact at beta <= 0), got {beta}"
        )
    h_v, h_h = edge_midpoint_heights(shape, grid)
    coef_v = (h_v + beta) ** 3 * (grid.dy / grid.dx)
    coef_h = (h_h + beta) ** 3 * (grid.dx / grid.dy)
    cw = coef_v[:, :-1].copy()
    ce = coef_v[:, 1:].copy()
    cs = coef_h[:-1, :].copy()
    cn = coef_h[1:, :].copy()
    diag = cw + ce + cs + cn
    grad = lattice_grad_x1(shape, grid)[1:-1, 1:-1]
    b = -(grad + gamma) * grid.cell_area
    return DiscreteSystem(
        grid=grid, beta=beta, gamma=gamma, diag=diag, cw=cw, ce=ce, cs=cs, cn=cn, b=b
    )


@lru_cache(maxsize=64)
def _diagonal_slices(nx: int, ny: int):
    """Anti-diagonal slice descriptors.

    For diagonal d (= i + j), returns (j_lo, count); node (i, j) on the
    diagonal sits at flat padded index (j+1)*(nx+2) + (i+1), stepping by
    nx+1 as j increases, and at flat interior index d + j*(nx-1).
    """
    out = []
    for d in range(nx + ny - 1):
        j_lo = max(0, d - nx + 1)
        j_hi = min(ny - 1, d)
        out.append((d, j_lo, j_hi - j_lo + 1))
    return tuple(out)


def _build_wavefront(system: DiscreteSystem, p_pad: np.ndarray):
    """Per-diagonal views into the padded iterate and system arrays."""
    nx, ny = system.grid.nx, system.grid.ny
    pflat = p_pad.ravel()
    wpad = nx + 2
    step_p = nx + 1
    step_c = nx - 1
    bf, cwf, cef, csf, cnf = (
        a.ravel() for a in (system.b, system.cw, system.ce, system.cs, system.cn)
    )
    dinvf = (1.0 / system.diag).ravel()
    diags = []
    for d, j_lo, count in _diagonal_slices(nx, ny):
        i_lo = d - j_lo
        sp = (j_lo + 1) * wpad + (i_lo + 1)
        sc = d + j_lo * step_c
        end_p = sp + (count - 1) * step_p + 1
        end_c = sc + (count - 1) * step_c + 1
        sl_p = slice(sp, end_p, step_p)
        sl_c = slice(sc, end_c, step_c)
        diags.append(
            (
                pflat[sl_p],
                pflat[slice(sp - 1, end_p - 1, step_p)],
                pflat[slice(sp + 1, end_p + 1, step_p)],
                pflat[slice(sp - wpad, end_p - wpad, step_p)],
                pflat[slice(sp + wpad, end_p + wpad, step_p)],
                bf[sl_c],
                cwf[sl_c],
                cef[sl_c],
                csf[sl_c],
                cnf[sl_c],
                dinvf[sl_c],
                np.empty(count),
                np.empty(count),
            )
        )
    return diags


def _lcp_residuals(system: DiscreteSystem, p: np.ndarray) -> tuple[float, float]:
    slack = system.apply(p) - system.b
    comp = float(np.max(np.abs(np.minimum(p, slack))))
    lin = float(max(0.0, -np.min(slack)))
    return comp, lin


def solve_vi_psor(
    system: DiscreteSystem,
    omega: float = 1.5,
    tol: float = 1e-8,
    max_iter: int | None = None,
    warm_start: PressureField | None = None,
) -> PressureField:
    """Projected SOR solve of the pressure complementarity problem.

    Parameters
    ----------
    system : DiscreteSystem
        Assembled operator and load vector.
    omega : float
        Relaxation factor in (0, 2).  The default 1.5 is conservative;
        suggested_omega(grid) is much faster on fine grids.
    tol : float
        Convergence threshold: the largest nodal update of a sweep must
        fall below tol * max(1, ||p||_inf) and the complementarity
        residual below 10 * tol.
    max_iter : int, optional
        Sweep cap; defaults to 50 * nx * ny.
    warm_start : PressureField, optional
        Initial iterate (projected onto p >= 0); the converged solution
        does not depend on it, only the sweep count does.

    Returns
    -------
    PressureField
        Nonnegative nodal pressure with residuals and the sweep count.

    Notes
    -----
    Sweep order is lexicographic by node index, realized as an
    anti-diagonal wavefront (see module docstring); results are
    deterministic for fixed inputs.  A nonpositive load vector returns
    the exact zero solution immediately.
    """
    if not (0.0 < omega < 2.0):
        raise ValueError(f"relaxation omega must lie in (0, 2), got {omega}")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    nx, ny = system.grid.nx, system.grid.ny
    if max_iter is None:
        max_iter = 50 * nx * ny

    if np.all(system.b <= 0.0):
        # exact cutoff: p = 0 solves the problem (slack -b >= 0)
        return PressureField(
            values=np.zeros((ny, nx)), residual_comp=0.0, residual_lin=0.0, iterations=0
        )

    p_pad = np.zeros((ny + 2, nx + 2))
    if warm_start is not None:
        p_pad[1:-1, 1:-1] = np.maximum(warm_start.values, 0.0)
    diags = _build_wavefront(system, p_pad)

    sweeps = 0
    while sweeps < max_iter:
        max_delta = 0.0
        for pd, wv, ev, sv, nv, bd, cw_d, ce_d, cs_d, cn_d, dinv, t1, t2 in diags:
            np.multiply(cw_d, wv, out=t1)
            t1 += bd
            np.multiply(ce_d, ev, out=t2)
            t1 += t2
            np.multiply(cs_d, sv, out=t2)
            t1 += t2
            np.multiply(cn_d, nv, out=t2)
            t1 += t2
            t1 *= dinv
            t1 -= pd
            t1 *= omega
            t1 += pd
            np.maximum(t1, 0.0, out=t1)
            np.subtract(t1, pd, out=t2)
            np.abs(t2, out=t2)
            md = t2.max()
            if md > max_delta:
                max_delta = float(md)
            pd[:] = t1
        sweeps += 1
        if max_delta <= tol * max(1.0, float(p_pad.max())):
            p = p_pad[1:-1, 1:-1].copy()
            comp, lin = _lcp_residuals(system, p)
            if comp <= 10.0 * tol:
                return PressureField(
                    values=p, residual_comp=comp, residual_lin=lin, iterations=sweeps
                )

    p = p_pad[1:-1, 1:-1].copy()
    comp, lin = _lcp_residuals(system, p)
    field = PressureField(values=p, residual_comp=comp, residual_lin=lin, iterations=sweeps)
    raise NoConvergence(
        f"PSOR did not converge in {sweeps} sweeps (delta tol {tol}, "
        f"complementarity residual {comp:.3e})",
        field=field,
        iterations=sweeps,
    )


def solve_linear(
    system: DiscreteSystem,
    rhs_override: np.ndarray | None = None,
    tol: float = 1e-10,
    max_iter: int | None = None,
    mask: np.ndarray | None = None,
) -> PressureField:
    """Unconstrained conjugate-gradient solve of A p = rhs.

    With a boolean mask, solves the restriction of A to the masked nodes
    with zero values elsewhere (zero Dirichlet data on the inner
    boundary); this is the operator of the auxiliary problems posed on a
    sub-region.  Values may be negative.  residual_lin reports the final
    relative residual.
    """
    rhs = system.b if rhs_override is None else rhs_override
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != system.b.shape:
        raise ValueError(f"rhs shape {rhs.shape} does not match grid {system.b.shape}")
    if mask is not None:
        rhs = np.where(mask, rhs, 0.0)
        n_unknown = int(np.count_nonzero(mask))
    else:
        n_unknown = system.n
    if max_iter is None:
        max_iter = 4 * n_unknown + 200

    bnorm = float(np.linalg.norm(rhs))
    zero = np.zeros_like(rhs)
    if bnorm == 0.0 or n_unknown == 0:
        return PressureField(values=zero, residual_comp=0.0, residual_lin=0.0, iterations=0)

    def op(v):
        av = system.apply(v)
        if mask is not None:
            av = np.where(mask, av, 0.0)
        return av

    p = zero.copy()
    r = rhs.copy()
    d = r.copy()
    rs = float(np.vdot(r, r))
    it = 0
    while np.sqrt(rs) > tol * bnorm:
        if it >= max_iter:
            field = PressureField(
                values=p,
                residual_comp=float("nan"),
                residual_lin=float(np.sqrt(rs) / bnorm),
                iterations=it,
            )
            raise NoConvergence(
                f"CG did not converge in {it} iterations "
                f"(relative residual {np.sqrt(rs) / bnorm:.3e})",
                field=field,
                iterations=it,
            )
        ad = op(d)
        alpha = rs / float(np.vdot(d, ad))
        p += alpha * d
        r -= alpha * ad
        rs_new = float(np.vdot(r, r))
        d = r + (rs_new / rs) * d
        rs = rs_new
        it += 1

    slack = op(p) - rhs
    comp = float(np.max(np.abs(np.minimum(p, slack)))) if n_unknown else 0.0
    return PressureField(
        values=p,
        residual_comp=comp,
        residual_lin=float(np.sqrt(rs) / bnorm),
        iterations=it,
    )


def load_integral(field: PressureField, grid: Grid) -> float:
    """Integral of the nodal field over the domain (boundary contributes 0)."""
    return float(np.sum(field.values)) * grid.cell_area


def complementarity_report(field: PressureField, system: DiscreteSystem) -> CompReport:
    """Residual and active/free node counts; the active set is the cavitation region."""
    comp, _ = _lcp_residuals(system, field.values)
    n_active = int(np.count_nonzero(field.values == 0.0))
    return CompReport(residual=comp, n_active=n_active, n_free=field.values.size - n_active)


def suggested_omega(grid: Grid) -> float:
    """Near-optimal SOR relaxation for the five-point operator at this resolution."""
    n = max(grid.nx, grid.ny)
    return 2.0 / (1.0 + np.sin(np.pi / (n + 1)))


def dump_debug_csv(field: PressureField, system: DiscreteSystem, path) -> None:
    """Write (x1, x2, p, slack, active) rows for all interior nodes."""
    grid = system.grid
    X1, X2 = grid.interior_mesh()
    slack = system.apply(field.values) - system.b
    active = (field.values == 0.0).astype(int)
    with open(path, "w", newline="") as f:
        f.write("x1,x2,p,slack,active\n")
        for j in range(grid.ny):
            for i in range(grid.nx):
                f.write(
                    f"{float(X1[j, i])!r},{float(X2[j, i])!r},{float(field.values[j, i])!r},"
                    f"{float(slack[j, i])!r},{int(active[j, i])}\n"
                )
