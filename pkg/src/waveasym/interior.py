"""Interior (t > r) homogeneous solutions and their lightcone expansions.

The degree -1 and degree -2 homogeneous solutions generated by sphere
functions N and M are

    psi1[N](t, r w) = (1/4pi) int N(s) dS / (t - r <s, w>)
    psi2[M](t, r w) = -(1/4pi) int M(s) dS / (t - r <s, w>)^2
    psi3[M](t, r w) = 2 Mbar / ((t + r)(t - r))

Reducing the sphere integrals to circle averages gives, with s = t/r,

    r  psi1 = sum_lm N_lm Q_l(s) Y_lm(w)
    r^2 psi2 = sum_lm M_lm Q_l'(s) Y_lm(w)

where Q_l is the Legendre function of the second kind; this is exact
for band-limited inputs and is how both are evaluated here.  Near the
lightcone both expand in y = (t - r)/r with log terms:

    r  psi1 = N01 ln(2/y) + N0 - y N11 ln(2/y) - y N1 + O(y^2 ln y)
    r^2 psi2 = -M0/y + M11 ln(2/y) + M1 - y M21 ln(2/y) - y M2 + ...

The closed forms implemented in :func:`expansion1_closed_form` and
:func:`expansion2_closed_form` are cross-validated against direct
least-squares fits of the evaluated solutions (:func:`expansion1_fit`,
:func:`expansion2_fit`).

Note on the degree -2 constant coefficient: expanding the exact kernel
integrals gives

    M1 = M/4 + (Delta M)/2 + M1*,

with M1* the doubly regularized integral below.  (The check against
the numeric fit is part of the acceptance suite; see also the l = 1
closed-form case M = Y_1m, where M1 = -Y_1m/4.)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FitFailureError
from .sphere.field import SphereField
from .sphere.grid import legendre_all

_EPS_LC = 1e-6  # below this y, kernel evaluation switches to the expansion

# ----------------------------------------------------------------------
# spacetime points
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SpacetimePoint:
    """A point (t, r omega) with unit direction omega."""

    t: float
    r: float
    omega: np.ndarray

    def __post_init__(self):
        if self.r < 0:
            raise DomainError(f"r must be >= 0, got {self.r}")
        nrm = float(np.linalg.norm(self.omega))
        if abs(nrm - 1.0) > 1e-14:
            raise DomainError(f"|omega| must be 1 within 1e-14, got {nrm}")

    @property
    def q(self) -> float:
        return self.r - self.t

    @property
    def s(self) -> float:
        return self.t / self.r


def point(t, r, omega) -> SpacetimePoint:
    omega = np.asarray(omega, dtype=float)
    return SpacetimePoint(float(t), float(r), omega / np.linalg.norm(omega))


# ----------------------------------------------------------------------
# Legendre functions of the second kind on (1, infinity)
# ----------------------------------------------------------------------


def _legendre_p_derivs(L, s):
    """P_l, P_l', P_l'' at s (arrays over s)."""
    s = np.asarray(s, dtype=float)
    p = legendre_all(L, s)
    dp = np.zeros_like(p)
    d2p = np.zeros_like(p)
    if L >= 1:
        dp[1] = 1.0
    for l in range(1, L):
        dp[l + 1] = dp[l - 1] + (2 * l + 1) * p[l]
        d2p[l + 1] = d2p[l - 1] + (2 * l + 1) * dp[l]
    return p, dp, d2p


def _legendre_q_small(L, y):
    """Q_l(1+y) and derivatives via the explicit P_l ln + polynomial form.

    Q_l(s) = (1/2) P_l(s) ln((s+1)/(s-1)) - W_{l-1}(s),
    W_{l-1} = sum_{k=1}^{l} P_{k-1}(s) P_{l-k}(s) / k.

    Stable for small y where the P_l stay O(1); the log is computed
    from y directly so there is no cancellation at the lightcone.
    """
    y = np.asarray(y, dtype=float)
    s = 1.0 + y
    p, dp, d2p = _legendre_p_derivs(L, s)
    ln = np.log((2.0 + y) / y)
    s2m1 = y * (2.0 + y)

    w = np.zeros_like(p)
    dw = np.zeros_like(p)
    d2w = np.zeros_like(p)
    for l in range(1, L + 1):
        acc = np.zeros_like(s)
        dacc = np.zeros_like(s)
        d2acc = np.zeros_like(s)
        for k in range(1, l + 1):
            acc += p[k - 1] * p[l - k] / k
            dacc += (dp[k - 1] * p[l - k] + p[k - 1] * dp[l - k]) / k
            d2acc += (d2p[k - 1] * p[l - k] + 2 * dp[k - 1] * dp[l - k] + p[k - 1] * d2p[l - k]) / k
        w[l], dw[l], d2w[l] = acc, dacc, d2acc

    q = 0.5 * p * ln - w
    q1 = 0.5 * dp * ln - p / s2m1 - dw
    q2 = 0.5 * d2p * ln - 2.0 * dp / s2m1 + 2.0 * s * p / s2m1**2 - d2w
    return q, q1, q2


def _legendre_q_miller(L, y):
    """Q_l(1+y) by downward (Miller) recurrence, for y not small.

    Q_l is the minimal solution of the three-term recurrence as l
    grows, so downward recursion normalized by Q_0 is stable.
    """
    s = 1.0 + y
    xi = np.arccosh(s)
    extra = int(np.ceil(44.0 / max(xi, 1e-3))) + 8
    top = L + extra
    qq = np.zeros(top + 2)
    qq[top + 1] = 0.0
    qq[top] = 1.0
    for l in range(top, 0, -1):
        qq[l - 1] = ((2 * l + 1) * s * qq[l] - (l + 1) * qq[l + 1]) / l
        if abs(qq[l - 1]) > 1e280:  # rescale to avoid overflow
            qq[: top + 2] /= 1e280
    q0 = 0.5 * np.log((2.0 + y) / y)
    q = qq[: L + 1] * (q0 / qq[0])

    s2m1 = y * (2.0 + y)
    q1 = np.zeros(L + 1)
    q2 = np.zeros(L + 1)
    q1[0] = -1.0 / s2m1
    for l in range(1, L + 1):
        q1[l] = l * (s * q[l] - q[l - 1]) / s2m1
    for l in range(L + 1):
        # Legendre ODE: (1 - s^2) Q'' - 2 s Q' + l(l+1) Q = 0
        q2[l] = (l * (l + 1) * q[l] - 2.0 * s * q1[l]) / s2m1
    return q, q1, q2


_Q_SWITCH_Y = 0.01  # P-formula below, Miller above


def legendre_q_all(L: int, y):
    """Q_l, Q_l', Q_l'' at s = 1 + y for l = 0..L; y may be an array.

    Returns three arrays of shape (L+1, len(y)).
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y <= 0):
        raise DomainError("legendre_q_all requires s = 1 + y > 1")
    q = np.zeros((L + 1, y.shape[0]))
    q1 = np.zeros_like(q)
    q2 = np.zeros_like(q)
    small = y < _Q_SWITCH_Y
    if np.any(small):
        qs, q1s, q2s = _legendre_q_small(L, y[small])
        q[:, small], q1[:, small], q2[:, small] = qs, q1s, q2s
    for j in np.nonzero(~small)[0]:
        q[:, j], q1[:, j], q2[:, j] = _legendre_q_miller(L, y[j])
    return q, q1, q2


# ----------------------------------------------------------------------
# kernel evaluation of psi1 / psi2 / psi3
# ----------------------------------------------------------------------


def _check_interior(p: SpacetimePoint, eps_lc: float):
    if p.t <= p.r:
        raise DomainError(f"interior evaluation needs t > r, got t={p.t}, r={p.r}")
    if p.t - p.r < eps_lc * p.r:
        return True  # too close to the cone for the kernel; use expansion
    return False


def rpsi1_profile(N: SphereField, y) -> np.ndarray:
    """r * psi1[N] at s = 1 + y for every grid direction; shape (ndir, ny)."""
    q, _, _ = legendre_q_all(N.grid.band_limit, y)
    return N.grid.synthesis @ (N.coeffs[:, None] * q[N.grid.ls])


def r2psi2_profile(M: SphereField, y) -> np.ndarray:
    """r^2 * psi2[M] at s = 1 + y for every grid direction."""
    _, q1, _ = legendre_q_all(M.grid.band_limit, y)
    return M.grid.synthesis @ (M.coeffs[:, None] * q1[M.grid.ls])


def _synth_at(field: SphereField, omega):
    return field.evaluate(np.asarray(omega, dtype=float)[None, :])[0]


def _expansion1_value(exp1, y, omega=None):
    ln = np.log(2.0 / y)
    c = [exp1.N01, exp1.N0, exp1.N11, exp1.N1]
    if omega is not None:
        c = [_synth_at(f, omega) for f in c]
    else:
        c = [f.values for f in c]
    return c[0] * ln + c[1] - y * c[2] * ln - y * c[3]


def _expansion2_value(exp2, y, omega=None):
    ln = np.log(2.0 / y)
    c = [exp2.M0, exp2.M11, exp2.M1, exp2.M21, exp2.M2]
    if omega is not None:
        c = [_synth_at(f, omega) for f in c]
    else:
        c = [f.values for f in c]
    return -c[0] / y + c[1] * ln + c[2] - y * c[3] * ln - y * c[4]


def psi1(N: SphereField, p: SpacetimePoint, eps_lc: float = _EPS_LC) -> float:
    """Degree -1 interior homogeneous solution at an interior point.

    Within ``eps_lc * r`` of the lightcone the kernel quadrature loses
    accuracy and the lightcone expansion is used instead.
    """
    use_expansion = _check_interior(p, eps_lc)
    y = (p.t - p.r) / p.r
    if use_expansion:
        val = _expansion1_value(expansion1_closed_form(N), y, omega=p.omega)
        return float(val / p.r)
    q, _, _ = legendre_q_all(N.grid.band_limit, np.array([y]))
    coeffs = N.coeffs * q[N.grid.ls, 0]
    return float(_synth_at(SphereField(N.grid, coeffs=coeffs), p.omega) / p.r)


def psi2(M: SphereField, p: SpacetimePoint, eps_lc: float = _EPS_LC) -> float:
    """Degree -2 interior homogeneous solution at an interior point."""
    use_expansion = _check_interior(p, eps_lc)
    y = (p.t - p.r) / p.r
    if use_expansion:
        val = _expansion2_value(expansion2_closed_form(M), y, omega=p.omega)
        return float(val / p.r**2)
    _, q1, _ = legendre_q_all(M.grid.band_limit, np.array([y]))
    coeffs = M.coeffs * q1[M.grid.ls, 0]
    return float(_synth_at(SphereField(M.grid, coeffs=coeffs), p.omega) / p.r**2)


def psi3(M: SphereField, p: SpacetimePoint) -> float:
    """Spherically symmetric cubic-source interior limit 2 Mbar / ((t+r)(t-r))."""
    if p.t <= p.r:
        raise DomainError(f"psi3 needs t > r, got t={p.t}, r={p.r}")
    return 2.0 * M.mean() / ((p.t + p.r) * (p.t - p.r))


def psi1_dt(N: SphereField, p: SpacetimePoint) -> float:
    """Exact time derivative of psi1; equals psi2 with the same density."""
    return psi2(N, p)


def psi1_dr(N: SphereField, p: SpacetimePoint) -> float:
    """Exact radial derivative of psi1[N]."""
    _check_interior(p, _EPS_LC)
    return -psi1(N, p) / p.r - (p.t / p.r) * psi2(N, p)


def psi2_dt(M: SphereField, p: SpacetimePoint) -> float:
    """Exact time derivative of psi2[M] via Q_l''."""
    _check_interior(p, _EPS_LC)
    y = (p.t - p.r) / p.r
    _, _, q2 = legendre_q_all(M.grid.band_limit, np.array([y]))
    coeffs = M.coeffs * q2[M.grid.ls, 0]
    return float(_synth_at(SphereField(M.grid, coeffs=coeffs), p.omega) / p.r**3)


def psi2_dr(M: SphereField, p: SpacetimePoint) -> float:
    return -2.0 * psi2(M, p) / p.r - (p.t / p.r) * psi2_dt(M, p)


# ----------------------------------------------------------------------
# closed-form expansion coefficients
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class InteriorExpansion1:
    """Lightcone expansion coefficients of the degree -1 solution."""

    N01: SphereField
    N0: SphereField
    N11: SphereField
    N1: SphereField

    def consistency_residuals(self) -> dict:
        """Residuals of the coefficient relations (should vanish)."""
        r1 = (2.0 * self.N11 - self.N01.laplacian()).sup_norm()
        r2 = (
            2.0 * self.N1
            - (2.0 * self.N01.laplacian() + self.N0.laplacian() - self.N01)
        ).sup_norm()
        return {"log_slope_relation": r1, "constant_slope_relation": r2}


@dataclass(frozen=True)
class InteriorExpansion2:
    """Lightcone expansion coefficients of the degree -2 solution.

    M21 and M2 are computable from the others but play no role in the
    second-order matching; they are carried with ``matched=False``.
    """

    M0: SphereField
    M11: SphereField
    M1: SphereField
    M1star: SphereField
    M21: SphereField
    M2: SphereField
    matched_orders: tuple = ("M0", "M11", "M1")

    def consistency_residuals(self) -> dict:
        # Substituting the expansion into the coefficient ODE
        # d^2/ds^2 ((s^2-1) F) + Delta F = 0 order by order gives, at the
        # y^0 level, -3 M11 + 2 M1 + 6 M21 - 4 M2 + Delta M1 = 0, hence
        # the 3/4 coefficient below (the l = 1 case M = Y_1m has
        # M2 = -3 Y_1m / 8, which pins it).
        r1 = (self.M11 + 0.5 * self.M0.laplacian()).sup_norm()
        r2 = (self.M21 - 0.25 * self.M11.laplacian() - 0.5 * self.M11).sup_norm()
        r3 = (
            self.M2
            - (0.5 * self.M1 + 0.25 * self.M1.laplacian() - 0.75 * self.M11 + 1.5 * self.M21)
        ).sup_norm()
        return {"M11_relation": r1, "M21_relation": r2, "M2_relation": r3}


def _harmonic_numbers(L):
    h = np.zeros(L + 1)
    for l in range(1, L + 1):
        h[l] = h[l - 1] + 1.0 / l
    return h


def regularized_n0_multipliers(L: int) -> np.ndarray:
    """nu_l = (1/2) int (P_l(z) - 1)/(1 - z) dz  (equals -H_l)."""
    n = max(64, L + 4)
    z, w = np.polynomial.legendre.leggauss(n)
    pl = legendre_all(L, z)
    return 0.5 * ((pl - 1.0) / (1.0 - z)) @ w


def m1star_multipliers(L: int) -> np.ndarray:
    """mu_l = -(1/2) int (P_l - 1 + l(l+1)(1-z^2)/4) / (1-z)^2 dz.

    The quadratic Taylor subtraction cancels the double pole; the
    integrand is a polynomial, so Gauss-Legendre is exact.
    """
    n = max(64, L + 4)
    z, w = np.polynomial.legendre.leggauss(n)
    pl = legendre_all(L, z)
    out = np.zeros(L + 1)
    for l in range(L + 1):
        lam = l * (l + 1.0)
        num = pl[l] - 1.0 + 0.25 * lam * (1.0 - z * z)
        out[l] = -0.5 * (num / (1.0 - z) ** 2) @ w
    return out


def _apply_multiplier(f: SphereField, mult_per_l) -> SphereField:
    return SphereField(f.grid, coeffs=f.coeffs * np.asarray(mult_per_l)[f.grid.ls])


def regularized_interior_n0(N: SphereField) -> SphereField:
    """(1/4pi) int (N(sigma) - N(omega)) / (1 - <sigma, omega>) dS."""
    return _apply_multiplier(N, regularized_n0_multipliers(N.grid.band_limit))


def expansion1_closed_form(N: SphereField) -> InteriorExpansion1:
    """All four expansion coefficients of psi1[N] from N alone."""
    n01 = 0.5 * N
    n0 = regularized_interior_n0(N)
    n11 = 0.5 * n01.laplacian()
    n1 = 0.5 * (2.0 * n01.laplacian() + n0.laplacian() - n01)
    return InteriorExpansion1(N01=n01, N0=n0, N11=n11, N1=n1)


def expansion2_closed_form(M: SphereField) -> InteriorExpansion2:
    """All expansion coefficients of psi2[M] from M alone."""
    m0 = 0.5 * M
    lap = M.laplacian()
    m11 = -0.25 * lap
    m1star = _apply_multiplier(M, m1star_multipliers(M.grid.band_limit))
    m1 = 0.25 * M + 0.5 * lap + m1star
    m21 = 0.25 * m11.laplacian() + 0.5 * m11
    m2 = 0.5 * m1 + 0.25 * m1.laplacian() - 0.75 * m11 + 1.5 * m21
    return InteriorExpansion2(M0=m0, M11=m11, M1=m1, M1star=m1star, M21=m21, M2=m2)


# ----------------------------------------------------------------------
# numeric lightcone fits (the independent route)
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ExpansionFit:
    """Least-squares expansion coefficients with fit diagnostics.

    Tolerances quoted on fits are engineering choices (the expansion
    remainder has no explicit constant); the window is configurable.
    """

    coefficients: dict
    residual: float
    condition_number: float
    window: tuple


def _fit_profile(values, y, pole, names, extra_orders):
    """Least squares onto {1/y?} + {y^k ln(2/y), y^k}, k = 0..1+extra.

    The k >= 2 columns absorb the expansion remainder so it cannot leak
    into the reported coefficients; they are fitted and discarded.
    """
    ln = np.log(2.0 / y)
    cols = ([-1.0 / y] if pole else []) + [ln, np.ones_like(y), -y * ln, -y]
    for k in range(2, 2 + extra_orders):
        cols += [y**k * ln, y**k]
    b = np.column_stack(cols)
    scale = np.linalg.norm(b, axis=0)
    bs = b / scale
    cond = np.linalg.cond(bs)
    if cond > 1e10:
        raise FitFailureError(
            f"expansion fit design matrix has condition number {cond:.2e}; "
            "widen the fit window"
        )
    sol, res, *_ = np.linalg.lstsq(bs, values.T, rcond=None)
    sol = sol / scale[:, None]
    vscale = max(np.max(np.abs(values)), 1e-300)
    resid = float(np.sqrt(np.max(res)) / vscale) if res.size else 0.0
    return {n: sol[i] for i, n in enumerate(names)}, resid, cond


def expansion1_fit(
    N: SphereField,
    window=(1e-4, 1e-2),
    n_samples: int = 28,
    extra_orders: int = 3,
) -> ExpansionFit:
    """Fit r psi1 against {ln(2/y), 1, -y ln(2/y), -y} on all directions."""
    if n_samples < 12:
        raise FitFailureError("need at least 12 sample points")
    y = np.geomspace(window[0], window[1], n_samples)
    vals = rpsi1_profile(N, y)
    coeffs, resid, cond = _fit_profile(
        vals, y, False, ["N01", "N0", "N11", "N1"], extra_orders
    )
    fields = {k: SphereField(N.grid, values=v) for k, v in coeffs.items()}
    return ExpansionFit(fields, resid, cond, window)


def expansion2_fit(
    M: SphereField,
    window=(1e-4, 1e-2),
    n_samples: int = 28,
    extra_orders: int = 3,
) -> ExpansionFit:
    """Fit r^2 psi2 against {-1/y, ln(2/y), 1, -y ln(2/y), -y}."""
    if n_samples < 12:
        raise FitFailureError("need at least 12 sample points")
    y = np.geomspace(window[0], window[1], n_samples)
    vals = r2psi2_profile(M, y)
    coeffs, resid, cond = _fit_profile(
        vals, y, True, ["M0", "M11", "M1", "M21", "M2"], extra_orders
    )
    fields = {k: SphereField(M.grid, values=v) for k, v in coeffs.items()}
    return ExpansionFit(fields, resid, cond, window)


# ----------------------------------------------------------------------
# finite-difference wave operator
# ----------------------------------------------------------------------


def box_residual(field_eval, p: SpacetimePoint, h: float) -> float:
    """Second-order centered finite-difference wave operator.

    ``field_eval(t, r, omega) -> float``; the angular Laplacian is taken
    along two orthogonal great circles through omega.  Convention:
    box = -d_t^2 + (1/r) d_r^2 (r .) + Delta_omega / r^2.
    """
    t, r, om = p.t, p.r, p.omega
    if p.t - p.r < 4.0 * h:
        raise DomainError("finite-difference stencil would cross the lightcone")

    def f(tt, rr, oo):
        return field_eval(tt, rr, oo)

    ftt = (f(t + h, r, om) - 2.0 * f(t, r, om) + f(t - h, r, om)) / h**2
    rf = lambda rr: rr * f(t, rr, om)
    frr = (rf(r + h) - 2.0 * rf(r) + rf(r - h)) / h**2

    from .sphere.circles import orthonormal_frame

    e1, e2 = orthonormal_frame(om)
    ha = h / max(r, 1.0)  # angular step comparable to metric step
    lap = 0.0
    f0 = f(t, r, om)
    for e in (e1, e2):
        op = np.cos(ha) * om + np.sin(ha) * e
        omi = np.cos(ha) * om - np.sin(ha) * e
        lap += (f(t, r, op) - 2.0 * f0 + f(t, r, omi)) / ha**2
    return float(-ftt + frr / r + lap / r**2)
