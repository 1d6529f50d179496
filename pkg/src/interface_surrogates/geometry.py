"""Random interface geometry and the mollified radial domain mapping.

A star-shaped interface around the origin is parametrized in polar
coordinates by a truncated trigonometric expansion

    r(y; phi) = r0 + sum_j b_j y_j psi_j(phi),    y in [-1, 1]^d,

with psi_j(phi) = sin(((j+1)/2) phi) for odd j and cos((j/2) phi) for even
j, and pairwise-equal amplitudes b_{2j-1} = b_{2j} = c r0 j^(-p).  The
mapping Phi sends the nominal configuration (interface = circle of radius
r0) to the perturbed one by displacing points radially,

    Phi(y; xh) = xh + chi(|xh|) (r(y; phih) - r0) xh / |xh|,

where chi is a piecewise linear mollifier supported on [r_inner, r_outer].
Phi preserves angles, is the identity outside the mollifier support, and
is a bijection whenever the perturbation amplitude stays below the
distances from r0 to the mollifier cutoffs.
"""

import numpy as np

# chi-branch tags used for one-sided derivative evaluation at the three
# mollifier breakpoint circles.
BAND_CORE = 0    # rho <= r_inner, identity
BAND_INNER = 1   # r_inner <= rho <= r0, chi rising
BAND_OUTER = 2   # r0 <= rho <= r_outer, chi falling
BAND_FAR = 3     # rho >= r_outer, identity
BAND_PML = 4     # absorbing annulus (disk meshes), identity

IDENTITY_BANDS = (BAND_CORE, BAND_FAR, BAND_PML)


class GeometryError(ValueError):
    """Invalid interface model, mapping parameters, or evaluation point."""


def basis(j, phi):
    """Evaluate psi_j: sin(((j+1)/2) phi) for odd j, cos((j/2) phi) for even j."""
    if j < 1:
        raise GeometryError(f"basis index must be >= 1, got {j}")
    phi = np.asarray(phi, dtype=float)
    k = (j + 1) // 2
    return np.sin(k * phi) if j % 2 == 1 else np.cos(k * phi)


def basis_derivative(j, phi):
    """d/dphi of basis(j, phi)."""
    if j < 1:
        raise GeometryError(f"basis index must be >= 1, got {j}")
    phi = np.asarray(phi, dtype=float)
    k = (j + 1) // 2
    return k * np.cos(k * phi) if j % 2 == 1 else -k * np.sin(k * phi)


class InterfaceModel:
    """Nominal radius r0 plus a d-term random trigonometric perturbation.

    Amplitudes decay as b_{2j-1} = b_{2j} = c r0 j^(-p).  The worst-case
    perturbation of the radius over y in [-1,1]^d and all angles is
    amplitude() = sqrt(2) sum_j b_{2j}; the constructor requires it to stay
    at or below r0/2 so the perturbed radius never drops under r0/2.
    """

    def __init__(self, r0, d, p, c):
        if r0 <= 0:
            raise GeometryError(f"r0 must be positive, got {r0}")
        if d < 2 or d % 2 != 0:
            raise GeometryError(f"d must be even and >= 2, got {d}")
        if p < 1:
            raise GeometryError(f"decay exponent p must be >= 1, got {p}")
        if c < 0:
            raise GeometryError(f"amplitude factor c must be >= 0, got {c}")
        self.r0 = float(r0)
        self.d = int(d)
        self.p = float(p)
        self.c = float(c)
        pair = c * r0 * np.arange(1, d // 2 + 1, dtype=float) ** (-float(p))
        self.b = np.repeat(pair, 2)
        if self.amplitude() > r0 / 2 + 1e-12:
            raise GeometryError(
                f"perturbation amplitude {self.amplitude():.6g} exceeds r0/2 = {r0 / 2:.6g}"
            )

    def amplitude(self):
        """Upper bound for max_{y,phi} |r(y;phi) - r0| (exact per pair)."""
        return float(np.sqrt(2.0) * self.b[1::2].sum())

    def to_dict(self):
        return {"r0": self.r0, "d": self.d, "p": self.p, "c": self.c}

    def __repr__(self):
        return f"InterfaceModel(r0={self.r0}, d={self.d}, p={self.p}, c={self.c})"


def max_shape_variation(model):
    """Worst-case relative interface displacement, sqrt(2)/r0 * sum_j b_{2j}."""
    return model.amplitude() / model.r0


def as_sample(model, y):
    """Validate a parameter vector: shape (d,), entries in [-1, 1]."""
    y = np.asarray(y, dtype=float)
    if y.shape != (model.d,):
        raise GeometryError(f"sample shape {y.shape} does not match d={model.d}")
    if np.any(np.abs(y) > 1.0 + 1e-12):
        raise GeometryError("sample entries must lie in [-1, 1]")
    return y


def _pair_weights(model, y):
    # s_k multiplies sin(k phi), c_k multiplies cos(k phi), k = 1..d/2
    return model.b[0::2] * y[0::2], model.b[1::2] * y[1::2]


def radius(model, y, phi):
    """Perturbed interface radius r(y; phi); phi may be an array."""
    y = as_sample(model, y)
    phi = np.asarray(phi, dtype=float)
    s, co = _pair_weights(model, y)
    k = np.arange(1, model.d // 2 + 1, dtype=float)
    ang = np.multiply.outer(phi, k)
    return model.r0 + np.sin(ang) @ s + np.cos(ang) @ co


def radius_dphi(model, y, phi):
    """Angular derivative dr/dphi(y; phi)."""
    y = as_sample(model, y)
    phi = np.asarray(phi, dtype=float)
    s, co = _pair_weights(model, y)
    k = np.arange(1, model.d // 2 + 1, dtype=float)
    ang = np.multiply.outer(phi, k)
    return np.cos(ang) @ (k * s) - np.sin(ang) @ (k * co)


class DomainMap:
    """Mollified radial map between the nominal and perturbed configurations.

    r_inner < r0 and r_outer > r0 bound the support of the mollifier

        chi(rho) = (rho - r_inner)/(r0 - r_inner)   on [r_inner, r0)
                 = (r_outer - rho)/(r_outer - r0)   on [r0, r_outer)
                 = 0                                elsewhere.

    Bijectivity of the map requires amplitude < min(r0 - r_inner,
    r_outer - r0), checked here once instead of per evaluation.
    """

    def __init__(self, model, r_inner=None, r_outer=None):
        self.model = model
        r0 = model.r0
        self.r_inner = r0 / 4 if r_inner is None else float(r_inner)
        self.r_outer = 1.75 * r0 if r_outer is None else float(r_outer)
        if not (0 < self.r_inner < r0 < self.r_outer):
            raise GeometryError(
                f"need 0 < r_inner < r0 < r_outer, got {self.r_inner}, {r0}, {self.r_outer}"
            )
        if self.r_outer < 1.5 * r0:
            raise GeometryError(f"r_outer must be >= 1.5*r0, got {self.r_outer}")
        slack = min(r0 - self.r_inner, self.r_outer - r0)
        if model.amplitude() >= slack:
            raise GeometryError(
                f"amplitude {model.amplitude():.6g} >= mollifier slack {slack:.6g}; map not bijective"
            )

    @property
    def r0(self):
        return self.model.r0

    def to_dict(self):
        d = self.model.to_dict()
        d.update({"r_inner": self.r_inner, "r_outer": self.r_outer})
        return d

    @classmethod
    def from_dict(cls, cfg):
        model = InterfaceModel(cfg["r0"], cfg["d"], cfg["p"], cfg["c"])
        return cls(model, cfg.get("r_inner"), cfg.get("r_outer"))

    def __repr__(self):
        return f"DomainMap({self.model!r}, r_inner={self.r_inner}, r_outer={self.r_outer})"


def mollifier(dm, rho):
    """Piecewise linear mollifier chi(rho), continuous, chi(r0) = 1."""
    rho = np.asarray(rho, dtype=float)
    up = (rho - dm.r_inner) / (dm.r0 - dm.r_inner)
    down = (dm.r_outer - rho) / (dm.r_outer - dm.r0)
    chi = np.where(rho < dm.r0, up, down)
    return np.where((rho >= dm.r_inner) & (rho < dm.r_outer), chi, 0.0)


def mollifier_slope(dm, rho, band):
    """One-sided slope chi'(rho) on the branch selected by band."""
    rho = np.asarray(rho, dtype=float)
    band = np.asarray(band)
    slope = np.zeros_like(rho)
    slope[band == BAND_INNER] = 1.0 / (dm.r0 - dm.r_inner)
    slope[band == BAND_OUTER] = -1.0 / (dm.r_outer - dm.r0)
    return slope


def band_of(dm, rho, tol=1e-12):
    """Classify radii into chi branches; rejects radii on a breakpoint circle.

    Mesh-aware callers should pass their own per-triangle band instead; this
    helper serves free points only.
    """
    rho = np.asarray(rho, dtype=float)
    for circle in (dm.r_inner, dm.r0, dm.r_outer):
        if np.any(np.abs(rho - circle) <= tol):
            raise GeometryError(
                "point on a mollifier breakpoint circle; pass an explicit band"
            )
    band = np.full(rho.shape, BAND_FAR, dtype=np.uint8)
    band[rho < dm.r_outer] = BAND_OUTER
    band[rho < dm.r0] = BAND_INNER
    band[rho < dm.r_inner] = BAND_CORE
    return band


def _polar(points):
    points = np.asarray(points, dtype=float)
    rho = np.hypot(points[..., 0], points[..., 1])
    phi = np.arctan2(points[..., 1], points[..., 0])
    return rho, phi


def map_forward(dm, y, points):
    """Apply Phi(y; .) to points of shape (..., 2).

    Bit-exact identity wherever chi vanishes (inside r_inner, outside
    r_outer), so far-field nodes are never perturbed by roundoff.
    """
    points = np.asarray(points, dtype=float)
    rho, phi = _polar(points)
    chi = mollifier(dm, rho)
    move = chi != 0.0
    if not np.any(move):
        return points.copy()
    shift = np.zeros_like(rho)
    r = radius(dm.model, y, phi[move])
    shift[move] = chi[move] * (r - dm.r0) / rho[move]
    out = points * (1.0 + shift)[..., None]
    return np.where(move[..., None], out, points)


def map_jacobian(dm, y, points, band=None):
    """Jacobian DPhi(y; .) at points of shape (n, 2), returned as (n, 2, 2).

    In the frame (e_rho, e_phi) the Jacobian is upper triangular with
    diagonal (1 + chi'(rho)(r - r0), g(rho)/rho) where g is the mapped
    radius, so detDPhi > 0 exactly when both factors are positive.  The
    chi' branch at a breakpoint circle is ambiguous; the band argument
    selects it (mesh region tags provide it), otherwise it is inferred and
    points sitting on a breakpoint are rejected.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    rho, phi = _polar(points)
    if band is None:
        band = band_of(dm, rho)
    else:
        band = np.broadcast_to(np.asarray(band), rho.shape)

    n = rho.shape[0]
    jac = np.zeros((n, 2, 2))
    jac[:, 0, 0] = 1.0
    jac[:, 1, 1] = 1.0
    active = (band == BAND_INNER) | (band == BAND_OUTER)
    if not np.any(active):
        return jac

    rho_a, phi_a = rho[active], phi[active]
    if np.any(rho_a <= 0):
        raise GeometryError("Jacobian undefined at the origin")
    r = radius(dm.model, y, phi_a)
    dr = radius_dphi(dm.model, y, phi_a)
    chi = mollifier(dm, rho_a)
    dchi = mollifier_slope(dm, rho_a, band[active])

    g_rho = 1.0 + dchi * (r - dm.r0)
    g = rho_a + chi * (r - dm.r0)
    m01 = chi * dr / rho_a
    m11 = g / rho_a

    cs, sn = np.cos(phi_a), np.sin(phi_a)
    # Q @ [[g_rho, m01], [0, m11]] @ Q.T with Q the rotation by phi
    j00 = g_rho * cs * cs - m01 * cs * sn + m11 * sn * sn
    j01 = g_rho * cs * sn + m01 * cs * cs - m11 * sn * cs
    j10 = g_rho * sn * cs - m01 * sn * sn - m11 * cs * sn
    j11 = g_rho * sn * sn + m01 * sn * cs + m11 * cs * cs
    jac[active, 0, 0] = j00
    jac[active, 0, 1] = j01
    jac[active, 1, 0] = j10
    jac[active, 1, 1] = j11
    return jac


def map_inverse(dm, y, points, tol=1e-12, maxit=100):
    """Invert Phi(y; .) at points of shape (..., 2) by per-ray Newton.

    Along each ray the mapped radius g(rhoh) = rhoh + chi(rhoh)(r - r0) is
    strictly increasing and piecewise linear, so the bisection-safeguarded
    Newton iteration lands on the root to absolute tolerance `tol` in a
    handful of steps.
    """
    points = np.asarray(points, dtype=float)
    shape = points.shape
    pts = points.reshape(-1, 2)
    rho, phi = _polar(pts)
    out = pts.copy()

    # outside the support g is the identity; r < r0/2 never occurs
    inside = (rho > dm.r_inner) & (rho < dm.r_outer)
    if not np.any(inside):
        return out.reshape(shape)

    target = rho[inside]
    r = radius(dm.model, y, phi[inside])
    shift = r - dm.r0

    lo = np.full_like(target, dm.r_inner)
    hi = np.full_like(target, dm.r_outer)
    x = np.clip(target, lo, hi)
    for _ in range(maxit):
        chi = mollifier(dm, x)
        g = x + chi * shift
        resid = g - target
        done = np.abs(resid) <= tol
        if np.all(done):
            break
        lo = np.where(resid < 0, np.maximum(lo, x), lo)
        hi = np.where(resid > 0, np.minimum(hi, x), hi)
        dchi = np.where(x < dm.r0, 1.0 / (dm.r0 - dm.r_inner),
                        -1.0 / (dm.r_outer - dm.r0))
        slope = 1.0 + dchi * shift
        if np.any(slope <= 0):
            raise GeometryError("non-monotone radial map; interface model invalid")
        step = resid / slope
        xn = x - step
        bad = (xn <= lo) | (xn >= hi)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        x = np.where(done, x, xn)
    else:
        raise GeometryError("radial inverse did not converge")

    scale = np.ones_like(rho)
    scale[inside] = x / target
    out = pts * scale[:, None]
    return out.reshape(shape)


def kink_hyperplane(dm, x0):
    """Parameter-space hyperplane where the interface crosses the point x0.

    The interface passes through x0 exactly when sum_j b_j psi_j(phi0) y_j
    = |x0| - r0, an affine equation in y.  Returns (normal, offset), or
    None when the hyperplane misses [-1, 1]^d entirely.
    """
    x0 = np.asarray(x0, dtype=float)
    rho0 = float(np.hypot(x0[0], x0[1]))
    if rho0 == 0.0:
        raise GeometryError("kink hyperplane undefined at the origin")
    phi0 = float(np.arctan2(x0[1], x0[0]))
    normal = np.array([dm.model.b[j - 1] * float(basis(j, phi0))
                       for j in range(1, dm.model.d + 1)])
    offset = rho0 - dm.r0
    if abs(offset) > np.abs(normal).sum():
        return None
    return normal, offset
