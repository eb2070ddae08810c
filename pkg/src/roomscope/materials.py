"""Boundary materials: porous-layer impedance models and absorption coefficients.

A wall is either a porous layer mounted directly on a rigid backing
(characterised by thickness and static flow resistivity) or a nominally
rigid surface described by tabulated octave-band absorption values.

Complex time convention is e^{+j w t} throughout: passive surface
impedances have Re(Z_s) >= 0, propagation constants decay with Re(gamma) > 0.

Porous characteristic properties default to the Allard-Champoux empirical
equations for the dynamic density and dynamic bulk modulus of the air in a
fibrous layer,

    X      = rho0 * f / sigma
    rho(X) = 1.2 + (-0.0364 X^-2 - 0.1144j X^-1)^(1/2)         [kg/m^3]
    K(X)   = 101320 (29.64j + g) / (21.17j + g),  g = (2.82 X^-2 + 24.9j X^-1)^(1/2)

with z_m = sqrt(rho K) and gamma = j w sqrt(rho / K).  The Delany-Bazley and
Miki power-law families are available behind the same interface for
cross-checking.
"""

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq
from scipy.special import j0, j1, struve

from .core import AirProperties
from .errors import DomainError, NumericalError

__all__ = [
    "MaterialSpec", "CharacteristicProps", "MATERIAL_A", "MATERIAL_B", "CONCRETE",
    "OCTAVE_BANDS", "POROUS_MODELS", "porous_characteristic",
    "transfer_matrix_impedance", "surface_impedance", "material_impedance",
    "rigid_band_impedance", "radiation_impedance_avg", "radiation_impedance_exact",
    "size_corrected_alpha", "band_average_alpha", "band_edges",
]

OCTAVE_BANDS = (63.0, 125.0, 250.0)

_SQRT2 = np.sqrt(2.0)


def band_edges(center):
    """Octave band limits [center/sqrt(2), center*sqrt(2)]."""
    if center not in OCTAVE_BANDS:
        raise DomainError(f"band center must be one of {OCTAVE_BANDS}, got {center}")
    return (center / _SQRT2, center * _SQRT2)


@dataclass(frozen=True)
class MaterialSpec:
    """Wall description: a rigid-backed porous layer or a rigid band-alpha surface."""

    kind: str  # "porous" | "rigid"
    thickness: float = 0.0          # m, porous only
    flow_resistivity: float = 0.0   # N s / m^4, porous only
    band_alpha: tuple = ()          # per OCTAVE_BANDS, rigid only
    name: str = ""

    def __post_init__(self):
        if self.kind == "porous":
            if self.thickness <= 0 or self.flow_resistivity <= 0:
                raise DomainError("porous material needs thickness > 0 and flow resistivity > 0")
        elif self.kind == "rigid":
            if len(self.band_alpha) != len(OCTAVE_BANDS):
                raise DomainError(f"rigid material needs {len(OCTAVE_BANDS)} band alphas")
            if not all(0.0 <= a <= 1.0 for a in self.band_alpha):
                raise DomainError("band alphas must lie in [0, 1]")
        else:
            raise DomainError(f"unknown material kind {self.kind!r}")

    @classmethod
    def from_json(cls, obj):
        if obj.get("kind") == "porous":
            return cls(kind="porous", thickness=obj["thickness_m"],
                       flow_resistivity=obj["flow_resistivity"],
                       name=obj.get("name", ""))
        if obj.get("kind") == "rigid":
            return cls(kind="rigid", band_alpha=tuple(obj["band_alpha"]),
                       name=obj.get("name", ""))
        raise DomainError(f"unknown material kind in {obj!r}")

    def to_json(self):
        if self.kind == "porous":
            return {"kind": "porous", "thickness_m": self.thickness,
                    "flow_resistivity": self.flow_resistivity}
        return {"kind": "rigid", "band_alpha": list(self.band_alpha)}


MATERIAL_A = MaterialSpec(kind="porous", thickness=0.04, flow_resistivity=47000.0, name="A")
MATERIAL_B = MaterialSpec(kind="porous", thickness=0.10, flow_resistivity=109000.0, name="B")
CONCRETE = MaterialSpec(kind="rigid", band_alpha=(0.029, 0.048, 0.043), name="concrete")


@dataclass(frozen=True)
class CharacteristicProps:
    """Characteristic impedance z_m (Pa s/m) and propagation constant gamma (1/m)."""

    z_m: complex
    gamma: complex


def _allard_champoux(sigma, f, air):
    X = air.rho * f / sigma
    rho_eff = 1.2 + np.sqrt(-0.0364 * X ** -2 - 0.1144j * X ** -1)
    g = np.sqrt(2.82 * X ** -2 + 24.9j * X ** -1)
    k_eff = 101320.0 * (29.64j + g) / (21.17j + g)
    z_m = np.sqrt(rho_eff * k_eff)
    gamma = 2j * np.pi * f * np.sqrt(rho_eff / k_eff)
    return z_m, gamma


def _power_law(coeffs):
    # zc = z0 (1 + c0 X^-c1 - j c2 X^-c3); gamma = k0 (c4 X^-c5 + j(1 + c6 X^-c7))
    c = coeffs

    def model(sigma, f, air):
        X = air.rho * f / sigma
        zc = air.z0 * (1.0 + c[0] * X ** -c[1] - 1j * c[2] * X ** -c[3])
        k0 = 2.0 * np.pi * f / air.c
        gamma = k0 * (c[4] * X ** -c[5] + 1j * (1.0 + c[6] * X ** -c[7]))
        return zc, gamma

    return model


POROUS_MODELS = {
    "allard-champoux": _allard_champoux,
    "delany-bazley": _power_law((0.0571, 0.754, 0.087, 0.732, 0.189, 0.595, 0.0978, 0.700)),
    "miki": _power_law((0.070, 0.632, 0.107, 0.632, 0.160, 0.618, 0.109, 0.618)),
}


def porous_characteristic(sigma, f, air=AirProperties(), model="allard-champoux"):
    """Characteristic properties (z_m, gamma) of a porous medium.

    Parameters
    ----------
    sigma : float
        Static flow resistivity, N s/m^4.
    f : float or ndarray
        Frequency in Hz, strictly positive.
    model : str
        One of ``POROUS_MODELS``.

    Returns
    -------
    CharacteristicProps (scalar input) or (z_m, gamma) arrays.
    """
    if sigma <= 0:
        raise DomainError(f"flow resistivity must be positive, got {sigma}")
    if np.any(np.asarray(f) <= 0):
        raise DomainError("frequency must be strictly positive")
    z_m, gamma = POROUS_MODELS[model](sigma, np.asarray(f, dtype=float), air)
    if np.any(np.real(gamma) <= 0) or np.any(np.real(z_m) <= 0):
        raise NumericalError("porous model produced a non-decaying or non-passive medium")
    if np.isscalar(f) or np.ndim(f) == 0:
        return CharacteristicProps(z_m=complex(z_m), gamma=complex(gamma))
    return z_m, gamma


def transfer_matrix_impedance(z_m, gamma, thickness, z_backing):
    """Surface impedance of a single layer in front of a backing impedance.

    Z_s = z_m (z_c cosh(gh) + z_m sinh(gh)) / (z_c sinh(gh) + z_m cosh(gh))
    """
    gh = gamma * thickness
    return z_m * (z_backing * np.cosh(gh) + z_m * np.sinh(gh)) / (
        z_backing * np.sinh(gh) + z_m * np.cosh(gh))


def surface_impedance(mat, f, air=AirProperties(), model="allard-champoux"):
    """Surface impedance of a rigid-backed porous layer: Z_s = z_m coth(gamma h).

    This is the z_c -> infinity limit of the transfer-matrix equation.
    """
    if mat.kind != "porous":
        raise DomainError("surface_impedance is defined for porous materials")
    if mat.thickness <= 0:
        raise DomainError("layer thickness must be positive")
    farr = np.asarray(f, dtype=float)
    out = POROUS_MODELS[model](mat.flow_resistivity, farr, air)
    z_m, gamma = out
    z_s = z_m / np.tanh(gamma * mat.thickness)
    if np.isscalar(f) or np.ndim(f) == 0:
        return complex(z_s)
    return z_s


def _paris_alpha_real(zeta, n_theta=256):
    """Random-incidence absorption of a real normalized impedance (Paris formula)."""
    x, w = leggauss(n_theta)
    hi = np.pi / 2
    th = 0.5 * hi * (x + 1.0)
    ww = 0.5 * hi * w
    ct = np.cos(th)
    a = 4.0 * zeta * ct / (zeta * ct + 1.0) ** 2
    return 2.0 * np.sum(ww * a * np.sin(th) * ct)


@lru_cache(maxsize=None)
def _rigid_zeta(alpha):
    """Real normalized impedance whose random-incidence absorption equals alpha.

    The hard-surface (large zeta) branch is used; alpha must be small enough
    to lie on it.
    """
    if not 0.0 < alpha < 0.8:
        raise DomainError(f"band alpha {alpha} outside the invertible hard-surface range")
    return brentq(lambda z: _paris_alpha_real(z) - alpha, 4.0, 1e7, xtol=1e-10)


def rigid_band_impedance(mat, f, air=AirProperties()):
    """Piecewise-constant real impedance for a rigid band-alpha surface.

    Each octave band's tabulated alpha is inverted through the
    random-incidence relation; band boundaries sit at the geometric means of
    adjacent centers and the outer bands extend to the grid edges.
    """
    if mat.kind != "rigid":
        raise DomainError("rigid_band_impedance needs a rigid material")
    farr = np.atleast_1d(np.asarray(f, dtype=float))
    bounds = [np.sqrt(OCTAVE_BANDS[i] * OCTAVE_BANDS[i + 1])
              for i in range(len(OCTAVE_BANDS) - 1)]
    idx = np.searchsorted(bounds, farr)
    zetas = np.array([_rigid_zeta(a) for a in mat.band_alpha])
    z = zetas[idx] * air.z0
    out = z.astype(complex)
    if np.isscalar(f) or np.ndim(f) == 0:
        return complex(out[0])
    return out


def material_impedance(mat, f, air=AirProperties(), model="allard-champoux"):
    """Surface impedance of any MaterialSpec on the given frequencies."""
    if mat.kind == "porous":
        return surface_impedance(mat, f, air, model=model)
    return rigid_band_impedance(mat, f, air)


# ---------------------------------------------------------------------------
# Radiation impedance of a finite rectangular surface, averaged over azimuth
# ---------------------------------------------------------------------------
#
# Exact definition (forced traveling-wave excitation at elevation theta,
# Rayleigh integral, azimuth average done analytically via J0):
#
#   Zr(theta) = rho c * (2jk / (pi S)) *
#               int_0^a int_0^b (a-u)(b-v) J0(k sin(theta) r) e^{-jkr}/r du dv
#
# The fast wideband model blends the equivalent-piston impedance (exact
# compact-surface limit, with the reactance rescaled to the true rectangle
# geometry moment and a trace-phasing rolloff) into a complex "shadowed
# cosine" form whose grazing saturation carries the 45-degree edge phase.
# Its five interpolation constants were fitted once against the exact
# integral over the panel sizes, frequencies and angles this package uses
# (see tools/calibrate_radiation.py); worst-case error on that sweep is 14%,
# median 3%.

_RAD_X0 = 1.57    # piston/shadow crossover in k*a_e
_RAD_C40 = 2.88   # grazing shadow strength
_RAD_C41 = 1.38   # extra shadow toward grazing
_RAD_C3 = 1.05    # mid-angle mass term
_RAD_C60 = 1.05   # real-part depletion
_RAD_C61 = 1.42   # extra depletion toward grazing


@lru_cache(maxsize=None)
def _geometric_moment(a, b, n=120):
    """int_0^a int_0^b (a-u)(b-v)/sqrt(u^2+v^2) du dv (polar quadrature)."""
    xg, wg = leggauss(n)
    total = 0.0
    phi_split = np.arctan2(b, a)
    for lo, hi, along_a in [(0.0, phi_split, True), (phi_split, np.pi / 2, False)]:
        phi = 0.5 * (hi - lo) * xg + 0.5 * (hi + lo)
        wphi = 0.5 * (hi - lo) * wg
        rmax = a / np.cos(phi) if along_a else b / np.sin(phi)
        r = 0.5 * rmax[:, None] * (xg[None, :] + 1.0)
        wr = 0.5 * rmax[:, None] * wg[None, :]
        u = r * np.cos(phi)[:, None]
        v = r * np.sin(phi)[:, None]
        total += np.sum(wphi[:, None] * wr * (a - u) * (b - v))
    return total


def radiation_impedance_avg(dims, theta, f, air=AirProperties()):
    """Azimuth-averaged radiation impedance of an a x b surface (fast model).

    Converges to rho*c/cos(theta) in the infinite-panel limit and to the
    baffled-piston impedance for compact surfaces.  theta and f may be
    broadcastable arrays.

    Parameters
    ----------
    dims : (a, b)
        Edge lengths in m.
    theta : float or ndarray
        Elevation angle from the surface normal, in [0, pi/2).
    f : float or ndarray
        Frequency, Hz.
    """
    a, b = dims
    if a <= 0 or b <= 0:
        raise DomainError(f"surface dimensions must be positive, got {dims}")
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0) or np.any(theta >= np.pi / 2):
        raise DomainError("elevation angle must lie in [0, pi/2)")
    farr = np.asarray(f, dtype=float)
    if np.any(farr <= 0):
        raise DomainError("frequency must be positive")

    k = 2.0 * np.pi * farr / air.c
    s_area = a * b
    a_e = np.sqrt(s_area / np.pi)
    kss = k * np.sqrt(s_area)
    st2 = np.sin(theta) ** 2

    x = 2.0 * k * a_e
    q_im = _geometric_moment(float(a), float(b)) / ((4.0 / 3.0) * a_e * s_area)
    phasing = 1.0 / (1.0 + (k * np.sin(theta)) ** 2 * (a * a + b * b) / 24.0)
    z_piston = phasing * ((1.0 - 2.0 * j1(x) / x) + 1j * q_im * (2.0 * struve(1, x) / x))

    c4 = _RAD_C40 + _RAD_C41 * st2 * st2
    c6 = _RAD_C60 + _RAD_C61 * st2
    radicand = np.cos(theta) ** 2 * np.clip(1.0 - c6 / kss, 0.0, None) - 1j * c4 / kss
    z_shadow = 1.0 / np.sqrt(radicand) + 1j * _RAD_C3 * st2 / kss

    w = 1.0 / (1.0 + (k * a_e / _RAD_X0) ** 4)
    out = air.z0 * (w * z_piston + (1.0 - w) * z_shadow)
    if np.ndim(out) == 0:
        return complex(out)
    return out


def radiation_impedance_exact(dims, theta, f, air=AirProperties(), n_phi=64, n_r=None):
    """Direct quadrature of the exact radiation-impedance double integral.

    Slow reference implementation used to validate the wideband model; the
    1/r singularity is removed by polar coordinates and the radial order
    tracks the oscillation count.
    """
    a, b = dims
    if a <= 0 or b <= 0:
        raise DomainError(f"surface dimensions must be positive, got {dims}")
    if not 0 <= theta < np.pi / 2:
        raise DomainError("elevation angle must lie in [0, pi/2)")
    k = 2.0 * np.pi * f / air.c
    s_area = a * b
    diag = np.hypot(a, b)
    if n_r is None:
        cycles = k * (1.0 + abs(np.sin(theta))) * diag / (2.0 * np.pi)
        n_r = int(max(48, 10 * cycles))
    xg, wg = leggauss(n_phi)
    rg, rw = leggauss(n_r)
    total = 0.0 + 0.0j
    phi_split = np.arctan2(b, a)
    for lo, hi, along_a in [(0.0, phi_split, True), (phi_split, np.pi / 2, False)]:
        phi = 0.5 * (hi - lo) * xg + 0.5 * (hi + lo)
        wphi = 0.5 * (hi - lo) * wg
        rmax = a / np.cos(phi) if along_a else b / np.sin(phi)
        r = 0.5 * rmax[:, None] * (rg[None, :] + 1.0)
        wr = 0.5 * rmax[:, None] * rw[None, :]
        u = r * np.cos(phi)[:, None]
        v = r * np.sin(phi)[:, None]
        integ = (a - u) * (b - v) * j0(k * np.sin(theta) * r) * np.exp(-1j * k * r)
        total += np.sum(wphi[:, None] * wr * integ)
    return air.z0 * (2j * k / (np.pi * s_area)) * total


# quadrature clips just short of pi/2; the sin(theta) weight makes the
# excluded sliver negligible while avoiding the grazing singularity
_THETA_CLIP = np.pi / 2 - 1e-3


def _alpha_quadrature(zeta_s, dims, f, air, n_theta, radiation):
    xg, wg = leggauss(n_theta)
    th = 0.5 * _THETA_CLIP * (xg + 1.0)
    ww = 0.5 * _THETA_CLIP * wg
    farr = np.atleast_1d(np.asarray(f, dtype=float))
    if radiation == "exact":
        zr = np.array([[radiation_impedance_exact(dims, t, fi, air) for t in th]
                       for fi in farr]) / air.z0
    else:
        zr = radiation_impedance_avg(dims, th[None, :], farr[:, None], air) / air.z0
    zs = np.atleast_1d(zeta_s)[:, None]
    integ = 4.0 * np.real(zs) / np.abs(zs + zr) ** 2 * np.sin(th)[None, :]
    return 2.0 * np.sum(ww[None, :] * integ, axis=1)


def size_corrected_alpha(mat, dims, f, air=AirProperties(), n_theta=64,
                         radiation="wideband", check_convergence=True):
    """Size-corrected random-incidence absorption coefficient.

    alpha = 2 int_0^{pi/2} 4 Re(zeta_s) / |zeta_s + zeta_r(theta)|^2 sin(theta) dtheta

    with both impedances normalized by rho*c (the paper-stated integrand is
    dimensionless only in normalized form; with rho*c/cos(theta) in place of
    zeta_r this reduces exactly to the Paris random-incidence formula).
    Rigid band-alpha materials return their tabulated band values instead.

    Raises NumericalError if doubling the quadrature order moves the result
    by more than 1e-3 relative.
    """
    if mat.kind == "rigid":
        farr = np.atleast_1d(np.asarray(f, dtype=float))
        bounds = [np.sqrt(OCTAVE_BANDS[i] * OCTAVE_BANDS[i + 1])
                  for i in range(len(OCTAVE_BANDS) - 1)]
        alphas = np.array(mat.band_alpha)[np.searchsorted(bounds, farr)]
        return float(alphas[0]) if np.ndim(f) == 0 else alphas
    zeta_s = np.asarray(surface_impedance(mat, f, air)) / air.z0
    alpha = _alpha_quadrature(zeta_s, dims, f, air, n_theta, radiation)
    if check_convergence:
        alpha2 = _alpha_quadrature(zeta_s, dims, f, air, 2 * n_theta, radiation)
        rel = np.max(np.abs(alpha - alpha2) / np.maximum(np.abs(alpha2), 1e-12))
        if rel > 1e-3:
            raise NumericalError(
                f"absorption quadrature not converged: order {n_theta} vs "
                f"{2 * n_theta} differ by {rel:.2e} relative")
        alpha = alpha2
    if np.any(alpha > 1.2):
        warnings.warn(
            f"size-corrected alpha exceeds 1.2 (max {alpha.max():.3f}); the finite-size "
            "correction can pass 1 but this much excess suggests a model problem",
            stacklevel=2)
    return float(alpha[0]) if np.ndim(f) == 0 else alpha


def band_average_alpha(mat, dims, band_center, air=AirProperties(), grid=None,
                       radiation="wideband"):
    """Mean size-corrected alpha over dataset grid frequencies inside one octave band.

    Rigid materials return the tabulated value for the band exactly.
    """
    if band_center not in OCTAVE_BANDS:
        raise DomainError(f"band center must be one of {OCTAVE_BANDS}, got {band_center}")
    if mat.kind == "rigid":
        return float(mat.band_alpha[OCTAVE_BANDS.index(band_center)])
    if grid is None:
        from .spectrum import standard_grid
        grid = standard_grid()
    lo, hi = band_edges(band_center)
    sel = grid[(grid >= lo) & (grid <= hi)]
    if sel.size == 0:
        raise DomainError(f"no grid points inside the {band_center} Hz band")
    alpha = size_corrected_alpha(mat, dims, sel, air, radiation=radiation,
                                 check_convergence=False)
    return float(np.mean(alpha))
