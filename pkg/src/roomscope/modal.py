"""Modal-perturbation synthesis of room transfer functions.

For a unit-volume-velocity monopole the pressure response is the modal sum

    H(w) = j w rho * sum_n  psi_n(r_s) psi_n(r_r) / (N_n (k'_n^2 - k^2))

with the rigid-wall modes perturbed to first order by the wall admittances,

    k'_n^2 = k_n^2 + j k (sum_w beta_w(w) I_{n,w}) / N_n ,

where beta_w = rho c / Z_{s,w} is the specific admittance of wall w and
I_{n,w} the analytic integral of psi_n^2 over that wall.  The evaluation
frequency k (not k_n) appears in the perturbation so the frequency
dependence of the boundary admittance is exact; with Re(beta) >= 0 every
mode decays under the e^{+jwt} convention (poles at +/-w_d + j c zeta/2).
"""

from dataclasses import dataclass

import numpy as np

from .core import AirProperties, SURFACE_PLANES, modes_up_to
from .errors import DomainError
from .materials import material_impedance
from .spectrum import F_STEP, TransferFunction, standard_grid

__all__ = ["SolverConfig", "synth_tf_modal", "wall_mode_integrals", "boundary_admittances"]


@dataclass(frozen=True)
class SolverConfig:
    """Shared solver knobs for the modal and finite-difference paths."""

    modal_margin: float = 1.5        # include modes up to margin * f_max
    fdm_points_per_wavelength: float = 10.0
    fdm_tolerance: float = 1e-8
    fdm_method: str = "auto"         # auto | direct | bicgstab

    def __post_init__(self):
        if self.modal_margin < 1.0:
            raise DomainError("modal margin must be >= 1")
        if self.fdm_points_per_wavelength < 6.0:
            raise DomainError("need at least 6 grid points per wavelength")
        if self.fdm_method not in ("auto", "direct", "bicgstab"):
            raise DomainError(f"unknown fdm method {self.fdm_method!r}")


def wall_mode_integrals(geom, modes):
    """Integrals of psi_n^2 over each wall, as an array indexed [mode, surface 1..6].

    cos^2 of an integer multiple of pi is 1 on both walls of a pair, so the
    integral only depends on the wall's normal axis:
        I = prod over in-plane axes of (L_axis / eps_axis).
    """
    dims = np.array(geom.dims)
    n = np.array([m.as_tuple() for m in modes], dtype=float)
    eps = np.where(n > 0, 2.0, 1.0)
    per_axis = dims[None, :] / eps  # (M, 3): L_axis/eps_axis per mode
    out = np.empty((len(modes), 6))
    for sid, (axis, _) in SURFACE_PLANES.items():
        others = [i for i in range(3) if i != axis]
        out[:, sid - 1] = per_axis[:, others[0]] * per_axis[:, others[1]]
    return out


def boundary_admittances(config, freqs, air, porous_model="allard-champoux"):
    """Specific admittance rho c / Z_s per surface on the given frequencies.

    config maps surface ids 1..6 to MaterialSpec or None (truly rigid).
    Returns an (n_freq, 6) complex array.
    """
    beta = np.zeros((len(freqs), 6), dtype=complex)
    for sid in range(1, 7):
        mat = config.get(sid)
        if mat is None:
            continue
        z = material_impedance(mat, freqs, air, model=porous_model)
        beta[:, sid - 1] = air.z0 / np.asarray(z)
    if np.any(beta.real < -1e-12):
        raise DomainError("non-passive boundary: Re(rho c / Z_s) < 0 on some surface")
    return beta


def synth_tf_modal(geom, config, src, rcv, air=AirProperties(),
                   solver=SolverConfig(), freqs=None,
                   porous_model="allard-champoux"):
    """Synthesize the source-to-receiver transfer function by modal summation.

    Parameters
    ----------
    geom : RoomGeometry
    config : dict
        surface id (1..6) -> MaterialSpec, or None for a truly rigid wall.
        All six keys must be present.
    src, rcv : 3-tuples
        Positions in m, strictly inside the room.
    freqs : ndarray, optional
        Defaults to the full dataset grid (1..354 Hz at 0.5 Hz).

    Returns
    -------
    TransferFunction
        Complex pressure in Pa for a 1 m^3/s monopole.
    """
    if freqs is None:
        freqs = standard_grid()
    freqs = np.asarray(freqs, dtype=float)
    if freqs.size == 0 or np.any(freqs <= 0):
        raise DomainError("frequencies must be positive and non-empty")
    if set(config.keys()) != set(range(1, 7)):
        raise DomainError("boundary config must map surfaces 1..6")
    for name, pos in (("source", src), ("receiver", rcv)):
        if not geom.contains(pos):
            raise DomainError(f"{name} position {pos} outside room {geom.dims}")

    modes = modes_up_to(geom, air, solver.modal_margin * freqs.max())
    if not modes:
        raise DomainError("empty mode set")
    mode_idx = [m for m, _ in modes]
    f_n = np.array([f for _, f in modes])
    k_n2 = (2.0 * np.pi * f_n / air.c) ** 2

    n = np.array([m.as_tuple() for m in mode_idx], dtype=float)
    dims = np.array(geom.dims)
    eps = np.where(n > 0, 2.0, 1.0)
    norms = geom.volume / eps.prod(axis=1)
    psi_s = np.cos(n * np.pi * np.asarray(src) / dims).prod(axis=1)
    psi_r = np.cos(n * np.pi * np.asarray(rcv) / dims).prod(axis=1)
    coeff = psi_s * psi_r / norms

    wall_ints = wall_mode_integrals(geom, mode_idx)           # (M, 6)
    beta = boundary_admittances(config, freqs, air, porous_model)  # (F, 6)
    damping = beta @ wall_ints.T / norms[None, :]             # (F, M)

    k = (2.0 * np.pi * freqs / air.c)[:, None]
    denom = k_n2[None, :] - k ** 2 + 1j * k * damping
    if np.any(denom == 0):
        raise DomainError(
            "an undamped mode coincides exactly with a requested frequency; the "
            "response is unbounded there (use a damped boundary or shift the grid)")
    h = 1j * 2.0 * np.pi * freqs * air.rho * np.sum(coeff[None, :] / denom, axis=1)

    step = freqs[1] - freqs[0] if freqs.size > 1 else F_STEP
    return TransferFunction(values=h, f_start=float(freqs[0]), f_step=float(step),
                            source_pos=tuple(src), receiver_pos=tuple(rcv))
