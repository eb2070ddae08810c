"""Rectangular-room geometry, air properties, mode indexing and rigid-wall modes.

Everything here is closed-form and stateless. The surface numbering
convention used across the whole package is::

    1 : x = 0      6 : x = Lx     (pair 1/6)
    2 : y = 0      5 : y = Ly     (pair 2/5)
    3 : z = 0      4 : z = Lz     (floor/ceiling, pair 3/4)

Axis naming follows the room tables: length -> x, width -> y, height -> z.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError

__all__ = [
    "AirProperties", "RoomGeometry", "ModeIndex", "ModeClass",
    "SURFACE_PLANES", "SURFACE_AXIS", "surface_dims", "parallel_surface",
    "eigenfrequency", "mode_shape", "mode_norm", "modes_up_to",
    "schroeder_frequency",
]


@dataclass(frozen=True)
class AirProperties:
    """Speed of sound in m/s and density in kg/m^3."""

    c: float = 343.0
    rho: float = 1.20

    def __post_init__(self):
        if self.c <= 0 or self.rho <= 0:
            raise DomainError(f"air properties must be positive, got c={self.c}, rho={self.rho}")

    @property
    def z0(self):
        """Characteristic impedance rho*c of air, Pa*s/m."""
        return self.rho * self.c


@dataclass(frozen=True)
class RoomGeometry:
    """Shoebox room with dimensions Lx, Ly, Lz in metres."""

    lx: float
    ly: float
    lz: float

    def __post_init__(self):
        if min(self.lx, self.ly, self.lz) <= 0:
            raise DomainError(f"room dimensions must be positive, got {self.dims}")

    @property
    def dims(self):
        return (self.lx, self.ly, self.lz)

    @property
    def volume(self):
        return self.lx * self.ly * self.lz

    @property
    def surface_area(self):
        """Total interior surface area 2(LxLy + LyLz + LxLz)."""
        return 2.0 * (self.lx * self.ly + self.ly * self.lz + self.lx * self.lz)

    @property
    def floor_area(self):
        return self.lx * self.ly

    def contains(self, position, tol=0.0):
        x, y, z = position
        return (-tol <= x <= self.lx + tol and -tol <= y <= self.ly + tol
                and -tol <= z <= self.lz + tol)


class ModeClass(Enum):
    STATIC = "static"
    AXIAL = "axial"
    TANGENTIAL = "tangential"
    OBLIQUE = "oblique"


@dataclass(frozen=True, order=True)
class ModeIndex:
    """Non-negative integer mode orders (nx, ny, nz)."""

    nx: int
    ny: int
    nz: int

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 0:
            raise DomainError(f"mode indices must be non-negative, got {self}")

    @property
    def order_class(self):
        n_nonzero = (self.nx > 0) + (self.ny > 0) + (self.nz > 0)
        return (ModeClass.STATIC, ModeClass.AXIAL,
                ModeClass.TANGENTIAL, ModeClass.OBLIQUE)[n_nonzero]

    def as_tuple(self):
        return (self.nx, self.ny, self.nz)


# surface id -> (axis index, coordinate of the plane as a fraction of L_axis)
SURFACE_PLANES = {1: (0, 0.0), 6: (0, 1.0),
                  2: (1, 0.0), 5: (1, 1.0),
                  3: (2, 0.0), 4: (2, 1.0)}

# surface id -> axis normal to the surface (0=x, 1=y, 2=z)
SURFACE_AXIS = {s: axis for s, (axis, _) in SURFACE_PLANES.items()}

_PARALLEL = {1: 6, 6: 1, 2: 5, 5: 2, 3: 4, 4: 3}


def parallel_surface(surface_id):
    """Id of the surface parallel to ``surface_id`` (pairs 1/6, 2/5, 3/4)."""
    return _PARALLEL[surface_id]


def surface_dims(geom, surface_id):
    """In-plane edge lengths (a, b) of one of the six surfaces."""
    axis = SURFACE_AXIS[surface_id]
    d = geom.dims
    a, b = [d[i] for i in range(3) if i != axis]
    return (a, b)


def eigenfrequency(geom, mode, air=AirProperties()):
    """Rigid-wall eigenfrequency (c/2)*sqrt((nx/Lx)^2 + (ny/Ly)^2 + (nz/Lz)^2) in Hz."""
    n = mode.as_tuple() if isinstance(mode, ModeIndex) else mode
    return 0.5 * air.c * np.sqrt((n[0] / geom.lx) ** 2 + (n[1] / geom.ly) ** 2
                                 + (n[2] / geom.lz) ** 2)


def mode_shape(geom, mode, position):
    """Rigid-wall cosine eigenfunction value at a point inside the room.

    cos(nx*pi*x/Lx) * cos(ny*pi*y/Ly) * cos(nz*pi*z/Lz); |value| <= 1.
    """
    if not geom.contains(position):
        raise DomainError(f"position {position} outside room {geom.dims}")
    n = mode.as_tuple() if isinstance(mode, ModeIndex) else mode
    x, y, z = position
    return (np.cos(n[0] * np.pi * x / geom.lx)
            * np.cos(n[1] * np.pi * y / geom.ly)
            * np.cos(n[2] * np.pi * z / geom.lz))


def mode_norm(geom, mode):
    """Volume integral of the squared mode shape: V / (eps_x * eps_y * eps_z).

    eps = 1 for an index of zero and 2 otherwise.
    """
    n = mode.as_tuple() if isinstance(mode, ModeIndex) else mode
    eps = [(1.0 if ni == 0 else 2.0) for ni in n]
    return geom.volume / (eps[0] * eps[1] * eps[2])


def modes_up_to(geom, air, f_max):
    """All modes with rigid eigenfrequency <= f_max, sorted by frequency.

    Ties are broken lexicographically on (nx, ny, nz) so the ordering is
    deterministic for degenerate modes.

    Returns
    -------
    list of (ModeIndex, frequency_hz)
    """
    if f_max < 0:
        raise DomainError(f"f_max must be non-negative, got {f_max}")
    # loop bounds get a tiny slack so eigenfrequencies exactly at f_max are
    # not lost to floating-point rounding; the <= check below is exact
    two_f_c = 2.0 * f_max / air.c
    out = []
    nx_max = int(np.floor(two_f_c * geom.lx + 1e-9))
    for nx in range(nx_max + 1):
        rem_x = max(two_f_c ** 2 - (nx / geom.lx) ** 2, 0.0)
        ny_max = int(np.floor(np.sqrt(rem_x) * geom.ly + 1e-9))
        for ny in range(ny_max + 1):
            rem_y = max(rem_x - (ny / geom.ly) ** 2, 0.0)
            nz_max = int(np.floor(np.sqrt(rem_y) * geom.lz + 1e-9))
            for nz in range(nz_max + 1):
                mode = ModeIndex(nx, ny, nz)
                f = eigenfrequency(geom, mode, air)
                if f <= f_max:
                    out.append((mode, f))
    out.sort(key=lambda mf: (mf[1], mf[0].as_tuple()))
    return out


def schroeder_frequency(reverberation_time, volume):
    """Schroeder large-room crossover frequency 2000*sqrt(T/V) in Hz."""
    if reverberation_time <= 0 or volume <= 0:
        raise DomainError("reverberation time and volume must be positive")
    return 2000.0 * np.sqrt(reverberation_time / volume)
