"""Radial vector fields w(y) = h(|y|) y and the suprema the solver and bounds need.

For such a field the Jacobian has eigenvalues h (tangential) and h + s h'
(radial), and div w = 2h + s h' depends on s = |y| only, so
|grad div w| = |3h' + s h''|. All suprema are taken over a dense sample of s.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np
from scipy.integrate import trapezoid
from scipy.ndimage import maximum_filter1d

_SAMPLES = 200_001


class RadialProfile(ABC):
    @abstractmethod
    def h(self, s: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def dh(self, s: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def d2h(self, s: np.ndarray) -> np.ndarray: ...

    @property
    @abstractmethod
    def reach(self) -> float:
        """Radius beyond which the profile and its derivatives are negligible."""

    def field(self, y: np.ndarray) -> np.ndarray:
        """w(y) for displacements of shape (..., 2)."""
        s = np.sqrt((y ** 2).sum(axis=-1))
        return self.h(s)[..., None] * y

    def _grid(self, extra: float = 0.0) -> np.ndarray:
        return np.linspace(0.0, self.reach + extra, _SAMPLES)

    def sup_magnitude(self) -> float:
        """sup |w(y)| = sup s |h(s)|."""
        s = self._grid()
        return float(np.max(s * np.abs(self.h(s))))

    def sup_jacobian(self) -> float:
        """sup of the Frobenius norm of Dw."""
        s = self._grid()
        h = self.h(s)
        return float(np.max(np.sqrt(h ** 2 + (h + s * self.dh(s)) ** 2)))

    def grad_div(self, s: np.ndarray) -> np.ndarray:
        return np.abs(3.0 * self.dh(s) + s * self.d2h(s))

    def swept_grad_div_integral(self, radius: float) -> float:
        """Integral over the plane of sup_{|p| <= radius} |grad div w(x - p)|.

        The sup at |x| = rho runs over s in [rho - radius, rho + radius]; values
        below s = 0 do not exist and the window is padded with zeros there,
        which is harmless because the integrand is nonnegative.
        """
        radius = max(0.0, float(radius))
        s = self._grid(extra=2.0 * radius)
        ds = s[1] - s[0]
        g = self.grad_div(s)
        half = int(math.ceil(radius / ds))
        if half > 0:
            g = maximum_filter1d(g, size=2 * half + 1, mode="constant", cval=0.0)
        return float(2.0 * math.pi * trapezoid(s * g, s))


class GaussianProfile(RadialProfile):
    """h(s) = a exp(-s^2 / l)."""

    def __init__(self, amplitude: float, length: float):
        self.a = float(amplitude)
        self.l = float(length)

    def h(self, s):
        return self.a * np.exp(-s ** 2 / self.l)

    def dh(self, s):
        return -(2.0 * s / self.l) * self.h(s)

    def d2h(self, s):
        return (4.0 * s ** 2 / self.l ** 2 - 2.0 / self.l) * self.h(s)

    @property
    def reach(self) -> float:
        return 8.0 * math.sqrt(self.l)


class LorentzProfile(RadialProfile):
    """h(s) = b / (1 + s^2)."""

    def __init__(self, amplitude: float):
        self.b = float(amplitude)

    def h(self, s):
        return self.b / (1.0 + s ** 2)

    def dh(self, s):
        return -2.0 * self.b * s / (1.0 + s ** 2) ** 2

    def d2h(self, s):
        return self.b * (6.0 * s ** 2 - 2.0) / (1.0 + s ** 2) ** 3

    @property
    def reach(self) -> float:
        # |grad div w| decays like s^-5
        return 200.0


class ExponentialProfile(RadialProfile):
    """h(s) = b exp(-c s)."""

    def __init__(self, amplitude: float, rate: float):
        self.b = float(amplitude)
        self.c = float(rate)

    def h(self, s):
        return self.b * np.exp(-self.c * s)

    def dh(self, s):
        return -self.c * self.h(s)

    def d2h(self, s):
        return self.c ** 2 * self.h(s)

    @property
    def reach(self) -> float:
        return 60.0 / self.c
