"""Catalog of supersmooth kernels and densities with spectral decay laws.

Families are addressable by string id (``"gaussian:1.0"``,
``"stable:1.5:1.0"``, ...).  Where a closed-form Fourier transform exists
the grid function is built spectrally, so that e.g. a compactly
band-limited density is *exactly* invariant under band-limiting at or
above its spectral support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import CutoffAboveNyquist, InvalidP, InvalidShape, ScaleTooSmall, UnknownFamily
from .gridfn import (
    DEFAULT_HALF_WIDTH,
    DEFAULT_N_POINTS,
    GridFunction,
    _grid_arrays,
    apply_multiplier,
    lp_norm,
)

FAMILIES = ("gaussian", "cauchy", "stable", "student_t", "fvp", "sinc", "superkernel")


@dataclass(frozen=True)
class SupersmoothClass:
    """Spectral-decay class parameters (rho, r, L) plus the support bound.

    ``integral_bound = 2*pi*L`` dominates the truncated decay integral
    ``int exp(2(rho|t|)^r) |fhat|^2 dt`` on the grid; ``spectral_support``
    is finite for band-limited densities and ``inf`` otherwise.
    """

    rho: float
    r: float
    L: float
    spectral_support: float = math.inf

    def decay_integral(self, f: GridFunction) -> float:
        """Truncated value of the weighted spectral energy integral."""
        t = f.freqs()
        dt = 2.0 * math.pi / (f.n_points * f.dx)
        w = np.exp(np.minimum(2.0 * (self.rho * np.abs(t)) ** self.r, 700.0))
        return float((w * np.abs(f.spectrum) ** 2).sum() * dt)

    def envelope(self, t) -> np.ndarray:
        return np.exp(-((self.rho * np.abs(t)) ** self.r))


@dataclass(frozen=True)
class KernelSpec:
    """Kernel/density family identifier plus scale.

    ``shape`` holds the family-specific parameter: the stable exponent r,
    the Student-t degrees of freedom, or the superkernel (flat, cutoff)
    pair packed as a tuple.
    """

    family: str
    scale: float = 1.0
    shape: Optional[object] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UnknownFamily(f"unknown kernel family {self.family!r}")
        if not self.scale > 0:
            raise ScaleTooSmall("scale must be positive")
        if self.family == "stable":
            r = self.shape
            if r is None or not 0 < float(r) <= 2:
                raise InvalidShape("stable exponent must lie in (0, 2]")
        if self.family == "student_t":
            nu = self.shape
            if nu is None or not float(nu) > 0:
                raise InvalidShape("student_t needs positive degrees of freedom")
        if self.family == "superkernel":
            flat, cutoff = self.shape if self.shape is not None else (1.0, 2.0)
            if not 0 < flat < cutoff:
                raise InvalidShape("superkernel needs 0 < flat < cutoff")
            object.__setattr__(self, "shape", (float(flat), float(cutoff)))

    # -- closed forms ---------------------------------------------------

    def char_fn(self) -> Optional[Callable[[np.ndarray], np.ndarray]]:
        """Closed-form Fourier transform under fhat(t) = int e^{itx} f dx."""
        s = self.scale
        if self.family == "gaussian":
            return lambda t: np.exp(-((s * t) ** 2) / 2.0)
        if self.family == "cauchy":
            return lambda t: np.exp(-s * np.abs(t))
        if self.family == "stable":
            r = float(self.shape)
            return lambda t: np.exp(-((s * np.abs(t)) ** r))
        if self.family == "fvp":
            return lambda t: np.clip(1.0 - s * np.abs(t), 0.0, None)
        if self.family == "sinc":
            return lambda t: (np.abs(t) <= 1.0 / s).astype(float)
        if self.family == "superkernel":
            flat, cutoff = self.shape
            return lambda t: _trapezoid(np.abs(t) * s, flat, cutoff)
        return None  # student_t: computed numerically from the density

    def density_fn(self) -> Optional[Callable[[np.ndarray], np.ndarray]]:
        s = self.scale
        if self.family == "gaussian":
            return lambda x: np.exp(-(x / s) ** 2 / 2.0) / (s * math.sqrt(2 * math.pi))
        if self.family == "cauchy":
            return lambda x: s / (math.pi * (x ** 2 + s ** 2))
        if self.family == "student_t":
            nu = float(self.shape)
            c = math.gamma((nu + 1) / 2) / (math.sqrt(nu * math.pi) * math.gamma(nu / 2))
            return lambda x: (c / s) * (1.0 + (x / s) ** 2 / nu) ** (-(nu + 1) / 2)
        if self.family == "fvp":
            return lambda x: _fvp_density(x / s) / s
        if self.family == "sinc":
            return lambda x: _sinc(x / s) / s
        if self.family == "superkernel":
            flat, cutoff = self.shape
            return lambda x: _superkernel_density(x / s, flat, cutoff) / s
        return None  # stable: no closed form for general r

    def supersmooth_parameters(self) -> tuple[float, float, float]:
        """(rho, r, spectral_support) of the scaled kernel's decay law."""
        s = self.scale
        if self.family == "gaussian":
            return s / math.sqrt(2.0), 2.0, math.inf
        if self.family == "cauchy":
            return s, 1.0, math.inf
        if self.family == "stable":
            return s, float(self.shape), math.inf
        if self.family == "student_t":
            # asymptotic envelope exp(-sqrt(nu) s |t|), Hurst's formula
            return s * math.sqrt(float(self.shape)), 1.0, math.inf
        if self.family == "fvp":
            return s, 1.0, 1.0 / s
        if self.family == "sinc":
            return s, 1.0, 1.0 / s
        if self.family == "superkernel":
            return s, 1.0, self.shape[1] / s
        raise UnknownFamily(self.family)

    def id(self) -> str:
        if self.family == "stable":
            return f"stable:{float(self.shape):g}:{self.scale:g}"
        if self.family == "student_t":
            return f"student_t:{float(self.shape):g}:{self.scale:g}"
        if self.family == "superkernel":
            flat, cutoff = self.shape
            return f"superkernel:{flat:g}:{cutoff:g}:{self.scale:g}"
        return f"{self.family}:{self.scale:g}"


def parse_kernel_id(text: str) -> KernelSpec:
    """Parse ids like ``gaussian:1.0``, ``stable:1.5:1.0``, ``superkernel:1:2:1``."""
    parts = text.strip().split(":")
    family = parts[0]
    args = [float(p) for p in parts[1:]]
    if family in ("gaussian", "cauchy", "fvp", "sinc"):
        return KernelSpec(family, args[0] if args else 1.0)
    if family == "stable":
        if not args:
            raise UnknownFamily("stable needs an exponent, e.g. stable:1.5:1.0")
        return KernelSpec(family, args[1] if len(args) > 1 else 1.0, shape=args[0])
    if family == "student_t":
        if not args:
            raise UnknownFamily("student_t needs degrees of freedom")
        return KernelSpec(family, args[1] if len(args) > 1 else 1.0, shape=args[0])
    if family == "superkernel":
        flat, cutoff = (args[0], args[1]) if len(args) >= 2 else (1.0, 2.0)
        scale = args[2] if len(args) > 2 else 1.0
        return KernelSpec(family, scale, shape=(flat, cutoff))
    raise UnknownFamily(f"unknown kernel family {family!r}")


def _sinc(x: np.ndarray) -> np.ndarray:
    """(sin x)/(pi x) continued with 1/pi at the origin."""
    return np.sinc(np.asarray(x, dtype=float) / math.pi) / math.pi


def _fvp_density(x: np.ndarray) -> np.ndarray:
    half = np.asarray(x, dtype=float) / 2.0
    core = np.sinc(half / math.pi)  # sin(h)/h with the removable singularity
    return core ** 2 / (2.0 * math.pi)


def _superkernel_density(x: np.ndarray, flat: float, cutoff: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-8
    xs = np.where(small, 1.0, x)
    out = (np.cos(flat * xs) - np.cos(cutoff * xs)) / (math.pi * (cutoff - flat) * xs ** 2)
    out[small] = (cutoff + flat) / (2.0 * math.pi)
    return out


def _trapezoid(a: np.ndarray, flat: float, cutoff: float) -> np.ndarray:
    return np.clip((cutoff - a) / (cutoff - flat), 0.0, 1.0)


def kernel_grid(
    spec: KernelSpec,
    half_width: float = DEFAULT_HALF_WIDTH,
    n_points: int = DEFAULT_N_POINTS,
) -> GridFunction:
    """Materialize a kernel/density on the grid.

    Built from the closed-form transform when one exists (the values are
    then the exact periodization of the density); Student-t is sampled in
    the x-domain and its transform computed by DFT.
    """
    dx = 2.0 * half_width / n_points
    if spec.scale < 4.0 * dx:
        raise ScaleTooSmall(
            f"scale {spec.scale:g} below grid resolution 4*dx = {4 * dx:g}"
        )
    char = spec.char_fn()
    if char is not None:
        t = _grid_arrays(half_width, n_points)[1]
        nyq = math.pi / dx
        _, _, support = spec.supersmooth_parameters()
        if math.isfinite(support) and support > nyq:
            raise CutoffAboveNyquist(
                f"spectral support {support:g} exceeds Nyquist {nyq:g}"
            )
        return GridFunction.from_spectrum(half_width, n_points, char(t))
    density = spec.density_fn()
    f = GridFunction.from_callable(half_width, n_points, density)
    # no closed-form transform: renormalize away the truncated tail mass
    # so the grid object is a proper density (student_t tails are polynomial)
    return GridFunction(half_width, f.values / f.integral())


def supersmooth_class(
    spec: KernelSpec, f: Optional[GridFunction] = None
) -> SupersmoothClass:
    """Decay class of a cataloged density, with L fitted from the grid.

    L is the truncated decay integral divided by 2*pi (so the defining
    inequality holds on the grid by construction); for band-limited
    families the integral is finite independent of the grid.
    """
    rho, r, support = spec.supersmooth_parameters()
    if f is None:
        f = kernel_grid(spec)
    cls = SupersmoothClass(rho=rho, r=r, L=1.0, spectral_support=support)
    L = cls.decay_integral(f) / (2.0 * math.pi)
    return SupersmoothClass(rho=rho, r=r, L=L, spectral_support=support)


def build_superkernel(
    flat: float = 1.0,
    cutoff: float = 2.0,
    half_width: float = DEFAULT_HALF_WIDTH,
    n_points: int = DEFAULT_N_POINTS,
) -> GridFunction:
    """Trapezoidal-spectrum superkernel: Shat = 1 on [-flat, flat], linear
    decay to 0 at +-cutoff, 0 beyond.

    Closed form ``(cos(flat x) - cos(cutoff x)) / (pi (cutoff-flat) x^2)``;
    real, symmetric, integral exactly 1 on the grid.
    """
    if not 0 < flat < cutoff:
        raise InvalidShape("superkernel needs 0 < flat < cutoff")
    return kernel_grid(KernelSpec("superkernel", 1.0, (flat, cutoff)), half_width, n_points)


def smoothing_multiplier(kernel: Optional[KernelSpec], sigma: float, t: np.ndarray) -> np.ndarray:
    """Spectral multiplier of convolution with ``kernel_sigma``.

    ``kernel=None`` selects the sinc kernel (band indicator at 1/sigma).
    """
    if kernel is None or kernel.family == "sinc":
        return (np.abs(t) <= 1.0 / sigma).astype(float)
    if kernel.family == "superkernel":
        flat, cutoff = kernel.shape
        return _trapezoid(sigma * np.abs(t), flat, cutoff)
    char = KernelSpec(kernel.family, sigma, kernel.shape).char_fn()
    if char is None:
        raise UnknownFamily(f"no spectral form for {kernel.family}")
    return char(t)


def sinc_approx_error(
    f: GridFunction,
    cls: SupersmoothClass,
    sigma: float,
    p: float,
    kernel: Optional[KernelSpec] = None,
) -> float:
    """L^p distance between f and its sinc (or superkernel) smoothing.

    The caller-side law: the returned error is bounded by
    ``C * exp(-alpha (rho/sigma)^r)`` for sigma small, and vanishes
    identically once ``1/sigma`` covers a finite spectral support.
    For the sinc kernel only p in [2, inf] is controlled; a superkernel
    extends the law to p in [1, 2).
    """
    if 1.0 / sigma > f.nyquist:
        raise CutoffAboveNyquist(f"1/sigma = {1/sigma:g} beyond Nyquist {f.nyquist:g}")
    sinc_like = kernel is None or kernel.family == "sinc"
    if p < 2 and sinc_like and not cls.spectral_support < math.inf:
        raise InvalidP("sinc approximation controls only p >= 2; pass a superkernel")
    t = f.freqs()
    mult = smoothing_multiplier(kernel, sigma, t)
    smoothed = apply_multiplier(f, mult)
    return lp_norm(smoothed - f, p)


def sinc_quadratic_variation(n_extrema: int) -> float:
    """Partial quadratic-variation sum of sinc over its extrema.

    Sums ``(sinc(x_k) - sinc(x_{k-1}))^2`` over ``x_k = (2k+1) pi / 2``,
    ``k = 1..n``; nondecreasing in n and bounded (tail like sum 1/k^2).
    """
    if n_extrema < 1:
        raise ValueError("need at least one extremum")
    k = np.arange(0, n_extrema + 1)
    vals = _sinc((2 * k + 1) * math.pi / 2.0)
    return float(((vals[1:] - vals[:-1]) ** 2).sum())


# ---------------------------------------------------------------------
# density catalog for experiments (truths with known decay/tail classes)


@dataclass(frozen=True)
class CatalogDensity:
    """A cataloged truth: grid function plus its decay and tail parameters.

    ``tail_rate``/``tail_power`` describe the sub-exponential tail bound
    ``f0(x) <= M exp(-tail_rate |x|^tail_power)`` when one holds
    (``tail_power = 0`` marks polynomial tails).
    """

    name: str
    f: GridFunction
    smooth: SupersmoothClass
    tail_rate: float = 0.0
    tail_power: float = 0.0
    mixing_atoms: tuple = ()
    mixing_weights: tuple = ()


def catalog_density(
    name: str,
    half_width: float = DEFAULT_HALF_WIDTH,
    n_points: int = DEFAULT_N_POINTS,
) -> CatalogDensity:
    """Resolve a density id into a CatalogDensity with class parameters."""
    spec = parse_kernel_id(name)
    f = kernel_grid(spec, half_width, n_points)
    cls = supersmooth_class(spec, f)
    tail_rate, tail_power = 0.0, 0.0
    mixing_atoms, mixing_weights = (), ()
    if spec.family == "gaussian":
        tail_rate, tail_power = 1.0 / (2.0 * spec.scale ** 2), 2.0
        mixing_atoms, mixing_weights = (0.0,), (1.0,)
    return CatalogDensity(
        name=spec.id(),
        f=f,
        smooth=cls,
        tail_rate=tail_rate,
        tail_power=tail_power,
        mixing_atoms=mixing_atoms,
        mixing_weights=mixing_weights,
    )
