"""
Potentials Module for adiabat

Static external potentials (harmonic, random Fourier, tabulated) plus the
linear electric-field ramp -p*t*x, the seeded coefficient generator, and the
"key = value" potential file format.

Operations included:
- evaluate: V(x, t) = V_static(x) - p*t*x on a grid
- generate_random: seeded random-Fourier potential
- reflect_and_scale: mirror a random-Fourier potential and divide its Fourier part
- microwell_occupation: density weight held by each basin of the static potential
- write_potential / read_potential: potential files
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from dotenv import dotenv_values
from scipy.signal import find_peaks

from errors import ConfigError, GridMismatchError
from grid import DensityProfile, Grid, read_field_csv, write_field_csv

potentials_logger = logging.getLogger("AdiabatPotentials")

N_FOURIER_MODES = 3
CONFINEMENT_POWER = 10
CONFINEMENT_SCALE = 1e11

# ─── Deterministic Generator ────────────────────────────────────────────────

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 stream: the coefficient generator shared by every implementation.

    The sequence for a given seed must never change; bundled systems and stored
    experiments are regenerated from it.
    """

    GOLDEN_GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed: int = 0):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + SplitMix64.GOLDEN_GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_double(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.next_double()


# ─── Potential Specs ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Harmonic:
    omega: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"Harmonic frequency must be positive, got {self.omega}")


@dataclass(frozen=True)
class RandomFourier:
    """x^10/10^11 confinement plus a scaled three-mode Fourier series."""

    scale: float
    half_width: float
    a: Tuple[float, float, float]
    b: Tuple[float, float, float]
    seed: Optional[int] = None

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError(f"Half width must be positive, got {self.half_width}")
        if len(self.a) != N_FOURIER_MODES or len(self.b) != N_FOURIER_MODES:
            raise ValueError(f"Need exactly {N_FOURIER_MODES} cosine and sine coefficients")
        bound = self.half_width / 3.0
        for name, coeffs in (("a", self.a), ("b", self.b)):
            for n, c in enumerate(coeffs, start=1):
                if abs(c) > bound:
                    raise ValueError(f"Coefficient {name}{n}={c} outside [-{bound}, {bound}]")
        object.__setattr__(self, "a", tuple(float(c) for c in self.a))
        object.__setattr__(self, "b", tuple(float(c) for c in self.b))


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Static potential sampled on a specific grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.shape != (self.grid.n_points,):
            raise ValueError(f"Tabulated potential needs {self.grid.n_points} values, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("Tabulated potential has non-finite values")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)


Variant = Union[Harmonic, RandomFourier, Tabulated]


@dataclass(frozen=True)
class PotentialSpec:
    variant: Variant
    ramp_rate: float = 0.0
    name: str = ""

    def with_ramp(self, ramp_rate: float) -> "PotentialSpec":
        return replace(self, ramp_rate=float(ramp_rate))

    @property
    def seed(self) -> Optional[int]:
        return getattr(self.variant, "seed", None)

    def label(self) -> str:
        if self.name:
            return self.name
        v = self.variant
        if isinstance(v, Harmonic):
            return f"harmonic(omega={v.omega:g})"
        if isinstance(v, RandomFourier):
            return f"random(seed={v.seed}, lambda={v.scale:g})"
        return "tabulated"


# ─── Evaluation ─────────────────────────────────────────────────────────────


def confinement(x: np.ndarray) -> np.ndarray:
    return x ** CONFINEMENT_POWER / CONFINEMENT_SCALE


def fourier_part(variant: RandomFourier, x: np.ndarray) -> np.ndarray:
    total = np.zeros_like(x, dtype=np.float64)
    for n in range(1, N_FOURIER_MODES + 1):
        k = n * np.pi / variant.half_width
        total += variant.a[n - 1] * np.cos(k * x) + variant.b[n - 1] * np.sin(k * x)
    return variant.scale * total


def static_part(spec: PotentialSpec, grid: Grid) -> np.ndarray:
    x = grid.points
    v = spec.variant
    if isinstance(v, Harmonic):
        return 0.5 * v.omega ** 2 * x ** 2
    if isinstance(v, RandomFourier):
        return confinement(x) + fourier_part(v, x)
    if v.grid != grid:
        raise GridMismatchError(f"Tabulated potential lives on {v.grid.describe()}, not {grid.describe()}")
    return np.array(v.values)


def evaluate(spec: PotentialSpec, grid: Grid, t: float) -> np.ndarray:
    """External potential at time t including the field ramp."""
    values = static_part(spec, grid)
    if spec.ramp_rate != 0.0:
        values = values - spec.ramp_rate * t * grid.points
    return values


# ─── Construction ───────────────────────────────────────────────────────────


def generate_random(seed: int, scale: float, half_width: float) -> PotentialSpec:
    """Random-Fourier potential with coefficients drawn uniformly in [-L/3, L/3].

    Draw order is a1, a2, a3, b1, b2, b3 from SplitMix64(seed).
    """
    if scale < 0:
        raise ValueError(f"Scale must be nonnegative, got {scale}")
    if not half_width > 0:
        raise ValueError(f"Half width must be positive, got {half_width}")
    rng = SplitMix64(seed)
    bound = half_width / 3.0
    draws = [rng.uniform(-bound, bound) for _ in range(2 * N_FOURIER_MODES)]
    variant = RandomFourier(
        scale=float(scale),
        half_width=float(half_width),
        a=tuple(draws[:N_FOURIER_MODES]),
        b=tuple(draws[N_FOURIER_MODES:]),
        seed=int(seed),
    )
    potentials_logger.debug(f"Generated random potential seed={seed} a={variant.a} b={variant.b}")
    return PotentialSpec(variant)


def reflect_and_scale(spec: PotentialSpec, factor: float) -> PotentialSpec:
    """Fourier part becomes V_F(-x)/factor; the x^10 confinement is untouched."""
    if not isinstance(spec.variant, RandomFourier):
        raise ValueError("reflect_and_scale needs a random-Fourier potential")
    if factor == 0:
        raise ValueError("Scaling factor must be nonzero")
    v = spec.variant
    mirrored = RandomFourier(
        scale=v.scale / factor,
        half_width=v.half_width,
        a=v.a,
        b=tuple(-c for c in v.b),
        seed=None,
    )
    return replace(spec, variant=mirrored, name="")


# ─── Microwells ─────────────────────────────────────────────────────────────


def microwell_occupation(spec: PotentialSpec, grid: Grid, density: DensityProfile) -> np.ndarray:
    """Density weight in each basin of the static potential, left to right.

    Basins are separated at the local maxima of the static potential.
    """
    v = static_part(spec, grid)
    peaks, _ = find_peaks(v)
    edges = [0, *peaks.tolist(), grid.n_points - 1]
    weights = [
        float(grid.integrate(density.values[start:stop + 1]))
        for start, stop in zip(edges[:-1], edges[1:])
    ]
    return np.array(weights)


# ─── Potential Files ────────────────────────────────────────────────────────


def write_potential(path: Union[str, Path], spec: PotentialSpec) -> Path:
    """Write a potential file; floats use repr so they read back bit-exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    v = spec.variant
    lines = []
    if spec.name:
        lines.append(f"name = {spec.name}")
    if isinstance(v, Harmonic):
        lines += ["variant = harmonic", f"omega = {v.omega!r}"]
    elif isinstance(v, RandomFourier):
        lines += ["variant = random_fourier", f"lambda = {v.scale!r}", f"L = {v.half_width!r}"]
        lines += [f"a{n} = {c!r}" for n, c in enumerate(v.a, start=1)]
        lines += [f"b{n} = {c!r}" for n, c in enumerate(v.b, start=1)]
        if v.seed is not None:
            lines.append(f"seed = {v.seed}")
    else:
        values_path = path.with_suffix(".csv")
        write_field_csv(values_path, v.grid, v.values)
        lines += [
            "variant = tabulated",
            f"x_min = {v.grid.x_min!r}",
            f"x_max = {v.grid.x_max!r}",
            f"n_points = {v.grid.n_points}",
            f"values = {values_path.name}",
        ]
    lines.append(f"p = {float(spec.ramp_rate)!r}")
    path.write_text("\n".join(lines) + "\n")
    potentials_logger.info(f"Wrote potential {spec.label()} to {path}")
    return path


def _require(doc: dict, key: str, path: Path) -> str:
    value = doc.get(key)
    if value is None or value == "":
        raise ConfigError(f"{path}: missing '{key}'", fields=(key,))
    return value


def _number(doc: dict, key: str, path: Path, cast=float):
    raw = _require(doc, key, path)
    try:
        return cast(raw)
    except ValueError:
        raise ConfigError(f"{path}: '{key}' is not a valid number: {raw!r}", fields=(key,))


def read_potential(path: Union[str, Path]) -> PotentialSpec:
    """Read a potential file. A random-Fourier file holding only a seed is regenerated."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Potential file not found: {path}", fields=("potential",))
    doc = dotenv_values(path)
    variant = _require(doc, "variant", path)
    ramp = _number(doc, "p", path) if doc.get("p") else 0.0
    name = doc.get("name") or ""
    try:
        if variant == "harmonic":
            spec = PotentialSpec(Harmonic(_number(doc, "omega", path)))
        elif variant == "random_fourier":
            scale = _number(doc, "lambda", path)
            half_width = _number(doc, "L", path)
            coeff_keys = [f"a{n}" for n in range(1, 4)] + [f"b{n}" for n in range(1, 4)]
            if all(doc.get(k) for k in coeff_keys):
                coeffs = [_number(doc, k, path) for k in coeff_keys]
                seed = _number(doc, "seed", path, int) if doc.get("seed") else None
                spec = PotentialSpec(RandomFourier(scale, half_width, tuple(coeffs[:3]), tuple(coeffs[3:]), seed))
            else:
                spec = generate_random(_number(doc, "seed", path, int), scale, half_width)
        elif variant == "tabulated":
            grid = Grid(_number(doc, "x_min", path), _number(doc, "x_max", path), _number(doc, "n_points", path, int))
            xs, values = read_field_csv(path.parent / _require(doc, "values", path))
            if xs.size != grid.n_points:
                raise ConfigError(f"{path}: values file has {xs.size} rows, grid has {grid.n_points}", fields=("values",))
            spec = PotentialSpec(Tabulated(grid, values))
        else:
            raise ConfigError(f"{path}: unknown variant {variant!r}", fields=("variant",))
    except ValueError as e:
        raise ConfigError(f"{path}: {e}", fields=("variant",))
    return replace(spec, ramp_rate=ramp, name=name)
