"""Seeded simulators for stationary sequences and Gaussian-condition checks.

Non-ergodicity is realized as a finite mixture over ergodic components: one
latent component index is drawn per path (from its own named stream) and the
whole path is generated from that component.  The invariant information of a
path is then exactly its latent index, which keeps the conditional marginal
law computable in closed form.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from typing import Optional, Sequence, Union

import numpy as np

from . import rng as _rng
from .core import ConfigurationError, SamplePath
from .kernels import Box

__all__ = [
    "Normal",
    "Uniform",
    "Exponential",
    "EmpiricalLaw",
    "ProductLaw",
    "IID",
    "GaussianAR1",
    "GaussianLinear",
    "Mixture",
    "PairedIndependent",
    "ProcessSpec",
    "marginal_law",
    "simulate",
    "autocovariance",
    "cesaro_absolute_autocovariance",
    "covariance_matrix",
    "min_covariance_determinant",
]


# ---------------------------------------------------------------------------
# Marginal laws


@dataclasses.dataclass(frozen=True)
class Normal:
    mean: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.sigma) and self.sigma > 0):
            raise ConfigurationError(f"normal law needs finite mean and sigma > 0, got mean={self.mean}, sigma={self.sigma}")

    dim = 1
    atomless = True

    @property
    def symmetry_center(self) -> float:
        return self.mean

    @property
    def variance(self) -> float:
        return self.sigma**2

    def sample(self, gen: np.random.Generator, size) -> np.ndarray:
        return gen.normal(self.mean, self.sigma, size=tuple(np.atleast_1d(size)) + (1,))

    def cdf(self, x: float) -> float:
        if x == math.inf:
            return 1.0
        if x == -math.inf:
            return 0.0
        return 0.5 * (1.0 + math.erf((x - self.mean) / (self.sigma * math.sqrt(2.0))))

    def box_probability(self, box: Box) -> Optional[float]:
        (lo, hi), = box.bounds
        return self.cdf(hi) - self.cdf(lo)

    def raw_moment(self, k: int) -> float:
        # E[(mean + sigma Z)^k] via the central moments of Z.
        total = 0.0
        for j in range(0, k + 1, 2):
            double_fact = math.prod(range(j - 1, 0, -2)) if j else 1
            total += math.comb(k, j) * self.mean ** (k - j) * self.sigma**j * double_fact
        return total

    def __str__(self) -> str:
        return f"normal(mean={self.mean:g},sigma={self.sigma:g})"


@dataclasses.dataclass(frozen=True)
class Uniform:
    low: float = 0.0
    high: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.low) and math.isfinite(self.high) and self.low < self.high):
            raise ConfigurationError(f"uniform law needs low < high, got low={self.low}, high={self.high}")

    dim = 1
    atomless = True

    @property
    def symmetry_center(self) -> float:
        return 0.5 * (self.low + self.high)

    @property
    def variance(self) -> float:
        return (self.high - self.low) ** 2 / 12.0

    def sample(self, gen: np.random.Generator, size) -> np.ndarray:
        return gen.uniform(self.low, self.high, size=tuple(np.atleast_1d(size)) + (1,))

    def cdf(self, x: float) -> float:
        if x <= self.low:
            return 0.0
        if x >= self.high:
            return 1.0
        return (x - self.low) / (self.high - self.low)

    def box_probability(self, box: Box) -> Optional[float]:
        (lo, hi), = box.bounds
        return self.cdf(hi) - self.cdf(lo)

    def raw_moment(self, k: int) -> float:
        if k == 0:
            return 1.0
        return (self.high ** (k + 1) - self.low ** (k + 1)) / ((k + 1) * (self.high - self.low))

    def __str__(self) -> str:
        return f"uniform(low={self.low:g},high={self.high:g})"


@dataclasses.dataclass(frozen=True)
class Exponential:
    rate: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0 and math.isfinite(self.shift)):
            raise ConfigurationError(f"exponential law needs rate > 0, got rate={self.rate}")

    dim = 1
    atomless = True
    symmetry_center = None

    @property
    def variance(self) -> float:
        return 1.0 / self.rate**2

    def sample(self, gen: np.random.Generator, size) -> np.ndarray:
        return self.shift + gen.exponential(1.0 / self.rate, size=tuple(np.atleast_1d(size)) + (1,))

    def cdf(self, x: float) -> float:
        if x <= self.shift:
            return 0.0
        if x == math.inf:
            return 1.0
        return 1.0 - math.exp(-self.rate * (x - self.shift))

    def box_probability(self, box: Box) -> Optional[float]:
        (lo, hi), = box.bounds
        return self.cdf(hi) - self.cdf(lo)

    def raw_moment(self, k: int) -> float:
        return sum(
            math.comb(k, j) * self.shift ** (k - j) * math.factorial(j) / self.rate**j
            for j in range(k + 1)
        )

    def __str__(self) -> str:
        return f"exponential(rate={self.rate:g},shift={self.shift:g})"


class EmpiricalLaw:
    """A law backed by a stored sample; draws resample rows with replacement."""

    atomless = False
    symmetry_center = None

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2 or values.shape[0] < 1:
            raise ConfigurationError("an empirical law needs an (n, d) sample")
        self._values = values

    @property
    def dim(self) -> int:
        return self._values.shape[1]

    @property
    def variance(self) -> float:
        if self.dim != 1:
            raise ValueError("variance is defined for 1-D empirical laws only")
        return float(np.var(self._values[:, 0]))

    def sample(self, gen: np.random.Generator, size) -> np.ndarray:
        idx = gen.integers(0, self._values.shape[0], size=tuple(np.atleast_1d(size)))
        return self._values[idx]

    def box_probability(self, box: Box) -> float:
        return float(np.mean(box.contains(self._values)))

    def raw_moment(self, k: int) -> Optional[float]:
        if self.dim != 1:
            return None
        return float(np.mean(self._values[:, 0] ** k))

    def __str__(self) -> str:
        return f"empirical(n={self._values.shape[0]},d={self.dim})"


@dataclasses.dataclass(frozen=True)
class ProductLaw:
    """Independent product of component laws; coordinates are concatenated."""

    laws: tuple

    def __post_init__(self):
        if len(self.laws) < 2:
            raise ConfigurationError("a product law needs at least two components")
        object.__setattr__(self, "laws", tuple(self.laws))

    independent_pair = True
    symmetry_center = None

    @property
    def atomless(self) -> bool:
        return all(getattr(law, "atomless", False) for law in self.laws)

    @property
    def dim(self) -> int:
        return sum(law.dim for law in self.laws)

    def sample(self, gen: np.random.Generator, size) -> np.ndarray:
        return np.concatenate([law.sample(gen, size) for law in self.laws], axis=-1)

    def box_probability(self, box: Box) -> Optional[float]:
        if box.dim != self.dim:
            raise ValueError(f"box dimension {box.dim} does not match law dimension {self.dim}")
        prob = 1.0
        offset = 0
        for law in self.laws:
            sub = Box(box.bounds[offset : offset + law.dim])
            p = law.box_probability(sub)
            if p is None:
                return None
            prob *= p
            offset += law.dim
        return prob

    def raw_moment(self, k: int) -> Optional[float]:
        return None

    def __str__(self) -> str:
        return "product(" + ",".join(str(law) for law in self.laws) + ")"


MarginalLaw = Union[Normal, Uniform, Exponential, EmpiricalLaw, ProductLaw]


# ---------------------------------------------------------------------------
# Process specifications


@dataclasses.dataclass(frozen=True)
class IID:
    marginal: MarginalLaw

    def __str__(self) -> str:
        return f"iid({self.marginal})"


@dataclasses.dataclass(frozen=True)
class GaussianAR1:
    mean: float = 0.0
    rho: float = 0.5
    sigma: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.rho) and abs(self.rho) < 1):
            raise ConfigurationError(f"process.rho must satisfy |rho| < 1 for stationarity, got {self.rho}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ConfigurationError(f"process.sigma must be positive, got {self.sigma}")
        if not math.isfinite(self.mean):
            raise ConfigurationError(f"process.mean must be finite, got {self.mean}")

    @property
    def stationary_variance(self) -> float:
        return self.sigma**2 / (1.0 - self.rho**2)

    def __str__(self) -> str:
        return f"ar1(mean={self.mean:g},rho={self.rho:g},sigma={self.sigma:g})"


@dataclasses.dataclass(frozen=True)
class GaussianLinear:
    """X_t = mean + sum_k c_k eps_{t-k} for iid standard normal innovations."""

    coefficients: tuple[float, ...]
    mean: float = 0.0

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs:
            raise ConfigurationError("process.coefficients must be non-empty")
        if not all(math.isfinite(c) for c in coeffs):
            raise ConfigurationError("process.coefficients must be finite")
        if not math.isfinite(self.mean):
            raise ConfigurationError(f"process.mean must be finite, got {self.mean}")
        object.__setattr__(self, "coefficients", coeffs)

    def __str__(self) -> str:
        cs = ",".join(f"{c:g}" for c in self.coefficients)
        return f"gaussian-linear(mean={self.mean:g},coefficients=[{cs}])"


@dataclasses.dataclass(frozen=True)
class Mixture:
    weights: tuple[float, ...]
    components: tuple

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        components = tuple(self.components)
        if len(weights) != len(components) or not components:
            raise ConfigurationError("process.weights and mixture components must match and be non-empty")
        if any(w < 0 or not math.isfinite(w) for w in weights):
            raise ConfigurationError(f"process.weights must be non-negative, got {weights}")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ConfigurationError(f"process.weights must sum to 1 (tolerance 1e-12), got sum {sum(weights)!r}")
        if any(isinstance(c, Mixture) for c in components):
            raise ConfigurationError("mixture components must be ergodic specs (flatten nested mixtures)")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "components", components)

    def __str__(self) -> str:
        parts = ",".join(f"{w:g}:{c}" for w, c in zip(self.weights, self.components))
        return f"mixture({parts})"


@dataclasses.dataclass(frozen=True)
class PairedIndependent:
    """Two independent stationary coordinate processes observed as pairs."""

    x: object
    y: object

    def __post_init__(self):
        for name, sub in (("x", self.x), ("y", self.y)):
            if isinstance(sub, (Mixture, PairedIndependent)):
                raise ConfigurationError(f"process.{name} of a paired process must be an ergodic scalar spec")

    def __str__(self) -> str:
        return f"paired({self.x};{self.y})"


ProcessSpec = Union[IID, GaussianAR1, GaussianLinear, Mixture, PairedIndependent]


def marginal_law(spec: ProcessSpec) -> MarginalLaw:
    """The stationary marginal law of an ergodic spec."""
    if isinstance(spec, IID):
        return spec.marginal
    if isinstance(spec, GaussianAR1):
        return Normal(spec.mean, math.sqrt(spec.stationary_variance))
    if isinstance(spec, GaussianLinear):
        return Normal(spec.mean, math.sqrt(sum(c * c for c in spec.coefficients)))
    if isinstance(spec, PairedIndependent):
        return ProductLaw((marginal_law(spec.x), marginal_law(spec.y)))
    if isinstance(spec, Mixture):
        raise ValueError("a mixture has no single marginal law; query its components")
    raise ConfigurationError(f"unknown process spec {spec!r}")


def _simulate_coords(spec: ProcessSpec, n: int, gen: np.random.Generator) -> np.ndarray:
    if isinstance(spec, IID):
        return spec.marginal.sample(gen, n)
    if isinstance(spec, GaussianAR1):
        eps = gen.normal(size=n)
        x = np.empty(n, dtype=np.float64)
        x[0] = spec.mean + math.sqrt(spec.stationary_variance) * eps[0]
        centered = x[0] - spec.mean
        for t in range(1, n):
            centered = spec.rho * centered + spec.sigma * eps[t]
            x[t] = spec.mean + centered
        return x.reshape(-1, 1)
    if isinstance(spec, GaussianLinear):
        k = len(spec.coefficients)
        eps = gen.normal(size=n + k - 1)
        x = spec.mean + np.convolve(eps, np.asarray(spec.coefficients), mode="valid")
        return x.reshape(-1, 1)
    raise ConfigurationError(f"cannot simulate spec {spec!r} directly")


def simulate(spec: ProcessSpec, n: int, seed: int) -> SamplePath:
    """Simulate a stationary path; deterministic given (spec, n, seed).

    The AR(1) initial state is drawn from its exact stationary law.  For a
    mixture, the latent component is drawn once (on the latent stream) and
    the whole path comes from that component; the index is recorded on the
    path.  Paired processes use two independent path streams.
    """
    if n < 1:
        raise ConfigurationError(f"path length must be >= 1, got {n}")
    latent: Optional[int] = None
    pair_split: Optional[int] = None
    if isinstance(spec, Mixture):
        u = _rng.generator(seed, _rng.LATENT).random()
        latent = int(np.searchsorted(np.cumsum(spec.weights), u, side="right"))
        latent = min(latent, len(spec.components) - 1)
        active = spec.components[latent]
    else:
        active = spec
    if isinstance(active, PairedIndependent):
        x = _simulate_coords(active.x, n, _rng.generator(seed, _rng.PATH, 0))
        y = _simulate_coords(active.y, n, _rng.generator(seed, _rng.PATH, 1))
        coords = np.concatenate([x, y], axis=1)
        pair_split = x.shape[1]
    else:
        coords = _simulate_coords(active, n, _rng.generator(seed, _rng.PATH))
    return SamplePath(
        coords,
        seed=seed,
        process_id=str(spec),
        latent_component=latent,
        pair_split=pair_split,
    )


# ---------------------------------------------------------------------------
# Analytic second-order structure


def autocovariance(spec: ProcessSpec, lag: int) -> float:
    """Closed-form autocovariance at the given lag (IID and Gaussian families)."""
    lag = abs(int(lag))
    if isinstance(spec, IID):
        return spec.marginal.variance if lag == 0 else 0.0
    if isinstance(spec, GaussianAR1):
        return spec.rho**lag * spec.stationary_variance
    if isinstance(spec, GaussianLinear):
        c = spec.coefficients
        return float(sum(c[j] * c[j + lag] for j in range(len(c) - lag))) if lag < len(c) else 0.0
    if isinstance(spec, Mixture):
        raise ValueError("autocovariance of a mixture is not defined; query its components")
    raise ValueError(f"autocovariance is not available for {type(spec).__name__}")


def cesaro_absolute_autocovariance(spec: ProcessSpec, n_terms: int) -> float:
    """The Cesaro average (1/N) sum_{i=1}^{N} |Cov(X_0, X_i)|.

    Decay to 0 as N grows is the ergodicity criterion for stationary
    Gaussian sequences.
    """
    if n_terms < 1:
        raise ValueError(f"n_terms must be >= 1, got {n_terms}")
    return math.fsum(abs(autocovariance(spec, i)) for i in range(1, n_terms + 1)) / n_terms


def covariance_matrix(spec: ProcessSpec, indices: Sequence[int]) -> np.ndarray:
    """Covariance matrix of (X_{i_1}, ..., X_{i_m}) for increasing indices."""
    idx = [int(i) for i in indices]
    if not idx:
        raise ValueError("at least one index is required")
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError(f"indices must be strictly increasing, got {idx}")
    gamma = {}
    mat = np.empty((len(idx), len(idx)), dtype=np.float64)
    for a, ia in enumerate(idx):
        for b, ib in enumerate(idx):
            lag = abs(ia - ib)
            if lag not in gamma:
                gamma[lag] = autocovariance(spec, lag)
            mat[a, b] = gamma[lag]
    return mat


def min_covariance_determinant(spec: ProcessSpec, m: int, max_lag: int = 64) -> float:
    """Minimum det Cov(X_{i_1}, ..., X_{i_m}) over tuples of span <= max_lag.

    By stationarity only the gap pattern matters, so scanning all increasing
    tuples starting at 0 with total span <= max_lag is exhaustive up to
    translation.  For AR(1) the autocovariance decays geometrically and the
    infimum is attained at the smallest gaps, so the scan certifies the
    condition; for general linear coefficients the result is a
    window-limited check.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if max_lag < m - 1:
        raise ValueError(f"max_lag must be >= m - 1 = {m - 1}, got {max_lag}")
    if m == 1:
        return autocovariance(spec, 0)
    best = math.inf
    for offsets in itertools.combinations(range(1, max_lag + 1), m - 1):
        det = float(np.linalg.det(covariance_matrix(spec, (0,) + offsets)))
        if det < best:
            best = det
    return best
