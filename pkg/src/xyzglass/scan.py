"""Parameter sweeps, constructive-interference (Venus) windows and the critical field."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .model import Boundary, Disorder, DisorderCase, ModelParams
from .quench import (EnhancementRecord, QuenchSettings, enhancement_record, ordered_reference,
                     quenched_average)

log = logging.getLogger(__name__)

VARIANTS = (Disorder.BOTH, Disorder.PLANAR, Disorder.AZIMUTHAL)


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    steps: int

    def __post_init__(self):
        if self.name not in ("lam", "mu"):
            raise ValueError(f"axis name must be 'lam' or 'mu', got {self.name!r}")
        if self.steps < 2:
            raise ValueError(f"axis {self.name} needs at least 2 steps")
        if not self.min < self.max:
            raise ValueError(f"axis {self.name} needs min < max")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)


@dataclass(frozen=True)
class GridSpec:
    """A 1-D or 2-D sweep of the mean couplings for one disorder case.

    ``case`` fixes the variant, the sigmas and the value of whichever mean
    is not swept.
    """

    params: ModelParams
    case: DisorderCase
    axis1: Axis
    axis2: Axis | None = None

    def __post_init__(self):
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise ValueError("the two axes must sweep different means")

    def points(self):
        axes = [self.axis1] + ([self.axis2] if self.axis2 else [])
        grids = np.meshgrid(*[a.values for a in axes], indexing="ij")
        for idx in np.ndindex(grids[0].shape):
            yield idx, {a.name: float(g[idx]) for a, g in zip(axes, grids)}


@dataclass
class GridPoint:
    index: tuple
    coords: dict
    record: EnhancementRecord | None
    error: str | None = None


def grid_scan(spec: GridSpec, settings: QuenchSettings, site=None, pair=None,
              progress=None) -> list[GridPoint]:
    """Enhancement scores of every observable at every grid point, in grid order."""
    out = []
    points = list(spec.points())
    for n, (idx, coords) in enumerate(points):
        case = replace(spec.case, **coords)
        try:
            ref = ordered_reference(spec.params, case.lam, case.mu, settings, site, pair)
            q = quenched_average(spec.params, case, settings, site, pair)
            out.append(GridPoint(idx, coords, enhancement_record(q, ref, case.variant.value)))
        except (RuntimeError, ValueError, np.linalg.LinAlgError) as err:
            log.error("grid point %s failed: %s", coords, err)
            out.append(GridPoint(idx, coords, None, str(err)))
        if progress:
            progress(n + 1, len(points))
    return out


@dataclass
class LineScan:
    """Enhancement scores along alpha for the three disorder variants.

    alpha is <lam> where J is random and the fixed lam otherwise; all three
    share the ordered reference at (alpha, mu).
    """

    params: ModelParams
    alphas: np.ndarray
    mu: float
    records: dict = field(default_factory=dict)
    ordered: list = field(default_factory=list)

    def curve(self, variant, observable="ggm"):
        """(delta, stderr) arrays of one variant's enhancement score."""
        recs = self.records[Disorder(variant)]
        delta = np.array([r.delta[observable] for r in recs])
        stderr = np.array([r.quenched[observable].stderr for r in recs])
        return delta, stderr

    def curves(self, observable="ggm"):
        return {v: self.curve(v, observable) for v in VARIANTS}


def line_scan(params: ModelParams, alphas, mu: float, settings: QuenchSettings,
              sigma_J: float = 1.0, sigma_delta: float = 1.0, variants=VARIANTS,
              site=None, pair=None, progress=None) -> LineScan:
    alphas = np.asarray(alphas, dtype=float)
    scan = LineScan(params, alphas, mu, {Disorder(v): [] for v in variants})
    total = len(alphas) * len(variants)
    done = 0
    for a in alphas:
        ref = ordered_reference(params, a, mu, settings, site, pair)
        scan.ordered.append(ref)
        for v in variants:
            case = DisorderCase(v, a, mu, sigma_J, sigma_delta)
            q = quenched_average(params, case, settings, site, pair)
            scan.records[Disorder(v)].append(enhancement_record(q, ref, case.variant.value))
            done += 1
            if progress:
                progress(done, total)
    return scan


@dataclass
class VenusRegion:
    intervals: list
    alphas: np.ndarray
    curves: dict

    def __bool__(self):
        return bool(self.intervals)

    def midpoints(self):
        return [0.5 * (lo + hi) for lo, hi in self.intervals]


def _margin(stderr, eps_abs, k):
    return np.maximum(eps_abs, k * np.asarray(stderr, dtype=float))


def detect_venus(alphas, curves: dict, eps_abs: float = 1e-4, k: float = 2.0) -> VenusRegion:
    """Maximal runs of alpha where joint disorder helps but each single disorder hurts.

    ``curves`` maps the variants both/planar/azimuthal to (delta, stderr)
    arrays on the common ``alphas`` grid (stderr may be None). A score counts
    as positive (negative) only beyond max(eps_abs, k * stderr).
    """
    alphas = np.asarray(alphas, dtype=float)

    def get(v):
        d, se = curves[Disorder(v)] if Disorder(v) in curves else curves[v]
        d = np.asarray(d, dtype=float)
        se = np.zeros_like(d) if se is None else np.asarray(se, dtype=float)
        return d, _margin(se, eps_abs, k)

    d_both, e_both = get(Disorder.BOTH)
    d_pl, e_pl = get(Disorder.PLANAR)
    d_az, e_az = get(Disorder.AZIMUTHAL)
    ok = (d_both > e_both) & (d_pl < -e_pl) & (d_az < -e_az)
    intervals = []
    start = None
    for n, flag in enumerate(ok):
        if flag and start is None:
            start = n
        if start is not None and (not flag or n == len(ok) - 1):
            stop = n if flag else n - 1
            intervals.append((float(alphas[start]), float(alphas[stop])))
            start = None
    return VenusRegion(intervals, alphas, dict(curves))


def venus_from_scan(scan: LineScan, observable="ggm", eps_abs=1e-4, k=2.0) -> VenusRegion:
    return detect_venus(scan.alphas, scan.curves(observable), eps_abs, k)


@dataclass
class CriticalFieldResult:
    h_c: float
    bracket: tuple
    N: int
    probes: list = field(default_factory=list)


def critical_field(N: int, gamma: float, delta_mean: float, alphas, h_range,
                   settings: QuenchSettings, boundary=Boundary.PERIODIC, tol: float = 0.05,
                   observable: str = "ggm", eps_abs: float = 1e-4, k: float = 2.0,
                   coupling_sigma: float | None = None, progress=None) -> CriticalFieldResult:
    """Bisect on h for the onset of Venus windows inside ``alphas``.

    ``delta_mean`` is the mean zz coupling itself, held fixed while h varies,
    so the dimensionless mean is mu = delta_mean / h at each probe. Likewise
    ``coupling_sigma``, when given, is the spread of the couplings J_b and
    delta_b and becomes sigma_J = sigma_delta = coupling_sigma / h; otherwise
    both dimensionless sigmas are 1.
    """
    h_lo, h_hi = map(float, h_range)
    if not h_lo < h_hi:
        raise ValueError("h range must satisfy h_low < h_high")
    probes = []

    def has_venus(h):
        params = ModelParams(N, gamma, h, boundary)
        sigma = 1.0 if coupling_sigma is None else coupling_sigma / h
        scan = line_scan(params, alphas, delta_mean / h, settings, sigma, sigma)
        region = venus_from_scan(scan, observable, eps_abs, k)
        probes.append((h, region.intervals))
        if progress:
            progress(h, region.intervals)
        return bool(region)

    if not has_venus(h_hi):
        raise ValueError(f"no Venus window at h_high={h_hi}; range does not bracket h_c")
    if has_venus(h_lo):
        raise ValueError(f"Venus window already present at h_low={h_lo}; range does not bracket h_c")
    while h_hi - h_lo > tol:
        mid = 0.5 * (h_lo + h_hi)
        if has_venus(mid):
            h_hi = mid
        else:
            h_lo = mid
    return CriticalFieldResult(h_hi, (h_lo, h_hi), N, probes)
