"""Amplification factors, stability-region rasters and A-stability probes.

Everything here works on u' = lam u with dt = 1 and u(0) = 1, so one step
of a scheme is a rational function Am(lam).  The heavy lifting is done by
the kernel from ``kernels`` (compiled when available).
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .radau import operators
from .schemes import SchemeConfig

DEFAULT_RE = (-15.0, 5.0)
DEFAULT_IM = (-15.0, 15.0)
DEFAULT_RESOLUTION = (600, 600)
PROBE_TOL = 1e-8
_BIG = np.finfo(float).max


def _kernel_setup(config: SchemeConfig):
    ops = operators(config.degree)
    offset = -(ops.Linv @ ops.boundary)
    variant = kernels.EXDG if config.variant == "ExDG" else kernels.SPLIT_SDG
    if config.init == "constant":
        init = kernels.CONSTANT
    elif config.implicit:
        init = kernels.IMPLICIT_MARCH
    else:
        init = kernels.EXPLICIT_MARCH
    theta = config.theta if config.variant == "ImSDG-theta" else 1.0
    return ops, offset, variant, init, theta


def amplification_split(config: SchemeConfig, lam_n, lam_s, kernel=None):
    """Am for lam = lam_n + lam_s with lam_n treated explicitly, lam_s implicitly.

    Arrays broadcast; the result has their common shape.  ExDG uses the
    sum.  Non-finite values (a node solve dividing by zero) are returned
    as they come out of the kernel.
    """
    kernel = kernel or kernels.amplification
    ops, offset, variant, init, theta = _kernel_setup(config)
    ln, ls = np.broadcast_arrays(np.asarray(lam_n, dtype=complex),
                                 np.asarray(lam_s, dtype=complex))
    shape = ln.shape
    ln = np.ascontiguousarray(ln.ravel())
    ls = np.ascontiguousarray(ls.ravel())
    if variant == kernels.EXDG:
        ln, ls = ln + ls, np.zeros_like(ls)
    out = np.empty(ln.shape, dtype=complex)
    with np.errstate(all="ignore"):
        kernel(ln, ls, ops.nodes, ops.weights, ops.Linv, ops.Ltilde, offset,
               variant, config.iterations, theta, init, out)
    return out.reshape(shape)


def scheme_amplification(config: SchemeConfig, lam, kernel=None):
    """Am(lam) of one configured step.

    Explicit variants treat lam explicitly, implicit ones implicitly;
    SISDG on a scalar has no natural split and treats all of lam as stiff
    (use ``amplification_split`` for an actual IMEX split).
    """
    lam = np.asarray(lam, dtype=complex)
    if config.variant in ("ExDG", "ExSDG"):
        res = amplification_split(config, lam, 0.0, kernel)
    else:
        res = amplification_split(config, 0.0, lam, kernel)
    return complex(res) if res.ndim == 0 else res


def _abs_safe(values):
    a = np.abs(values)
    a[~np.isfinite(a)] = _BIG
    return a


def _axis(lo, hi, n):
    """n equispaced points on [lo, hi], with the point nearest 0 snapped to 0."""
    x = np.linspace(lo, hi, n)
    if lo <= 0.0 <= hi:
        x[np.argmin(np.abs(x))] = 0.0
    return x


def default_jobs():
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity")
               else os.cpu_count() or 1)


@dataclass
class RegionScan:
    """|Am| on a grid; ``values[i, j]`` belongs to re[i] + 1j * im[j]."""

    label: str
    re_range: tuple
    im_range: tuple
    resolution: tuple
    re: np.ndarray
    im: np.ndarray
    values: np.ndarray
    threshold: float = 1.0
    metadata: dict = field(default_factory=dict)

    @property
    def stable(self):
        return self.values <= self.threshold

    @property
    def stable_count(self):
        return int(np.count_nonzero(self.stable))

    def pgm_rows(self):
        """Grey levels row by row, top (largest Im) to bottom; 0 = stable."""
        img = np.where(self.stable, 0, 255).astype(int)
        return [img[:, j] for j in range(img.shape[1] - 1, -1, -1)]


def region_scan(config: SchemeConfig, re_range=DEFAULT_RE, im_range=DEFAULT_IM,
                resolution=DEFAULT_RESOLUTION, jobs=None, kernel=None) -> RegionScan:
    nx, ny = (int(r) for r in resolution)
    if nx < 2 or ny < 2:
        raise ValueError("resolution must be at least 2x2")
    if not (re_range[0] < re_range[1] and im_range[0] < im_range[1]):
        raise ValueError("ranges must be increasing intervals")
    re = _axis(re_range[0], re_range[1], nx)
    im = _axis(im_range[0], im_range[1], ny)
    lam = (re[:, None] + 1j * im[None, :]).ravel()
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    chunks = np.array_split(np.arange(lam.size), min(jobs * 4, lam.size))

    def run(idx):
        return scheme_amplification(config, lam[idx], kernel)

    if jobs == 1:
        parts = [run(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(run, chunks))
    values = _abs_safe(np.concatenate(parts)).reshape(nx, ny)
    meta = {
        "scheme": config.label,
        "init": config.init,
        "predictor": "implicit-euler-march" if config.implicit and config.init != "constant"
        else ("explicit-euler-march" if config.init != "constant" else "constant"),
        "theta": config.theta,
        "backend": kernels.BACKEND if kernel is None else "custom",
    }
    return RegionScan(config.label, tuple(re_range), tuple(im_range), (nx, ny),
                      re, im, values, 1.0, meta)


def probe_samples(n=400, n_rays=17, y_max=1e4, r_max=1e6):
    """Left half-plane test points: both halves of the imaginary axis with
    log-spaced |y| up to ``y_max``, and ``n_rays`` rays strictly inside the
    left half-plane with log-spaced radii up to ``r_max``."""
    y = np.logspace(-3, np.log10(y_max), n)
    pts = [np.array([0.0j]), 1j * y, -1j * y]
    r = np.logspace(-3, np.log10(r_max), n)
    for k in range(1, n_rays + 1):
        phi = np.pi / 2 + np.pi * k / (n_rays + 1)
        pts.append(r * np.exp(1j * phi))
    return np.concatenate(pts)


@dataclass(frozen=True)
class ProbeReport:
    max_abs: float
    worst_lambda: complex
    n_samples: int
    tol: float = PROBE_TOL

    @property
    def passed(self):
        return self.max_abs <= 1.0 + self.tol

    @property
    def verdict(self):
        return "PASS" if self.passed else "FAIL"


def probe_values(values, samples, tol=PROBE_TOL):
    a = _abs_safe(np.asarray(values))
    k = int(np.argmax(a))
    return ProbeReport(float(a[k]), complex(samples[k]), int(a.size), tol)


def a_stability_probe(config: SchemeConfig, samples=None, kernel=None) -> ProbeReport:
    samples = probe_samples() if samples is None else np.asarray(samples, dtype=complex)
    return probe_values(scheme_amplification(config, samples, kernel), samples)


def real_stability_bound(config: SchemeConfig, lo=-50.0, step=1e-3, kernel=None):
    """Most negative x such that |Am| <= 1 on all of [x, 0] (sampled with ``step``)."""
    x = -np.arange(0.0, -lo + step / 2, step)
    a = _abs_safe(np.atleast_1d(scheme_amplification(config, x + 0j, kernel)))
    bad = np.nonzero(a > 1.0)[0]
    if bad.size == 0:
        return float(x[-1])
    return float(x[bad[0] - 1]) if bad[0] > 0 else 0.0
