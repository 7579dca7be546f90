"""Fusion quality metrics: EN, MI, SD, SCD, VIF and Q_AB/F.

Inputs are gray planes in [0, 1].  EN, MI and SD bin or scale intensities
on the 0-255 range (``round(255 * x)``); VIF also operates on the 0-255
range so its noise variance keeps its usual meaning.
"""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from . import kernels
from .gradients import sobel
from .image import check_plane, check_same_shape

METRIC_NAMES = ("en", "mi", "sd", "scd", "vif", "qabf")

# Q_AB/F sigmoid constants
QG_GAMMA, QG_KAPPA, QG_SIGMA = 0.9994, -15.0, 0.5
QA_GAMMA, QA_KAPPA, QA_SIGMA = 0.9879, -22.0, 0.8

VIF_SIGMA_NSQ = 2.0
VIF_EPS = 1e-10
VIF_MIN_SIDE = 32


def to_levels(img) -> np.ndarray:
    """Map [0, 1] intensities to integer levels 0..255."""
    a = np.asarray(img, dtype=np.float64)
    return np.clip(np.floor(a * 255.0 + 0.5), 0, 255).astype(np.int64)


def _entropy_of_counts(counts) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log2(p)))


def entropy(img) -> float:
    """Shannon entropy in bits of the 256-bin histogram."""
    q = to_levels(check_plane(img))
    return _entropy_of_counts(np.bincount(q.ravel(), minlength=256))


def mutual_information_pair(a, b) -> float:
    qa, qb = to_levels(a).ravel(), to_levels(b).ravel()
    joint = np.bincount(qa * 256 + qb, minlength=256 * 256).reshape(256, 256) / qa.size
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    nz = joint > 0
    ratio = joint[nz] / np.outer(pa, pb)[nz]
    return max(0.0, float(np.sum(joint[nz] * np.log2(ratio))))


def mutual_information(fused, ir, vis_y) -> float:
    """``MI(fused, ir) + MI(fused, vis_y)`` in bits from 256x256 joint histograms."""
    f, i, v = (check_plane(p) for p in (fused, ir, vis_y))
    check_same_shape(fused=f, ir=i, vis_y=v)
    return mutual_information_pair(f, i) + mutual_information_pair(f, v)


def std_dev(img) -> float:
    """Population standard deviation on the 0-255 scale."""
    return float(np.std(255.0 * check_plane(img)))


def _corr(a, b) -> float:
    da = a - a.mean()
    db = b - b.mean()
    den = math.sqrt(float(np.sum(da * da)) * float(np.sum(db * db)))
    if den == 0.0:
        return 0.0
    return float(np.sum(da * db)) / den


def scd(fused, ir, vis_y) -> float:
    """Sum of correlations of differences; zero-variance terms count as 0."""
    f, i, v = (check_plane(p) for p in (fused, ir, vis_y))
    check_same_shape(fused=f, ir=i, vis_y=v)
    return _corr(f - i, v) + _corr(f - v, i)


def _vif_window(n: int) -> np.ndarray:
    x = np.arange(n, dtype=np.float64) - (n - 1) / 2.0
    sd = n / 5.0
    g = np.exp(-(x * x) / (2.0 * sd * sd))
    return g / g.sum()


def vif_single(ref, dist) -> float:
    """Pixel-domain VIF of ``dist`` against ``ref`` (both on the 0-255 scale).

    Four scales with Gaussian windows of 17, 9, 5 and 3 taps; each coarser
    scale filters and decimates by two first.  Scales whose window no longer
    fits are skipped.  A reference with no variance at any scale scores 1.
    """
    ref = np.asarray(ref, dtype=np.float64)
    dist = np.asarray(dist, dtype=np.float64)
    num = den = 0.0
    for scale in range(1, 5):
        n = 2 ** (4 - scale + 1) + 1
        k = _vif_window(n)
        if scale > 1:
            if min(ref.shape) < n:
                break
            ref = kernels.gauss_valid(ref, k)[::2, ::2]
            dist = kernels.gauss_valid(dist, k)[::2, ::2]
        if min(ref.shape) < n:
            break
        mu1 = kernels.gauss_valid(ref, k)
        mu2 = kernels.gauss_valid(dist, k)
        s1 = np.maximum(kernels.gauss_valid(ref * ref, k) - mu1 * mu1, 0.0)
        s2 = np.maximum(kernels.gauss_valid(dist * dist, k) - mu2 * mu2, 0.0)
        s12 = kernels.gauss_valid(ref * dist, k) - mu1 * mu2

        g = s12 / (s1 + VIF_EPS)
        sv = s2 - g * s12
        low1 = s1 < VIF_EPS
        g[low1] = 0.0
        sv[low1] = s2[low1]
        s1 = np.where(low1, 0.0, s1)
        low2 = s2 < VIF_EPS
        g[low2] = 0.0
        sv[low2] = 0.0
        neg = g < 0
        sv[neg] = s2[neg]
        g[neg] = 0.0
        sv = np.maximum(sv, VIF_EPS)

        num += float(np.sum(np.log10(1.0 + g * g * s1 / (sv + VIF_SIGMA_NSQ))))
        den += float(np.sum(np.log10(1.0 + s1 / VIF_SIGMA_NSQ)))
    if den == 0.0:
        return 1.0
    return num / den


def vif(fused, ir, vis_y) -> float:
    """Mean of the pixel-domain VIF of ``fused`` against each source."""
    f, i, v = (check_plane(p, min_side=VIF_MIN_SIDE) for p in (fused, ir, vis_y))
    check_same_shape(fused=f, ir=i, vis_y=v)
    f, i, v = 255.0 * f, 255.0 * i, 255.0 * v
    return 0.5 * (vif_single(i, f) + vif_single(v, f))


def _strength_orientation(img):
    gx, gy = sobel(img)
    g = np.hypot(gx, gy)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        a = np.where(gx == 0.0, math.pi / 2, np.arctan(gy / np.where(gx == 0.0, 1.0, gx)))
    return g, a


def _preservation(g_src, a_src, g_f, a_f):
    hi = np.maximum(g_src, g_f)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel_g = np.where(hi > 0, np.minimum(g_src, g_f) / np.where(hi > 0, hi, 1.0), 0.0)
    rel_a = 1.0 - np.abs(a_src - a_f) / (math.pi / 2)
    qg = QG_GAMMA / (1.0 + np.exp(QG_KAPPA * (rel_g - QG_SIGMA)))
    qa = QA_GAMMA / (1.0 + np.exp(QA_KAPPA * (rel_a - QA_SIGMA)))
    return qg * qa


def qabf(fused, ir, vis_y) -> float:
    """Xydeas-Petrovic edge preservation, weighted by source edge strength.

    Returns 0 when neither source has any edge strength.
    """
    f, i, v = (check_plane(p) for p in (fused, ir, vis_y))
    check_same_shape(fused=f, ir=i, vis_y=v)
    g_f, a_f = _strength_orientation(f)
    g_a, a_a = _strength_orientation(i)
    g_b, a_b = _strength_orientation(v)
    q_af = _preservation(g_a, a_a, g_f, a_f)
    q_bf = _preservation(g_b, a_b, g_f, a_f)
    den = float(np.sum(g_a + g_b))
    if den == 0.0:
        return 0.0
    return float(np.sum(q_af * g_a + q_bf * g_b)) / den


@dataclass(frozen=True)
class MetricReport:
    en: float
    mi: float
    sd: float
    scd: float
    vif: float
    qabf: float

    def values(self) -> tuple[float, ...]:
        return astuple(self)

    @classmethod
    def mean(cls, reports) -> "MetricReport":
        reports = list(reports)
        if not reports:
            raise ValueError("no reports to average")
        return cls(*(math.fsum(getattr(r, f.name) for r in reports) / len(reports) for f in fields(cls)))


def evaluate(fused, ir, vis_y) -> MetricReport:
    return MetricReport(
        en=entropy(fused),
        mi=mutual_information(fused, ir, vis_y),
        sd=std_dev(fused),
        scd=scd(fused, ir, vis_y),
        vif=vif(fused, ir, vis_y),
        qabf=qabf(fused, ir, vis_y),
    )
