"""Fusion losses with analytic gradients with respect to the fused plane.

Every loss takes ``(fused, vis_y, ir)`` gray planes of identical shape and
returns a :class:`LossResult` holding the scalar value and ``dL/dfused``.

Gradient terms
--------------
``baseline_grad_loss``
    L1 between the fused L1 gradient magnitude and the per-pixel maximum of
    the source magnitudes.
``tcmoa_grad_loss``
    Signed ``gx + gy`` response with a winner-take-all sign-preserving
    target.  Opposite-signed axes cancel in this formulation.
``ours_grad_loss``
    Per-axis winner-take-all, sign-preserving targets evaluated over a set
    of bilinear scales and combined with normalized weights.

Conventions for the backward pass: ``sign(0) = 0`` and selection masks are
treated as constants.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .gradients import GradientField, PaddingMode, sobel, sobel_adjoint
from .image import (
    check_plane,
    check_same_shape,
    resize_bilinear,
    resize_bilinear_adjoint,
    scaled_shape,
)

SSIM_WIN = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2


class LossVariant(enum.Enum):
    ORI = "ori"
    GRAD = "grad"
    TCMOA = "tcmoa"
    OURS = "ours"

    @classmethod
    def parse(cls, value) -> "LossVariant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(v.value for v in cls)
            raise ValueError(f"unknown loss variant {value!r}; expected one of {names}") from None


_DEFAULT_WEIGHTS = {
    LossVariant.ORI: (3.0, 7.0, 0.0),
    LossVariant.GRAD: (1.5, 7.0, 1.5),
    LossVariant.TCMOA: (1.5, 7.0, 1.5),
    LossVariant.OURS: (1.5, 7.0, 1.5),
}


@dataclass(frozen=True)
class LossConfig:
    """Loss variant plus hyperparameters.

    Weights left as ``None`` take the variant defaults (``1.5:7:1.5`` for the
    gradient variants, ``3:7:0`` for ori).  ``scale_weights`` defaults to
    uniform and is always normalized to sum to one.
    """

    variant: LossVariant = LossVariant.OURS
    w_ssim: float | None = None
    w_int: float | None = None
    w_grad: float | None = None
    scales: tuple[float, ...] = (1.0, 0.5, 0.25)
    scale_weights: tuple[float, ...] | None = None
    pad: PaddingMode = PaddingMode.ZERO

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        variant = LossVariant.parse(self.variant)
        set_("variant", variant)
        set_("pad", PaddingMode.parse(self.pad))
        defaults = _DEFAULT_WEIGHTS[variant]
        for name, d in zip(("w_ssim", "w_int", "w_grad"), defaults):
            v = getattr(self, name)
            v = d if v is None else float(v)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be a nonnegative real, got {v}")
            set_(name, v)

        scales = tuple(float(s) for s in self.scales)
        if not scales:
            raise ValueError("scales must not be empty")
        if any(not (0.0 < s <= 1.0) for s in scales):
            raise ValueError(f"every scale must lie in (0, 1], got {scales}")
        if len(set(scales)) != len(scales):
            raise ValueError(f"scales must be distinct, got {scales}")
        if 1.0 not in scales:
            raise ValueError(f"scales must include 1.0, got {scales}")
        set_("scales", scales)

        if self.scale_weights is None:
            weights = (1.0,) * len(scales)
        else:
            weights = tuple(float(w) for w in self.scale_weights)
        if len(weights) != len(scales):
            raise ValueError(f"{len(weights)} scale weights given for {len(scales)} scales")
        if any(not math.isfinite(w) or w <= 0 for w in weights):
            raise ValueError(f"scale weights must be positive, got {weights}")
        total = math.fsum(weights)
        set_("scale_weights", tuple(w / total for w in weights))

    @property
    def weights(self) -> tuple[float, float, float]:
        """Effective ``(w_ssim, w_int, w_grad)``; ori always has ``w_grad = 0``."""
        w_grad = 0.0 if self.variant is LossVariant.ORI else self.w_grad
        return self.w_ssim, self.w_int, w_grad

    def with_variant(self, variant) -> "LossConfig":
        """Same scales and padding, variant-default weights."""
        return replace(self, variant=LossVariant.parse(variant), w_ssim=None, w_int=None, w_grad=None)

    # plain-text key = value serialization
    KEYS = ("variant", "w_ssim", "w_int", "w_grad", "scales", "scale_weights", "padding")

    def to_mapping(self) -> dict[str, str]:
        return {
            "variant": self.variant.value,
            "w_ssim": repr(self.w_ssim),
            "w_int": repr(self.w_int),
            "w_grad": repr(self.w_grad),
            "scales": ",".join(repr(s) for s in self.scales),
            "scale_weights": ",".join(repr(w) for w in self.scale_weights),
            "padding": self.pad.value,
        }

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_mapping().items())

    @classmethod
    def from_mapping(cls, mapping) -> "LossConfig":
        unknown = set(mapping) - set(cls.KEYS)
        if unknown:
            raise ValueError(f"unknown loss config keys: {sorted(unknown)}")
        kw = {}
        if "variant" in mapping:
            kw["variant"] = LossVariant.parse(mapping["variant"])
        for k in ("w_ssim", "w_int", "w_grad"):
            if k in mapping:
                kw[k] = float(mapping[k])
        if "scales" in mapping:
            kw["scales"] = parse_floats(mapping["scales"])
        if "scale_weights" in mapping:
            kw["scale_weights"] = parse_floats(mapping["scale_weights"])
        if "padding" in mapping:
            kw["pad"] = PaddingMode.parse(mapping["padding"])
        return cls(**kw)


def parse_floats(text) -> tuple[float, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(float(t) for t in text)
    parts = [p for p in str(text).replace(" ", ",").split(",") if p]
    return tuple(float(p) for p in parts)


def read_config_file(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


@dataclass
class LossResult:
    value: float
    grad: np.ndarray
    components: dict = field(default_factory=dict)


def _planes(fused, vis_y, ir, min_side=3):
    f = check_plane(fused, "fused", min_side)
    v = check_plane(vis_y, "vis_y", min_side)
    i = check_plane(ir, "ir", min_side)
    check_same_shape(fused=f, vis_y=v, ir=i)
    return f, v, i


def intensity_loss(fused, vis_y, ir) -> LossResult:
    """Mean L1 distance to the per-pixel maximum of the sources."""
    f, v, i = _planes(fused, vis_y, ir)
    r = f - np.maximum(v, i)
    return LossResult(float(np.mean(np.abs(r))), np.sign(r) / r.size)


def gaussian_window(size: int = SSIM_WIN, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """Normalized 1-D Gaussian taps; the 2-D window is their outer product."""
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def ssim_value_and_grad(x, y, win=None):
    """Mean SSIM over valid window positions and its gradient w.r.t. ``x``."""
    k = gaussian_window() if win is None else win
    G = lambda a: kernels.gauss_valid(a, k)  # noqa: E731
    mx, my = G(x), G(y)
    sxx = G(x * x) - mx * mx
    syy = G(y * y) - my * my
    sxy = G(x * y) - mx * my
    a1 = 2.0 * mx * my + SSIM_C1
    a2 = 2.0 * sxy + SSIM_C2
    b1 = mx * mx + my * my + SSIM_C1
    b2 = sxx + syy + SSIM_C2
    s = (a1 * a2) / (b1 * b2)
    m = s.size
    # partials of the map w.r.t. E[x], E[x^2], E[xy] under the window
    # grouped so each bracket is exactly zero when x == y
    d_mean = s * ((2.0 * my / a1 - 2.0 * mx / b1) + (2.0 * mx / b2 - 2.0 * my / a2)) / m
    d_sq = -(s / b2) / m
    d_cross = 2.0 * ((s / a2) / m)
    GT = lambda a: kernels.gauss_valid_adjoint(a, k)  # noqa: E731
    grad = GT(d_mean) + 2.0 * x * GT(d_sq) + y * GT(d_cross)
    return float(np.mean(s)), grad


def ssim_loss(fused, vis_y, ir) -> LossResult:
    """``1 - (SSIM(f, vis) + SSIM(f, ir)) / 2`` with an 11x11 Gaussian window."""
    f, v, i = _planes(fused, vis_y, ir, min_side=SSIM_WIN)
    s_v, g_v = ssim_value_and_grad(f, v)
    s_i, g_i = ssim_value_and_grad(f, i)
    return LossResult(1.0 - 0.5 * (s_v + s_i), -0.5 * (g_v + g_i))


def baseline_grad_loss(fused, vis_y, ir, pad: PaddingMode = PaddingMode.ZERO) -> LossResult:
    f, v, i = _planes(fused, vis_y, ir)
    fx, fy = sobel(f, pad)
    vx, vy = sobel(v, pad)
    ix, iy = sobel(i, pad)
    target = np.maximum(np.abs(vx) + np.abs(vy), np.abs(ix) + np.abs(iy))
    r = np.abs(fx) + np.abs(fy) - target
    delta = np.sign(r) / r.size
    grad = sobel_adjoint(GradientField(delta * np.sign(fx), delta * np.sign(fy)), pad)
    return LossResult(float(np.mean(np.abs(r))), grad)


def tcmoa_target(vis_y, ir, pad: PaddingMode = PaddingMode.ZERO) -> np.ndarray:
    """Signed ``gx + gy`` of whichever source has the larger ``|gx + gy|``; ties pick vis."""
    g_v = sum(sobel(vis_y, pad))
    g_i = sum(sobel(ir, pad))
    return np.where(np.abs(g_v) >= np.abs(g_i), g_v, g_i)


def tcmoa_grad_loss(fused, vis_y, ir, pad: PaddingMode = PaddingMode.ZERO) -> LossResult:
    f, v, i = _planes(fused, vis_y, ir)
    fx, fy = sobel(f, pad)
    r = (fx + fy) - tcmoa_target(v, i, pad)
    delta = np.sign(r) / r.size
    grad = sobel_adjoint(GradientField(delta, delta), pad)
    return LossResult(float(np.mean(np.abs(r))), grad)


def select_targets(vis_field, ir_field) -> GradientField:
    """Per-axis winner-take-all with the winner's sign kept; ties pick vis."""
    vx, vy = vis_field
    ix, iy = ir_field
    return GradientField(
        np.where(np.abs(vx) >= np.abs(ix), vx, ix),
        np.where(np.abs(vy) >= np.abs(iy), vy, iy),
    )


def ours_targets(vis_y, ir, scale: float = 1.0, pad: PaddingMode = PaddingMode.ZERO) -> GradientField:
    """Selected gradient target at one scale."""
    return select_targets(sobel(resize_bilinear(vis_y, scale), pad), sobel(resize_bilinear(ir, scale), pad))


def ours_pixel_terms(fused, vis_y, ir, scale: float = 1.0, pad: PaddingMode = PaddingMode.ZERO) -> np.ndarray:
    """Per-pixel ``|fx - selx| + |fy - sely|`` at one scale."""
    f, v, i = _planes(fused, vis_y, ir)
    fx, fy = sobel(resize_bilinear(f, scale), pad)
    sx, sy = ours_targets(v, i, scale, pad)
    return np.abs(fx - sx) + np.abs(fy - sy)


def ours_grad_loss(
    fused,
    vis_y,
    ir,
    scales=(1.0, 0.5, 0.25),
    scale_weights=None,
    pad: PaddingMode = PaddingMode.ZERO,
) -> LossResult:
    """Multi-scale direction-aligned gradient loss.

    At each scale the three planes are bilinearly resized, Sobel fields are
    computed, and the fused field is matched axis by axis to the selected
    target.  Per scale the two axis MAEs are summed; scales are combined with
    ``scale_weights`` (uniform when omitted).
    """
    f, v, i = _planes(fused, vis_y, ir)
    if scale_weights is None:
        scale_weights = (1.0 / len(scales),) * len(scales)
    if len(scale_weights) != len(scales):
        raise ValueError(f"{len(scale_weights)} scale weights given for {len(scales)} scales")
    for s in scales:
        scaled_shape(f.shape, s)

    value = 0.0
    grad = np.zeros_like(f)
    per_scale = {}
    for s, w in zip(scales, scale_weights):
        fs = resize_bilinear(f, s)
        fx, fy = sobel(fs, pad)
        sx, sy = ours_targets(v, i, s, pad)
        rx, ry = fx - sx, fy - sy
        n = rx.size
        loss_s = float(np.mean(np.abs(rx)) + np.mean(np.abs(ry)))
        per_scale[s] = loss_s
        value += w * loss_s
        g_s = sobel_adjoint(GradientField(np.sign(rx) / n, np.sign(ry) / n), pad)
        grad += w * resize_bilinear_adjoint(g_s, f.shape, s)
    return LossResult(value, grad, per_scale)


def gradient_term(fused, vis_y, ir, cfg: LossConfig) -> LossResult:
    if cfg.variant is LossVariant.GRAD:
        return baseline_grad_loss(fused, vis_y, ir, cfg.pad)
    if cfg.variant is LossVariant.TCMOA:
        return tcmoa_grad_loss(fused, vis_y, ir, cfg.pad)
    if cfg.variant is LossVariant.OURS:
        return ours_grad_loss(fused, vis_y, ir, cfg.scales, cfg.scale_weights, cfg.pad)
    raise ValueError(f"variant {cfg.variant.value} has no gradient term")


def composite_loss(fused, vis_y, ir, cfg: LossConfig | None = None) -> LossResult:
    """``w_ssim * L_ssim + w_int * L_int + w_grad * L_grad`` for the configured variant."""
    cfg = cfg or LossConfig()
    w_ssim, w_int, w_grad = cfg.weights
    parts = {"ssim": ssim_loss(fused, vis_y, ir), "intensity": intensity_loss(fused, vis_y, ir)}
    weights = {"ssim": w_ssim, "intensity": w_int}
    if cfg.variant is not LossVariant.ORI:
        parts["gradient"] = gradient_term(fused, vis_y, ir, cfg)
        weights["gradient"] = w_grad
    value = 0.0
    grad = np.zeros_like(parts["intensity"].grad)
    for name, res in parts.items():
        value += weights[name] * res.value
        grad += weights[name] * res.grad
    return LossResult(value, grad, {k: r.value for k, r in parts.items()})


def batch_loss(triples, cfg: LossConfig | None = None) -> float:
    """Mean composite loss over ``(fused, vis_y, ir)`` triples."""
    values = [composite_loss(f, v, i, cfg).value for f, v, i in triples]
    if not values:
        raise ValueError("batch is empty")
    return math.fsum(values) / len(values)
