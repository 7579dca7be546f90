"""Direct fusion: optimize the fused pixels against the composite loss.

No network is involved; each pixel is a free variable updated with Adam
and projected back onto [0, 1] after every step.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field

import numpy as np

from .image import check_plane, check_same_shape
from .losses import LossConfig, composite_loss, SSIM_WIN


class Init(enum.Enum):
    MAX_SOURCE = "max"
    MEAN_SOURCE = "mean"
    VISIBLE = "vis"

    @classmethod
    def parse(cls, value) -> "Init":
        if isinstance(value, cls):
            return value
        aliases = {"max": cls.MAX_SOURCE, "maxsource": cls.MAX_SOURCE, "mean": cls.MEAN_SOURCE,
                   "meansource": cls.MEAN_SOURCE, "vis": cls.VISIBLE, "visible": cls.VISIBLE}
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        if key not in aliases:
            raise ValueError(f"unknown init {value!r}; expected max, mean or vis")
        return aliases[key]


@dataclass(frozen=True)
class OptimizerConfig:
    steps: int = 500
    step_size: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    init: Init = Init.MAX_SOURCE
    tolerance: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "init", Init.parse(self.init))
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be an integer >= 1, got {self.steps}")
        if not self.step_size > 0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        for name in ("beta1", "beta2"):
            b = getattr(self, name)
            if not 0.0 <= b < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {b}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.tolerance < 0:
            raise ValueError(f"tolerance must be nonnegative, got {self.tolerance}")

    KEYS = ("steps", "lr", "step_size", "beta1", "beta2", "epsilon", "init", "tolerance", "seed")

    @classmethod
    def from_mapping(cls, mapping) -> "OptimizerConfig":
        unknown = set(mapping) - set(cls.KEYS)
        if unknown:
            raise ValueError(f"unknown optimizer config keys: {sorted(unknown)}")
        kw = {}
        for key, value in mapping.items():
            if key in ("steps", "seed"):
                kw[key] = int(value)
            elif key in ("lr", "step_size"):
                kw["step_size"] = float(value)
            elif key == "init":
                kw["init"] = Init.parse(value)
            else:
                kw[key] = float(value)
        return cls(**kw)


@dataclass
class FusionTrace:
    loss_history: list[float] = field(default_factory=list)

    @property
    def iterations_run(self) -> int:
        return len(self.loss_history)

    @property
    def final_loss(self) -> float:
        return self.loss_history[-1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "loss"])
            for k, v in enumerate(self.loss_history):
                w.writerow([k, repr(v)])


def initial_plane(ir, vis_y, init: Init) -> np.ndarray:
    if init is Init.MAX_SOURCE:
        return np.maximum(ir, vis_y)
    if init is Init.MEAN_SOURCE:
        return 0.5 * (ir + vis_y)
    return np.array(vis_y, dtype=np.float64)


def direct_fuse(ir, vis_y, loss_cfg: LossConfig | None = None, opt_cfg: OptimizerConfig | None = None):
    """Fuse ``ir`` and ``vis_y`` by projected Adam on the composite loss.

    Each iteration proposes ``clip(x - step * m_hat / (sqrt(v_hat) + eps))``.
    A proposal that raises the loss is rejected and the step multiplier is
    halved; an accepted one restores it toward 1.  ``loss_history`` holds
    the loss of the current iterate after every iteration and is therefore
    non-increasing.  Stops after ``steps`` iterations, when an accepted step
    changes the loss by less than ``tolerance``, or when the multiplier
    underflows.  Returns ``(fused, trace)``.
    """
    loss_cfg = loss_cfg or LossConfig()
    opt_cfg = opt_cfg or OptimizerConfig()
    ir = check_plane(ir, "ir", SSIM_WIN)
    vis_y = check_plane(vis_y, "vis_y", SSIM_WIN)
    check_same_shape(ir=ir, vis_y=vis_y)

    x = np.clip(initial_plane(ir, vis_y, opt_cfg.init), 0.0, 1.0)
    res = composite_loss(x, vis_y, ir, loss_cfg)
    trace = FusionTrace([res.value])
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    b1, b2 = opt_cfg.beta1, opt_cfg.beta2
    t = 0
    fresh = True  # moments not yet updated with res.grad
    mult = 1.0
    while trace.iterations_run < opt_cfg.steps:
        if fresh:
            t += 1
            g = res.grad
            m = b1 * m + (1.0 - b1) * g
            v = b2 * v + (1.0 - b2) * g * g
            fresh = False
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        cand = np.clip(x - mult * opt_cfg.step_size * m_hat / (np.sqrt(v_hat) + opt_cfg.epsilon), 0.0, 1.0)
        cand_res = composite_loss(cand, vis_y, ir, loss_cfg)
        if cand_res.value <= res.value:
            delta = res.value - cand_res.value
            x, res, fresh = cand, cand_res, True
            mult = min(1.0, 2.0 * mult)
            trace.loss_history.append(res.value)
            if delta < opt_cfg.tolerance:
                break
        else:
            mult *= 0.5
            trace.loss_history.append(res.value)
            if mult < 1e-12:
                break
    return x, trace


class PairKind(enum.Enum):
    CROSS_EDGE = "cross_edge"
    ANTI_DIAGONAL_RAMP = "anti_diagonal_ramp"
    OPPOSING_POLARITY = "opposing_polarity"


def make_synthetic_pair(kind, size: int = 64, amplitude: float = 0.5):
    """Return a deterministic ``(vis_y, ir)`` test pair.

    ``CROSS_EDGE``
        vertical step in vis, horizontal step in ir, each of height
        ``amplitude`` centred on 0.5 (the two are transposes).
    ``ANTI_DIAGONAL_RAMP``
        vis linear in ``c - r`` spanning ``amplitude`` around 0.5, ir flat
        at 0.5.  Interior Sobel responses satisfy ``gx == -gy``.
    ``OPPOSING_POLARITY``
        vertical step edges at the same column: vis rises by
        ``amplitude / 2``, ir falls by ``amplitude``.
    """
    kind = PairKind(kind) if not isinstance(kind, PairKind) else kind
    if int(size) != size or size < 16:
        raise ValueError(f"size must be an integer >= 16, got {size}")
    if not 0.0 < amplitude <= 1.0:
        raise ValueError(f"amplitude must lie in (0, 1], got {amplitude}")
    size = int(size)
    rows, cols = np.mgrid[0:size, 0:size].astype(np.float64)
    half = size // 2
    if kind is PairKind.CROSS_EDGE:
        lo, hi = 0.5 - amplitude / 2, 0.5 + amplitude / 2
        vis = np.where(cols >= half, hi, lo)
        ir = np.where(rows >= half, hi, lo)
    elif kind is PairKind.ANTI_DIAGONAL_RAMP:
        vis = 0.5 + amplitude * (cols - rows) / (2.0 * (size - 1))
        ir = np.full((size, size), 0.5)
    else:
        vis = np.where(cols >= half, 0.5 + amplitude / 4, 0.5 - amplitude / 4)
        ir = np.where(cols >= half, 0.5 - amplitude / 2, 0.5 + amplitude / 2)
    return vis, ir
