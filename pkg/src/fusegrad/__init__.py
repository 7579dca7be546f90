"""Direction-aware gradient losses and metrics for infrared/visible image fusion."""
from .gradients import GradientField, PaddingMode, l1_magnitude, sobel, sobel_adjoint
from .image import (
    YCrCb,
    load_image,
    resize_bilinear,
    resize_bilinear_adjoint,
    rgb_to_ycrcb,
    save_image,
    ycrcb_to_rgb,
)
from .kernels import BACKEND
from .losses import (
    LossConfig,
    LossResult,
    LossVariant,
    baseline_grad_loss,
    composite_loss,
    intensity_loss,
    ours_grad_loss,
    ssim_loss,
    tcmoa_grad_loss,
)
from .metrics import MetricReport, evaluate
from .optimizer import FusionTrace, OptimizerConfig, direct_fuse, make_synthetic_pair

__version__ = "0.1.0"
