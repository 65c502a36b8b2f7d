"""Statistical pixel-level pan-sharpening (LMM, LMVM, RVS, LCM) and quality metrics."""
from .errors import (
    DegenerateInput,
    DimensionError,
    NumericError,
    ParseError,
    RangeError,
    ShapeError,
    StatfuseError,
)
from .fusion import (
    FusedBand,
    FusionConfig,
    FusionMethod,
    fuse_band,
    fuse_lcm,
    fuse_lmm,
    fuse_lmvm,
    fuse_rvs,
    fuse_stack,
)
from .io import read_image, write_image, write_report
from .metrics import (
    QualityReport,
    QualityRow,
    correlation,
    deviation_index,
    entropy,
    evaluate_stack,
    nrmse,
    snr,
    std_dev,
)
from .raster import AlignmentVerdict, Band, ImageStack, check_alignment, degrade, upsample_nearest
from .window_stats import (
    WindowSpec,
    local_cov,
    local_mean,
    local_regression,
    local_std,
)

__version__ = "0.1.0"
