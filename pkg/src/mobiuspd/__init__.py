"""mobiuspd: perspective-distortion synthesis with Möbius warps.

A reusable warping library (inverse-mapped resampling with black or
replication-padded backgrounds), annotation-aware augmentation for points and
boxes, crowd compositing into vacated backgrounds, a deterministic generator
for the eight distorted benchmark subsets, and robustness-report arithmetic.
"""

__version__ = "0.1.0"

from .mobius import (  # noqa: E402
    DET_EPS,
    POLE_EPS,
    CoordFrame,
    DegenerateParamsError,
    MobiusParams,
    MobiusPdError,
    NearPoleError,
    complex_to_px,
    derivative,
    forward_map,
    identity_params,
    inverse_map,
    plane_to_px,
    px_to_complex,
    px_to_plane,
    validate_params,
)
from .warp import (  # noqa: E402
    Background,
    BoundingBox,
    Fit,
    Interpolation,
    WarpSpec,
    WarpedImage,
    content_mask,
    forward_boundary_probe,
    sample,
    warp_image,
)
from .presets import (  # noqa: E402
    AugmentPolicy,
    InvalidIntensityError,
    Orientation,
    SplitMix64,
    affine_params,
    format_policy,
    parse_policy,
    preset_params,
    sample_params,
)
from .annotations import (  # noqa: E402
    BoxSet,
    PointSet,
    transform_boxes,
    transform_points,
)
from .autocrowd import (  # noqa: E402
    EmptyAnnotationsError,
    HeadPatch,
    compose_autocrowd,
    content_density_per_kpx,
    extract_head_patches,
)
from .datasetgen import (  # noqa: E402
    SUBSETS,
    Manifest,
    derive_item_seed,
    generate_pd,
    pixel_digest,
)
from .benchkit import (  # noqa: E402
    MalformedRecordError,
    MissingSubsetError,
    PredictionSet,
    Report,
    Score,
    report,
    score,
)
