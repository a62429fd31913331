from dune_edges.compose import BlendMode, blend, edge_overlay, side_by_side
from dune_edges.displacement import (
    MatchResult, SearchSpec, TemplateSpec, ncc_match, to_physical
)
from dune_edges.errors import (
    ConfigError, DuneEdgesError, ImageIOError, NumericError, StageError
)
from dune_edges.filters import (
    EdgeMap, EdgeOperator, Kernel, convolve, edge_response, gaussian_blur,
    threshold_edges
)
from dune_edges.raster import (
    BoundaryPolicy, Raster, SubpixelPoint, bilinear_sample, dequantize,
    quantize, sample
)
from dune_edges.register import (
    ControlPointPair, SimilarityTransform, estimate_similarity, warp
)
from dune_edges.tone import ToneParams, adjust, invert, stretch
