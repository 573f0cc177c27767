"""Point-cloud resampling: count-controlled Poisson-disk selection plus
tangent-plane smoothing, with consistency and uniformity metrics.

The typical flow mirrors the ``resample`` CLI command: voxelize to estimate
surface area, derive a disk radius for the target count, refine the radius
until the selected subset lands within 5% above the target, trim to the
exact count, then run smoothing passes that move each point to the area
centroid of its local tangent-plane Voronoi cell.
"""

from .cloud import (
    BoundingBox,
    PointClass,
    PointCloud,
    VoxelGrid,
    compute_bbox,
    default_voxel_length,
    voxelize,
)
from .config import FeatureMode, ResampleConfig, RunReport
from .errors import (
    CloudParseError,
    ConvergenceError,
    DegenerateGeometryError,
    EmptyCloudError,
    InsufficientPointsError,
    ResampleError,
)
from .features import (
    Classification,
    DualRadii,
    assign_radii,
    detect_edges_covariance,
    edge_freeze_predicate,
    load_labels,
    surface_variation,
)
from .io import read_cloud, write_cloud, write_labels
from .metrics import (
    ConsistencyReport,
    UniformityReport,
    consistency_report,
    hausdorff,
    local_density_error,
    mean_distance,
    uniformity_report,
    voronoi_density_error,
)
from .pipeline import resample
from .poisson import (
    RadiusEstimate,
    RefinementState,
    estimate_area_bbox,
    estimate_area_voxel,
    estimate_radius,
    poisson_disk_subsample,
    refine_count,
)
from .smoothing import smooth, trim_to_exact_count
from .spatial import SpatialIndex
from .tangent import (
    CotangentWeights,
    LocalFrame,
    TangentNeighborhood,
    cotangent_weights,
    displace,
    estimate_normal,
    make_frame,
    project_to_tangent,
)

__version__ = "0.1.0"
