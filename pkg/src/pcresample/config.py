"""Run configuration and the per-run report."""

from dataclasses import dataclass, field, asdict

from .errors import ResampleError

FEATURE_OFF = "off"
FEATURE_LABELS = "labels"
FEATURE_DETECT = "detect"


@dataclass(frozen=True)
class FeatureMode:
    """Sharp-feature handling: off, external label file, or detector."""

    kind: str = FEATURE_OFF
    labels_path: str | None = None
    k: int = 16
    tau: float = 0.12

    def __post_init__(self):
        if self.kind not in (FEATURE_OFF, FEATURE_LABELS, FEATURE_DETECT):
            raise ResampleError(f"unknown feature mode {self.kind!r}")
        if self.kind == FEATURE_LABELS and not self.labels_path:
            raise ResampleError("labels feature mode needs a path")

    @property
    def enabled(self):
        return self.kind != FEATURE_OFF


@dataclass(frozen=True)
class ResampleConfig:
    """Everything cmd_resample needs beyond the input and output paths."""

    n: int
    decay: float = 0.68
    voxel_factor: float = 0.05
    k_smooth: int = 16
    smooth_iterations: int = 5
    feature_mode: FeatureMode = field(default_factory=FeatureMode)
    seed: int = 0
    snap_back: bool = False
    max_refine_iters: int = 50
    tolerance: float = 0.05

    def __post_init__(self):
        if self.n < 1:
            raise ResampleError("target count must be positive")
        if not 0.0 < self.tolerance < 1.0:
            raise ResampleError("tolerance must be in (0, 1)")
        if self.decay <= 0:
            raise ResampleError("decay factor must be positive")
        if self.voxel_factor <= 0:
            raise ResampleError("voxel factor must be positive")
        if self.k_smooth < 3:
            raise ResampleError("k must be at least 3")
        if self.smooth_iterations < 0:
            raise ResampleError("iterations must be nonnegative")

    def to_dict(self):
        d = asdict(self)
        d["feature_mode"] = asdict(self.feature_mode)
        return d


@dataclass
class RunReport:
    """What one resampling run did, emitted as JSON by the CLI."""

    input_count: int
    output_count: int
    final_radius: float
    refinement_iterations: int
    converged: bool
    stage_seconds: dict
    config: dict
    seed: int
    sharp: dict | None = None
    metrics: dict | None = None

    def to_dict(self):
        return {
            "input_count": self.input_count,
            "output_count": self.output_count,
            "final_radius": self.final_radius,
            "refinement_iterations": self.refinement_iterations,
            "converged": self.converged,
            "stage_seconds": self.stage_seconds,
            "config": self.config,
            "seed": self.seed,
            "sharp": self.sharp,
            "metrics": self.metrics,
        }
