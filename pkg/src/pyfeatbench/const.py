"""pyfeatbench library constants.

Method names, policies and numeric defaults are defined here and imported by
the models and algorithm modules. Numeric defaults follow the publications each
method comes from; the benchmark-level defaults are config-exposed and written
into every report.

Attributes:
    FAST_THRESHOLD (int): Default FAST intensity delta.
    FAST_ARC (int): Default number of contiguous circle pixels (FAST-9).
    FAST_KEYPOINT_SCALE (float): Scale assigned to FAST keypoints (circle diameter).
    SIFT_SCALES_PER_OCTAVE (int): DoG layers searched per octave.
    SIFT_BASE_SIGMA (float): Blur of the first Gaussian image of each octave.
    SIFT_ASSUMED_BLUR (float): Blur assumed to be present in the input image.
    SIFT_CONTRAST_THRESHOLD (float): Minimum |DoG| on the [0, 1] intensity scale.
    SIFT_EDGE_RATIO (float): Maximum principal-curvature ratio.
    SURF_OCTAVES (int): Number of box-filter octaves.
    SURF_HESSIAN_THRESHOLD (float): Minimum normalized Hessian determinant.
    ORB_N_FEATURES (int): Keypoints kept after Harris ranking.
    ORB_LEVELS (int): Pyramid levels searched by ORB.
    ORB_SCALE_FACTOR (float): Ratio between consecutive ORB pyramid levels.
    ORB_PATCH_SIZE (int): Side of the BRIEF/ORB sampling patch.
    BRISK_OCTAVES (int): Octaves in the BRISK scale space.
    PATTERN_SEED (int): Seed of the BRIEF/ORB test-pair generator.
    BRIEF_SMOOTHING_SIGMA (float): Pre-smoothing applied before binary tests.
    MIN_PYRAMID_SIDE (int): Smallest pyramid level side kept.
    DEFAULT_RATIO (float): Ratio-test threshold.
    DEFAULT_MIN_CORRECT (int): Correct matches needed to accept an image pair.
    HYSTERESIS_LOWER (int): Lower FAST keypoint count of the query band.
    HYSTERESIS_UPPER (int): Upper FAST keypoint count of the query band.
    HISTOGRAM_THRESHOLD (float): Histogram score an image pair must exceed.
    YAW_STEP (int): Yaw spacing of the pose grid in degrees.
    YAW_RANGE (tuple[int, ...]): Yaw angles of the pose grid in degrees.
    HEIGHT_LEVELS (int): Height levels of the pose grid.
    DISTANCE_SENTINEL (float): NaN-free stand-in for an infinite distance.
    OUTPUT_DIR_ENV (str): Environment variable naming the output directory.
    WORKERS_ENV (str): Environment variable holding the worker count.
    CSV_COLUMNS (tuple[str, ...]): Report columns, in their stable order.
"""

from __future__ import annotations

import sys
from enum import StrEnum

from pyfeatbench.utils.enum_utils import CaseInsensitiveStrEnum, IntEnumMixin

FAST_THRESHOLD = 20
FAST_ARC = 9
FAST_ARC_RANGE = (9, 12)
FAST_KEYPOINT_SCALE = 7.0
FAST_CIRCLE_RADIUS = 3

SIFT_SCALES_PER_OCTAVE = 3
SIFT_BASE_SIGMA = 1.6
SIFT_ASSUMED_BLUR = 0.5
SIFT_CONTRAST_THRESHOLD = 0.03
SIFT_EDGE_RATIO = 10.0
SIFT_BORDER = 5
SIFT_MAX_REFINE_STEPS = 5
SIFT_ORIENTATION_BINS = 36
SIFT_PEAK_RATIO = 0.8
SIFT_DESCRIPTOR_CLAMP = 0.2

SURF_OCTAVES = 4
SURF_LAYERS_PER_OCTAVE = 4
SURF_HESSIAN_THRESHOLD = 600.0
SURF_DXY_WEIGHT = 0.9

ORB_N_FEATURES = 500
ORB_LEVELS = 8
ORB_SCALE_FACTOR = 1.2
ORB_PATCH_SIZE = 31
ORB_CENTROID_RADIUS = 15
ORB_ANGLE_STEPS = 30
HARRIS_K = 0.04
HARRIS_WINDOW = 7

BRISK_OCTAVES = 4
BRISK_FAST_THRESHOLD = 20
BRISK_SHORT_PAIR_DISTANCE = 9.75
BRISK_LONG_PAIR_DISTANCE = 13.67
BRISK_RADII = (0.0, 2.9, 4.9, 7.4, 10.8)
BRISK_RING_POINTS = (1, 10, 14, 15, 20)
BRISK_BITS = 512

PATTERN_SEED = 0x5EED
BRIEF_BITS = 256
BRIEF_SMOOTHING_SIGMA = 2.0
SIFT_DESCRIPTOR_SIZE = 128
SURF_DESCRIPTOR_SIZE = 64

MIN_PYRAMID_SIDE = 32

DEFAULT_RATIO = 0.8
MAX_DISTANCE_256 = 64.0
MAX_DISTANCE_512 = 128.0
MAX_DISTANCE_REAL = 0.7
DEFAULT_MIN_CORRECT = 8

HYSTERESIS_LOWER = 40
HYSTERESIS_UPPER = 4000
HISTOGRAM_THRESHOLD = 0.9
HISTOGRAM_BINS = 256

YAW_STEP = 15
YAW_RANGE = (-30, -15, 0, 15, 30)
YAW_TOLERANCE = 30
HEIGHT_LEVELS = 3

DISTANCE_SENTINEL = sys.float_info.max

OUTPUT_DIR_ENV = 'PYFEATBENCH_OUTPUT_DIR'
WORKERS_ENV = 'PYFEATBENCH_WORKERS'

CSV_COLUMNS = (
    'detector',
    'descriptor',
    'total_time_sec',
    'accuracy_pct',
    'ground_truth_cases',
    'correct_matches_per_sec',
)
REPORT_FILE = 'report.csv'
STATS_FILE = 'stats.json'
METADATA_FILE = 'metadata.json'
MANIFEST_FILE = 'manifest.json'
GRID_FILE = 'grid.json'
CACHE_FILE = 'pair_stats.jsonl'


class DetectorTypes(CaseInsensitiveStrEnum):
    """Keypoint detectors.

    Attributes:
        ORB: oFAST on a Gaussian pyramid ranked by Harris response.
        SURF: Box-filter Hessian determinant.
        SIFT: Difference-of-Gaussian extrema.
        FAST: Single-scale segment test.
        BRISK: Scale-space FAST with octave and intra-octave layers.
    """

    ORB = 'ORB'
    SURF = 'SURF'
    SIFT = 'SIFT'
    FAST = 'FAST'
    BRISK = 'BRISK'


class DescriptorTypes(CaseInsensitiveStrEnum):
    """Descriptor extractors.

    Attributes:
        BRIEF: 256 unsteered binary intensity tests.
        BRISK: 512 binary tests on a 60-point concentric pattern.
        SIFT: 128-bin gradient orientation histograms.
        SURF: 64 sums of Haar wavelet responses.
        ORB: 256 binary tests steered by the keypoint orientation.
    """

    BRIEF = 'BRIEF'
    BRISK = 'BRISK'
    SIFT = 'SIFT'
    SURF = 'SURF'
    ORB = 'ORB'


class DescriptorKind(StrEnum):
    """Descriptor value domain, selecting the distance kernel."""

    BINARY = 'binary'
    REAL = 'real'


class HistogramMethod(CaseInsensitiveStrEnum):
    """Histogram comparison functions, all mapped to a similarity in [-1, 1].

    Attributes:
        CORRELATION: Pearson correlation of the bin vectors.
        INTERSECTION: Sum of bin-wise minima.
        CHI_SQUARE: 1 / (1 + symmetric chi-square distance).
        BHATTACHARYYA: Bhattacharyya coefficient.
    """

    CORRELATION = 'correlation'
    INTERSECTION = 'intersection'
    CHI_SQUARE = 'chi_square'
    BHATTACHARYYA = 'bhattacharyya'


class AccuracyPolicy(CaseInsensitiveStrEnum):
    """Predicate labelling a (template, query) case as positive.

    Attributes:
        POSE_TOLERANT: Same point, any height, yaw difference within tolerance.
        STRICT: Same point, height and yaw.
    """

    POSE_TOLERANT = 'pose_tolerant'
    STRICT = 'strict'


class CandidatePolicy(CaseInsensitiveStrEnum):
    """Construction of the candidate poses bounding a location cube.

    Attributes:
        SIX_POINT: Three heights at the matched yaw and its neighbour toward 0.
        YAW_WINDOW: Three heights at every grid yaw.
        SINGLE: Three heights at the matched yaw only.
    """

    SIX_POINT = 'six_point'
    YAW_WINDOW = 'yaw_window'
    SINGLE = 'single'


class TimingMode(StrEnum):
    """Mode a report was produced in; only sequential runs carry wall-clock meaning."""

    TIMING = 'timing'
    PARALLEL = 'parallel'


class MetricAxis(CaseInsensitiveStrEnum):
    """Match-quality metrics available to the scatter report."""

    N_CORRECT = 'n_correct'
    MEAN_ANGLE_DIFF = 'mean_angle_diff'
    MIN_DISTANCE = 'min_distance'


class PoseCase(StrEnum):
    """Pose relation of a (template, query) pair of the same capture point.

    SAME is an identical pose; the others are the query yaw minus the
    template yaw in degrees.
    """

    SAME = 'same'
    MINUS_30 = '-30'
    MINUS_15 = '-15'
    ZERO = '0'
    PLUS_15 = '15'
    PLUS_30 = '30'


class ExitCode(IntEnumMixin):
    """Process exit codes of the command line interface."""

    SUCCESS = 0
    CONFIG_ERROR = 1
    PIPELINE_ERROR = 2


EXCLUDED_COMBINATIONS = frozenset(
    {
        (DetectorTypes.SIFT, DescriptorTypes.ORB),
        (DetectorTypes.BRISK, DescriptorTypes.BRISK),
    }
)
"""Detector/descriptor pairs absent from the benchmark matrix."""
