"""Feature detector and descriptor benchmark library."""

from pyfeatbench.bench import BenchmarkRunner, run_combination
from pyfeatbench.combination_map import combination_matrix
from pyfeatbench.imgcore import Image, load_image
from pyfeatbench.models.bench_models import CombinationId, DatasetManifest, StatsDump
from pyfeatbench.models.config_models import RunConfig
from pyfeatbench.synthetic import generate_pose_grid

__all__ = [
    'BenchmarkRunner',
    'CombinationId',
    'DatasetManifest',
    'Image',
    'RunConfig',
    'StatsDump',
    'combination_matrix',
    'generate_pose_grid',
    'load_image',
    'run_combination',
]
