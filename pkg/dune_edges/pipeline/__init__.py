from dune_edges.pipeline.config import PipelineConfig, load_config
from dune_edges.pipeline.io import load_image, save_image
from dune_edges.pipeline.report import validate_report
from dune_edges.pipeline.run import run
