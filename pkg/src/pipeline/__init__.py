from .config import DataSource, RunConfig, load_manifest_sources
from .runner import COMMANDS, PipelineRunner

__all__ = ["COMMANDS", "DataSource", "PipelineRunner", "RunConfig", "load_manifest_sources"]
