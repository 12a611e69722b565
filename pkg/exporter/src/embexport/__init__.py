"""Document-embedding exporter: pretrained encoder -> EMB1 file."""

from .emb1 import write_emb1
from .exporter import ExporterConfig, ModelLoadError, export

__version__ = "0.1.0"
