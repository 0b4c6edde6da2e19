"""CEV1 context-embedding exporter backed by a pre-trained BERT encoder."""

__version__ = "0.1.0"

from .export import ExportError, ExportManifest, export, verify_export  # noqa: F401
