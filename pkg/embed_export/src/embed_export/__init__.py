"""Offline exporter for the canopylai embedding column: serialize a ResNet50
feature trunk as an inference graph, or precompute crop embeddings into the
EMB1 interchange format, each with a JSON manifest.
"""

from .backbone import CHANNEL_MEAN, CHANNEL_STD, FEATURE_DIM, INPUT_SIZE, build_backbone, run_native
from .emb_io import ExportManifest, manifest_path, write_embedding_file, write_manifest
from .errors import ExportError
from .export import export_embeddings, export_graph
from .graph_writer import graph_bytes
from .preprocess import preprocess_image, resize_bilinear

__version__ = "0.1.0"

__all__ = [
    "ExportError", "ExportManifest",
    "FEATURE_DIM", "INPUT_SIZE", "CHANNEL_MEAN", "CHANNEL_STD",
    "build_backbone", "run_native", "graph_bytes",
    "preprocess_image", "resize_bilinear",
    "export_graph", "export_embeddings",
    "write_embedding_file", "write_manifest", "manifest_path",
]
