"""Leaf area index estimation from per-plant canopy crops.

Three feature extractors (green-area edge pipeline, handcrafted color/shape/
texture vocabulary, CNN embeddings via a serialized inference graph), three
regressors (linear least squares, RBF epsilon-SVR, random forest), and an
MSE/MAE/MAPE evaluation matrix over every extractor-model pair.
"""

from .config import PipelineConfig, RegressorConfig, SplitConfig, VocabConfig, load_config
from .dataset import (AnnotationRecord, DatasetSplit, DatasetStats, LabeledSample, PlantCrop,
                      dataset_stats, extract_crops, load_image_rgb, parse_annotations, split_dataset)
from .embeddings import (EmbedConfig, EmbeddingStore, embeddings_to_samples, load_embeddings,
                         resize_bilinear, run_embedding_model, write_embeddings)
from .errors import ComputationError, DataError, PipelineError
from .evaluation import (EXTRACTOR_ORDER, MODEL_ORDER, MatrixHyperparams, Metrics, ResultsTable,
                         compute_metrics, render_table, run_matrix)
from .feature_io import read_features, write_features
from .green import GreenAreaFeatures, GreenPipelineConfig, extract_green_features, green_feature_names
from .imgproc import (EdgeParams, canny_edges, gaussian_blur, gaussian_kernel, green_mask,
                      rgb_to_hsv, saturate_above, sobel_gradients, threshold_binary, to_gray)
from .regressors import (ForestModel, LinearModel, StandardizerParams, SvrModel, fit_forest,
                         fit_linear, fit_svr, load_model, predict, predict_many, save_model)
from .synthetic import build_benchmark, synthetic_crop, write_benchmark
from .vocab import (GlcmMatrix, HaralickStats, color_histogram, glcm_compute, haralick_stats,
                    hu_moments, vocab_feature_names, vocab_features)

__version__ = "0.1.0"

__all__ = [
    "PipelineError", "DataError", "ComputationError",
    "AnnotationRecord", "PlantCrop", "LabeledSample", "DatasetStats", "DatasetSplit",
    "parse_annotations", "extract_crops", "load_image_rgb", "split_dataset", "dataset_stats",
    "EdgeParams", "to_gray", "threshold_binary", "saturate_above", "rgb_to_hsv", "green_mask",
    "gaussian_kernel", "gaussian_blur", "sobel_gradients", "canny_edges",
    "GreenPipelineConfig", "GreenAreaFeatures", "extract_green_features", "green_feature_names",
    "GlcmMatrix", "HaralickStats", "color_histogram", "hu_moments", "glcm_compute",
    "haralick_stats", "vocab_features", "vocab_feature_names",
    "EmbedConfig", "EmbeddingStore", "load_embeddings", "write_embeddings",
    "run_embedding_model", "embeddings_to_samples", "resize_bilinear",
    "StandardizerParams", "LinearModel", "SvrModel", "ForestModel",
    "fit_linear", "fit_svr", "fit_forest", "predict", "predict_many", "save_model", "load_model",
    "Metrics", "ResultsTable", "MatrixHyperparams", "compute_metrics", "run_matrix", "render_table",
    "EXTRACTOR_ORDER", "MODEL_ORDER",
    "read_features", "write_features",
    "PipelineConfig", "VocabConfig", "RegressorConfig", "SplitConfig", "load_config",
    "build_benchmark", "synthetic_crop", "write_benchmark",
    "__version__",
]
