"""Palmprint recognition with 2-D scattering features, PCA and linear classifiers."""

from .classify import GalleryIndex, SvmModel, nn_predict, svm_predict, svm_train, svm_train_binary
from .dataset import LabeledDataset, SplitSpec, load_directory, split, synth_generate
from .features import FeatureSchema, extract_features, map_stats, split_blocks
from .filterbank import FilterBank, FilterBankConfig, build_filter_bank, dump_filters, littlewood_paley_report
from .pca import PcaModel, pca_fit, pca_project, retained_variance
from .scattering import ScatteringMaps, ScatteringPath, circular_convolve, enumerate_paths, transform_block

__version__ = "0.1.0"
