"""Exact similarity search in metric spaces."""

from __future__ import annotations

from .dataset import Dataset, dna_example, gen_synthetic, string_dataset, vector_dataset
from .indexes import INDEX_KINDS, build_index
from .metrics import CountedMetric, MetricDescriptor, edit_distance, intrinsic_dim, lp_distance
from .query import ResultSet, brute_force_knn, brute_force_range

__all__ = [
    "CountedMetric", "Dataset", "INDEX_KINDS", "MetricDescriptor", "ResultSet",
    "brute_force_knn", "brute_force_range", "build_index", "dna_example", "edit_distance",
    "gen_synthetic", "intrinsic_dim", "lp_distance", "string_dataset", "vector_dataset",
]
