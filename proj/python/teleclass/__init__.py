# Copyright 2026 The teleclass Authors
# SPDX-License-Identifier: Apache-2.0
"""Taxonomy-guided weakly supervised multi-label text classification."""

from ._teleclass import (
    STAGES,
    BackendError,
    Error,
    NotFoundError,
    NumericError,
    ParseError,
    Pipeline,
    PrerequisiteError,
    Taxonomy,
    ValidationError,
    affinity,
    bm25_score,
    build_targets,
    candidate_search,
    example_f1,
    largest_gap_cut,
    mrr,
    precision_at_k,
    retained_count,
)

__all__ = [
    "STAGES",
    "BackendError",
    "Error",
    "NotFoundError",
    "NumericError",
    "ParseError",
    "Pipeline",
    "PrerequisiteError",
    "Taxonomy",
    "ValidationError",
    "affinity",
    "bm25_score",
    "build_targets",
    "candidate_search",
    "example_f1",
    "largest_gap_cut",
    "mrr",
    "precision_at_k",
    "retained_count",
]
