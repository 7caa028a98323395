"""Lineage forest reconstruction and segmentation-error correction for labeled cell movies."""

from ._cellforest import (
    AnalysisParams,
    CellKey,
    CorrectionEvent,
    CorrectionResult,
    ErrorConfig,
    GrowthOverflow,
    InputError,
    LineageForest,
    Movie,
    SimConfig,
    Simulation,
    TruthComparison,
    ValidityReport,
    compare_to_truth,
    correct,
    inject_errors,
    match_frame_pair,
    read_movie,
    simulate,
    track,
    validity,
    write_movie,
)

__all__ = [name for name in dir() if not name.startswith("_")]
