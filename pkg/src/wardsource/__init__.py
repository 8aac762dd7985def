"""Bayesian attribution of a hospital infection to candidate infectors,
an unidentified in-hospital source, or the community.

For one focal patient, the engine combines symptom-onset times,
admission times, pairwise pathogen-genome SNP distances, and day-by-day
co-location records into a posterior over the possible sources, plus the
implied probability that the infection was acquired in hospital.
"""

from .distributions import DelaporteParams, WaitingTimeModel
from .epidemiology import CaseRecord, EpidemicFrame, TransmissionProfile
from .genomics import Alignment, PairwiseGeneticSummary, PathogenGeneticParams
from .inference import (
    COMMUNITY,
    HOSPITAL,
    DataToggles,
    DegenerateEvidenceError,
    Hypothesis,
    SourcePosterior,
    SourcePrior,
    ablation_sequence,
    posterior,
)
from .ingest import ModelParams, WardSnapshot, build_snapshot, load_ward

__version__ = "0.1.0"

__all__ = [
    "Alignment",
    "CaseRecord",
    "COMMUNITY",
    "DataToggles",
    "DegenerateEvidenceError",
    "DelaporteParams",
    "EpidemicFrame",
    "HOSPITAL",
    "Hypothesis",
    "ModelParams",
    "PairwiseGeneticSummary",
    "PathogenGeneticParams",
    "SourcePosterior",
    "SourcePrior",
    "TransmissionProfile",
    "WaitingTimeModel",
    "WardSnapshot",
    "ablation_sequence",
    "build_snapshot",
    "load_ward",
    "posterior",
]
