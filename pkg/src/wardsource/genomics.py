"""Pathogen genome ingestion and pairwise genetic likelihood terms.

Sequences arrive as one pre-built multiple sequence alignment. Every
pairwise comparison first drops the columns where either sequence
carries a gap or an ambiguous base, then counts mismatches over the
surviving columns; the surviving column count is the pair's effective
genome length and rescales all per-site rates.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .distributions import DelaporteParams, LogProb, delaporte_log_pmf, poisson_log_pmf

# Unambiguous bases kept by the pairwise reduction; everything else in the
# alignment alphabet (N, gaps, IUPAC ambiguity codes) drops the column.
UNAMBIGUOUS = "ACGT"
_ALPHABET = frozenset(UNAMBIGUOUS + "UN-RYSWKMBDHV")
_KEEP_CODES = np.frombuffer(UNAMBIGUOUS.encode("ascii"), dtype=np.uint8)


class SequenceLengthMismatchError(ValueError):
    """Alignment rows do not all have the same number of columns."""


@dataclass(frozen=True)
class Alignment:
    """Immutable aligned sequences keyed by case id, all of equal length."""

    sequences: Mapping[str, str]
    length: int

    @classmethod
    def from_sequences(cls, sequences: Mapping[str, str]) -> "Alignment":
        if not sequences:
            raise ValueError("alignment must contain at least one sequence")
        normalized = {}
        length = None
        for case_id, seq in sequences.items():
            seq = seq.upper()
            if length is None:
                length = len(seq)
                if length == 0:
                    raise ValueError(f"sequence for {case_id!r} is empty")
            elif len(seq) != length:
                raise SequenceLengthMismatchError(
                    f"sequence for {case_id!r} has {len(seq)} columns, "
                    f"expected {length}"
                )
            bad = set(seq) - _ALPHABET
            if bad:
                raise ValueError(
                    f"sequence for {case_id!r} contains invalid symbols: "
                    f"{sorted(bad)}"
                )
            normalized[case_id] = seq
        return cls(sequences=normalized, length=length)


def parse_fasta_sequences(text: str, source: str = "<fasta>") -> dict[str, str]:
    """Extract id -> residues from FASTA text (wrapped or single-line).

    The record id is the first whitespace-delimited token after ``>`` and
    must match a case id byte-for-byte; residues are case-insensitive.
    """
    sequences: dict[str, str] = {}
    current_id: str | None = None
    chunks: list[str] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            if current_id is not None:
                sequences[current_id] = "".join(chunks)
            current_id = line[1:].split()[0] if line[1:].split() else ""
            if not current_id:
                raise ValueError(f"FASTA header with empty id in {source}")
            if current_id in sequences:
                raise ValueError(f"duplicate FASTA record id {current_id!r} in {source}")
            chunks = []
        else:
            if current_id is None:
                raise ValueError(f"FASTA data before first header in {source}")
            chunks.append(line)
    if current_id is None:
        raise ValueError(f"no FASTA records found in {source}")
    sequences[current_id] = "".join(chunks)
    return sequences


def read_fasta(path: str | Path) -> Alignment:
    """Read a FASTA file into an alignment (see parse_fasta_sequences)."""
    return Alignment.from_sequences(
        parse_fasta_sequences(Path(path).read_text(), source=str(path))
    )


@dataclass(frozen=True)
class PairwiseGeneticSummary:
    """SNP count and effective genome length for one pair after column reduction."""

    snps: int
    effective_length: int
    sample_gap_days: int = 0

    def __post_init__(self) -> None:
        if self.snps < 0 or self.effective_length < 0 or self.sample_gap_days < 0:
            raise ValueError("summary fields must be non-negative")
        if self.snps > self.effective_length:
            raise ValueError(
                f"snps ({self.snps}) cannot exceed effective length "
                f"({self.effective_length})"
            )


@dataclass(frozen=True)
class PathogenGeneticParams:
    """Pathogen biology constants for the genetic likelihoods.

    ``mu`` is the evolutionary rate in mutations per site per day, so
    expected mutation counts scale as ``days * mu * effective_length``.
    Exactly one sequencing-error mode is active: either a fixed additive
    rate (``error_constant``, the default 0.404 expected error SNPs per
    pair) or a per-base error probability (``error_per_base``, which
    contributes ``2 * E * effective_length``).
    """

    ne: float
    mu: float
    gen_time: float
    error_constant: float | None = 0.404
    error_per_base: float | None = None

    def __post_init__(self) -> None:
        for name in ("ne", "mu", "gen_time"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ValueError(f"{name} must be finite and > 0, got {value}")
        if (self.error_constant is None) == (self.error_per_base is None):
            raise ValueError(
                "exactly one of error_constant and error_per_base must be set"
            )
        active = (
            self.error_constant
            if self.error_constant is not None
            else self.error_per_base
        )
        if not (active >= 0.0 and math.isfinite(active)):
            raise ValueError(f"error term must be finite and >= 0, got {active}")

    def error_snps(self, effective_length: int) -> float:
        """Expected SNPs contributed by sequencing error for a pair."""
        if self.error_constant is not None:
            return self.error_constant
        return 2.0 * self.error_per_base * effective_length


def _codes(seq: str) -> np.ndarray:
    return np.frombuffer(seq.encode("ascii"), dtype=np.uint8)


def _keep_mask(codes: np.ndarray) -> np.ndarray:
    return np.isin(codes, _KEEP_CODES)


def reduce_pair(
    alignment: Alignment,
    i: str,
    j: str,
    sample_times: Mapping[str, int] | None = None,
) -> PairwiseGeneticSummary:
    """Reduce the alignment to one pair's comparable columns.

    Drops every column where either sequence has a gap or any symbol
    outside ACGT, counts mismatches over what survives, and records the
    absolute gap in days between the two sampling times (0 if either is
    missing). A summary with ``effective_length == 0`` means the pair has
    no comparable columns and its genetic data should be treated as
    missing.
    """
    for case_id in (i, j):
        if case_id not in alignment.sequences:
            raise KeyError(f"no sequence for case {case_id!r}")
    a = _codes(alignment.sequences[i])
    b = _codes(alignment.sequences[j])
    keep = _keep_mask(a) & _keep_mask(b)
    effective_length = int(keep.sum())
    snps = int(((a != b) & keep).sum())
    gap = 0
    if sample_times is not None and i in sample_times and j in sample_times:
        gap = abs(int(sample_times[i]) - int(sample_times[j]))
    return PairwiseGeneticSummary(
        snps=snps, effective_length=effective_length, sample_gap_days=gap
    )


class PairwiseReducer:
    """Memoized pairwise reductions over one immutable alignment.

    Safe for concurrent readers; inserts are serialized on a lock. Keys
    are unordered pairs, matching the symmetry of the reduction.
    """

    def __init__(
        self,
        alignment: Alignment,
        sample_times: Mapping[str, int] | None = None,
    ) -> None:
        self._alignment = alignment
        self._sample_times = dict(sample_times) if sample_times else None
        self._codes: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        self._memo: dict[tuple[str, str], PairwiseGeneticSummary] = {}
        self._lock = threading.Lock()

    def _prepared(self, case_id: str) -> tuple[np.ndarray, np.ndarray]:
        got = self._codes.get(case_id)
        if got is None:
            codes = _codes(self._alignment.sequences[case_id])
            got = (codes, _keep_mask(codes))
            with self._lock:
                self._codes.setdefault(case_id, got)
        return got

    def summary(self, i: str, j: str) -> PairwiseGeneticSummary:
        key = (i, j) if i <= j else (j, i)
        got = self._memo.get(key)
        if got is not None:
            return got
        for case_id in key:
            if case_id not in self._alignment.sequences:
                raise KeyError(f"no sequence for case {case_id!r}")
        a, keep_a = self._prepared(key[0])
        b, keep_b = self._prepared(key[1])
        keep = keep_a & keep_b
        gap = 0
        if (
            self._sample_times is not None
            and key[0] in self._sample_times
            and key[1] in self._sample_times
        ):
            gap = abs(self._sample_times[key[0]] - self._sample_times[key[1]])
        got = PairwiseGeneticSummary(
            snps=int(((a != b) & keep).sum()),
            effective_length=int(keep.sum()),
            sample_gap_days=gap,
        )
        with self._lock:
            self._memo.setdefault(key, got)
        return got


def null_genetic_log_lik(
    summary: PairwiseGeneticSummary, params: PathogenGeneticParams
) -> LogProb:
    """Log likelihood of the pair's SNP count when neither infected the other.

    Background relatedness: the time back to the pair's common ancestor
    is exponential with mean ``ne`` generations, making the mutation
    count geometric with mean ``2 * mu * gen_time * ne * effective_length``;
    adding Poisson sequencing error (plus the extra evolution implied by
    a sampling-time gap) gives the Poisson-geometric convolution.
    """
    if summary.effective_length == 0:
        raise ValueError(
            "pair has no comparable alignment columns; treat genetic data as missing"
        )
    alpha = 2.0 * params.mu * params.gen_time * params.ne * summary.effective_length
    lam = params.error_snps(summary.effective_length) + (
        summary.sample_gap_days * params.mu * summary.effective_length
    )
    return delaporte_log_pmf(summary.snps, DelaporteParams(alpha=alpha, lam=lam))


def direct_genetic_log_lik(
    summary: PairwiseGeneticSummary,
    t_infect: int,
    t_sample_focal: int,
    t_sample_candidate: int,
    params: PathogenGeneticParams,
) -> LogProb:
    """Log likelihood of the SNP count given direct transmission on ``t_infect``.

    With the infection day fixed, the two samples sit ``|t_s - t|`` days
    of independent evolution from their shared ancestor, so the SNP count
    is Poisson with the summed branch lengths times the per-site rate,
    plus the sequencing-error term.
    """
    if summary.effective_length == 0:
        raise ValueError(
            "pair has no comparable alignment columns; treat genetic data as missing"
        )
    branch_days = abs(t_sample_focal - t_infect) + abs(t_sample_candidate - t_infect)
    lam = branch_days * params.mu * summary.effective_length + params.error_snps(
        summary.effective_length
    )
    return poisson_log_pmf(summary.snps, lam)
