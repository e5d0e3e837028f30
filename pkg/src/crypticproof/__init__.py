"""Solve cryptic crossword clues by generating answers and checking proofs of them."""

from __future__ import annotations

from .data import ClueRecord, WordplayRecord, load_cryptonite, load_wordplay, strip_markup
from .dsl import ParseError, ProofScript, lint_proof, parse_proof, render_proof
from .evalharness import (
    AccuracyReport,
    EmbeddingStore,
    LetterMask,
    evaluate,
    filter_by_mask,
    knn_answer,
    make_mask,
)
from .gateway import Gateway, HTTPBackend, ModelEndpoint, PromptBundle, ScriptedBackend
from .knowledge import Action, KnowledgeBase, matches_pattern
from .pipeline import PipelineConfig, SolveResult, solve_clue
from .verifier import VerificationReport, render_feedback, verify, verify_source

__all__ = [
    "AccuracyReport", "Action", "ClueRecord", "EmbeddingStore", "Gateway", "HTTPBackend",
    "KnowledgeBase", "LetterMask", "ModelEndpoint", "ParseError", "PipelineConfig",
    "PromptBundle", "ProofScript", "ScriptedBackend", "SolveResult", "VerificationReport",
    "WordplayRecord", "evaluate", "filter_by_mask", "knn_answer", "lint_proof", "load_cryptonite",
    "load_wordplay", "make_mask", "matches_pattern", "parse_proof", "render_feedback",
    "render_proof", "solve_clue", "strip_markup", "verify", "verify_source",
]
