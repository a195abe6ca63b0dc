"""Core types shared by the pipeline, scheduler and evaluation."""

from .contracts import Action, DecisionRecord, DecisionSource, Detector

__all__ = ["Action", "DecisionRecord", "DecisionSource", "Detector"]
