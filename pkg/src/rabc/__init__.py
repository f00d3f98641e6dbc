"""Automatic amortized resource analysis for a small Rust-like calculus."""
from .inference import AnalysisResult, analyze_program
from .syntax import parse_program, validate

__all__ = ["AnalysisResult", "analyze_program", "parse_program", "validate"]
__version__ = "0.1.0"
