"""Pointer-generator abstractive summarization with adversarial
policy-gradient fine-tuning, built on a small reverse-mode autodiff core."""

__version__ = "0.1.0"
