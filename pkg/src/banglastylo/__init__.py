"""Bangla authorship attribution: TF-IDF + linear SVM with frozen-model
stop-word ablation."""

__version__ = "0.1.0"
