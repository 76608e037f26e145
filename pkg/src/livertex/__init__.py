"""Liver CT texture staging toolkit.

Pipeline: HU windowing and liver-masked slice extraction, self-supervised
restoration pretraining of a small conv encoder, LBP texture encoding, and
patient-level score classification evaluated by repeated cross-validated AUC.
"""

__version__ = "0.1.0"
