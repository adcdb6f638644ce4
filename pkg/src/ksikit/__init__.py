"""Keyboard-surface interaction evaluation toolkit.

Modules:
  events      session data model and the .ksi.jsonl codec
  geometry    stereo triangulation and touch-plane calibration
  pipeline    sensor-to-pointer mappings and the mode state machine
  experiment  Fitts-task plans, trial sequencing, metric extraction
  simulate    synthetic operator replaying measured behavior
  stats       outlier filter, power law, Shapiro-Wilk, Wilcoxon
  report      study-level aggregation and report files
  cli         command-line interface (also `python -m ksikit.cli`)
"""

__version__ = "0.1.0"
