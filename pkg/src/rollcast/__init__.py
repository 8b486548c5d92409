"""rollcast: per-artist play-count trend forecasting.

Small recurrent sequence models trained per artist, wrapped in a rolling
prediction loop that turns one long-horizon forecast into many short ones,
scored with a weighted relative-error metric against classical baselines.
"""

__version__ = "0.1.0"
