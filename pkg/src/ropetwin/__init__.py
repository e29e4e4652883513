"""Rope digital-twin toolkit.

Grounds multi-view depth snapshots of a rope into an ordered particle state,
evolves it in an XPBD Cosserat-rod simulation, replays recorded bimanual
teleoperation into labeled (state, action-chunk) datasets, and serves a live
teleoperation loop.
"""

__version__ = "0.1.0"
