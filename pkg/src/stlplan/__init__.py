"""Plan trajectories that satisfy signal temporal logic tasks.

The pipeline: parse a formula, eliminate disjunctions, decompose each disjunct
into timed reach/invariance progresses, allocate timed waypoints with a
depth-first search over an exact integer constraint store, stitch segments
into a planned signal, then track it in a double-integrator world and monitor
the executed robustness.
"""

__version__ = "0.1.0"
