"""Disruption recovery for single rail lines.

Builds an event-activity network from a line topology, timetable and
blockage, encodes the combined trip/circulation rescheduling problem as a
big-M integer program, solves it by branch and bound and verifies every
solution independently.
"""

__version__ = "0.1.0"
