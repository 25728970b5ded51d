"""grsreach - Guaranteed Reachable Sets and learn-control synthesis

Computes the guaranteed reachable set of a control-affine system known only
through its dynamics at one point and Lipschitz bounds, and steers the real
system to a chosen boundary point by learning from its own trajectory.

"""

__version__ = "0.1.0"
