"""Forward evaluation of the three-term behavioral cost on simulated
trajectories and enumeration of the weight simplex."""

from dataclasses import dataclass, field

import numpy as np

from .errors import MissingTorque

FUNCTIONAL_DEFINITIONS = {
    "phi_safety": "peak |base rate| / rate limit",
    "phi_stability": ("|terminal base angle - target| / pi"
                      " + mean |base rate| / peak |base rate|"),
    "phi_efficiency": "integral of tau^2 dt / (torque_limit^2 * duration)",
}


@dataclass(frozen=True)
class ObjectiveWeights:
    w_safety: float
    w_stability: float
    w_efficiency: float

    def __post_init__(self):
        if min(self.w_safety, self.w_stability, self.w_efficiency) < 0:
            raise ValueError("weights must be non-negative")
        if self.w_safety + self.w_stability + self.w_efficiency <= 0:
            raise ValueError("weights must not all be zero")

    def normalized(self):
        s = self.w_safety + self.w_stability + self.w_efficiency
        return ObjectiveWeights(self.w_safety / s, self.w_stability / s,
                                self.w_efficiency / s)

    def as_tuple(self):
        return (self.w_safety, self.w_stability, self.w_efficiency)


@dataclass(frozen=True)
class ObjectiveContext:
    """Normalization constants the functionals need."""

    rate_limit: float
    base_angle_target: float
    torque_limit: float


@dataclass
class ObjectiveRow:
    weights: ObjectiveWeights
    phi_safety: float
    phi_stability: float
    phi_efficiency: float
    J: float


@dataclass
class ObjectiveReport:
    rows: list
    argmin: ObjectiveRow
    definitions: dict = field(default_factory=lambda: dict(FUNCTIONAL_DEFINITIONS))


def phi_safety(traj, rate_limit):
    """Fraction of the base-rate safety budget consumed; may exceed 1."""
    if rate_limit <= 0:
        raise ValueError("rate_limit must be positive")
    return float(np.max(np.abs(traj.base_rate))) / rate_limit


def phi_stability(traj, base_angle_target):
    """Terminal pointing error (per pi) plus normalized mean base motion.

    Zero only when the base sits motionless at the target.
    """
    terminal = abs(float(traj.base_angle[-1]) - base_angle_target) / np.pi
    peak = float(np.max(np.abs(traj.base_rate)))
    if peak == 0.0:
        return terminal
    duration = float(traj.times[-1] - traj.times[0])
    motion = float(np.trapezoid(np.abs(traj.base_rate), traj.times)) / duration
    return terminal + motion / peak


def phi_efficiency(traj, torque_limit):
    """Torque-squared integral normalized by the saturated-torque budget."""
    if traj.torque is None:
        raise MissingTorque("trajectory carries no torque series")
    duration = float(traj.times[-1] - traj.times[0])
    integral = float(np.trapezoid(traj.torque ** 2, traj.times))
    return integral / (torque_limit ** 2 * duration)


def evaluate(weights, traj, context):
    """Weighted sum of the three functionals; returns (J, row)."""
    ps = phi_safety(traj, context.rate_limit)
    pst = phi_stability(traj, context.base_angle_target)
    pe = phi_efficiency(traj, context.torque_limit)
    J = (weights.w_safety * ps + weights.w_stability * pst
         + weights.w_efficiency * pe)
    return J, ObjectiveRow(weights, ps, pst, pe, J)


def simplex_grid(resolution):
    """All weight triples with components in {0, 1/n, ..., 1} summing to 1,
    in lexicographic order. Count is C(n+2, 2)."""
    if resolution < 2:
        raise ValueError("grid resolution must be >= 2")
    n = resolution
    grid = []
    for i in range(n + 1):
        for j in range(n - i + 1):
            k = n - i - j
            grid.append(ObjectiveWeights(i / n, j / n, k / n))
    return grid


def weight_sweep(resolution, traj, context):
    """Evaluate the cost over the weight simplex for one trajectory."""
    rows = []
    for w in simplex_grid(resolution):
        _, row = evaluate(w, traj, context)
        rows.append(row)
    argmin = min(rows, key=lambda r: r.J)
    return ObjectiveReport(rows, argmin)


def write_report_csv(report, stream):
    """Emit the sweep rows plus an argmin footer."""
    for name, definition in sorted(report.definitions.items()):
        stream.write(f"# {name}: {definition}\n")
    stream.write("w_safety,w_stability,w_efficiency,"
                 "phi_safety,phi_stability,phi_efficiency,J\n")
    for row in report.rows:
        w = row.weights
        stream.write(f"{w.w_safety:.6f},{w.w_stability:.6f},"
                     f"{w.w_efficiency:.6f},{row.phi_safety:.9g},"
                     f"{row.phi_stability:.9g},{row.phi_efficiency:.9g},"
                     f"{row.J:.9g}\n")
    a = report.argmin
    stream.write(f"# argmin,{a.weights.w_safety:.6f},"
                 f"{a.weights.w_stability:.6f},{a.weights.w_efficiency:.6f},"
                 f"J={a.J:.9g}\n")
