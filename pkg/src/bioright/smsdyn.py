"""Free-floating base + single-joint arm dynamics on a shared rotation
axis: mass matrix, Coriolis terms, momentum-conserving playback, RK4
integration, and PD joint tracking. Gravity is zero throughout."""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import Diverged, ModeUnsupported, SingularMass

DIVERGE_LIMIT = 1e6


class Mode(Enum):
    COAXIAL = "Coaxial"
    PLANAR_OFFSET = "PlanarOffset"


@dataclass(frozen=True)
class SmsParams:
    """Masses, inertias, and geometry of the two-body model.

    In Coaxial mode both centers of mass sit on the rotation axis
    (hinge_offset = arm_cm_offset = 0) and arm_inertia_cm is the arm's
    effective inertia about the system axis.
    """

    base_mass: float
    arm_mass: float
    base_inertia: float
    arm_inertia_cm: float
    hinge_offset: float = 0.0
    arm_cm_offset: float = 0.0
    mode: Mode = Mode.COAXIAL

    def __post_init__(self):
        if self.base_mass <= 0 or self.arm_mass <= 0:
            raise ValueError("masses must be positive")
        if self.base_inertia < 0 or self.arm_inertia_cm < 0:
            raise ValueError("inertias must be non-negative")
        if self.hinge_offset < 0 or self.arm_cm_offset < 0:
            raise ValueError("offsets must be non-negative")
        if self.mode is Mode.COAXIAL and (self.hinge_offset or self.arm_cm_offset):
            raise ValueError("Coaxial mode requires zero offsets")

    @property
    def reduced_mass(self):
        return self.base_mass * self.arm_mass / (self.base_mass + self.arm_mass)


@dataclass
class SmsState:
    base_angle: float
    joint_angle: float
    base_rate: float
    joint_rate: float
    t: float = 0.0

    def as_array(self):
        return np.array([self.base_angle, self.joint_angle,
                         self.base_rate, self.joint_rate])


@dataclass
class SmsTrajectory:
    """Simulation history on a uniform time grid."""

    times: np.ndarray
    base_angle: np.ndarray
    joint_angle: np.ndarray
    base_rate: np.ndarray
    joint_rate: np.ndarray
    torque: np.ndarray
    momentum: np.ndarray
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PdGains:
    kp: float
    kd: float
    torque_limit: float

    def __post_init__(self):
        if self.kp < 0 or self.kd < 0:
            raise ValueError("gains must be non-negative")
        if self.torque_limit <= 0:
            raise ValueError("torque_limit must be positive")


def ets7_params(reduced_base=False):
    """ETS-VII roll-axis model; reduced_base divides the base inertia by 20."""
    return SmsParams(
        base_mass=2550.0,
        arm_mass=140.4,
        base_inertia=6200.0 / 20.0 if reduced_base else 6200.0,
        arm_inertia_cm=360.0,
        mode=Mode.COAXIAL,
    )


def lizard_params():
    """Lizard body/tail inertias about the roll axis (SI units)."""
    return SmsParams(
        base_mass=2.9e-3,
        arm_mass=0.29e-3,
        base_inertia=6.6e-8,
        arm_inertia_cm=5.29e-8,
        mode=Mode.COAXIAL,
    )


def mass_matrix(p, theta):
    """2x2 symmetric inertia matrix in (base angle, joint angle) coordinates."""
    if p.mode is Mode.COAXIAL:
        ia = p.arm_inertia_cm
        return np.array([[p.base_inertia + ia, ia], [ia, ia]])
    mu = p.reduced_mass
    rh, d = p.hinge_offset, p.arm_cm_offset
    c = math.cos(theta)
    m11 = p.base_inertia + p.arm_inertia_cm + mu * (rh * rh + d * d + 2 * rh * d * c)
    m12 = p.arm_inertia_cm + mu * (d * d + rh * d * c)
    m22 = p.arm_inertia_cm + mu * d * d
    return np.array([[m11, m12], [m12, m22]])


def coriolis(p, theta, base_rate, joint_rate):
    """Coriolis/centrifugal generalized-force vector C(q, qdot) qdot."""
    if p.mode is Mode.COAXIAL:
        return np.zeros(2)
    h = -p.reduced_mass * p.hinge_offset * p.arm_cm_offset * math.sin(theta)
    row1 = h * joint_rate * base_rate + h * (base_rate + joint_rate) * joint_rate
    row2 = -h * base_rate * base_rate
    return np.array([row1, row2])


def angular_momentum(p, s):
    """System angular momentum: first row of M(theta) qdot."""
    M = mass_matrix(p, s.joint_angle)
    return float(M[0, 0] * s.base_rate + M[0, 1] * s.joint_rate)


def kinetic_energy(p, s):
    qd = np.array([s.base_rate, s.joint_rate])
    M = mass_matrix(p, s.joint_angle)
    return 0.5 * float(qd @ M @ qd)


def _accel(p, y, tau_joint):
    theta = y[1]
    qd = y[2:4]
    M = mass_matrix(p, theta)
    m11, m12, m22 = M[0, 0], M[0, 1], M[1, 1]
    det = m11 * m22 - m12 * m12
    if abs(det) < 1e-300:
        raise SingularMass("mass matrix not invertible")
    c = coriolis(p, theta, qd[0], qd[1])
    r0, r1 = -c[0], tau_joint - c[1]
    qdd0 = (m22 * r0 - m12 * r1) / det
    qdd1 = (m11 * r1 - m12 * r0) / det
    return np.array([qd[0], qd[1], qdd0, qdd1])


def step_rk4(p, s, tau_joint, dt):
    """Classical 4th-order step with the joint torque held over the step."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    y = s.as_array()
    k1 = _accel(p, y, tau_joint)
    k2 = _accel(p, y + 0.5 * dt * k1, tau_joint)
    k3 = _accel(p, y + 0.5 * dt * k2, tau_joint)
    k4 = _accel(p, y + dt * k3, tau_joint)
    y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return SmsState(y[0], y[1], y[2], y[3], s.t + dt)


def simulate_prescribed(p, joint_traj, L0=0.0, base_angle0=math.pi):
    """Kinematic playback of a joint trajectory under momentum conservation.

    The joint angle/rate are imposed; the base rate follows from
    L0 = M11 phidot + M12 thetadot at every sample and the base angle is
    integrated by the trapezoid rule. The joint torque required to realize
    the motion is back-computed and reported.
    """
    if joint_traj.rate is None:
        raise ValueError("joint trajectory must carry rates")
    times = joint_traj.times
    n = len(times)
    theta = joint_traj.angle
    theta_d = joint_traj.rate
    m11 = np.empty(n)
    m12 = np.empty(n)
    m22 = np.empty(n)
    for i in range(n):
        M = mass_matrix(p, theta[i])
        m11[i], m12[i], m22[i] = M[0, 0], M[0, 1], M[1, 1]
    phi_d = (L0 - m12 * theta_d) / m11
    phi = base_angle0 + np.concatenate(
        ([0.0], np.cumsum(0.5 * np.diff(times) * (phi_d[:-1] + phi_d[1:]))))
    phi_dd = np.gradient(phi_d, times) if n >= 3 else np.zeros(n)
    theta_dd = np.gradient(theta_d, times) if n >= 3 else np.zeros(n)
    tau = np.empty(n)
    for i in range(n):
        cvec = coriolis(p, theta[i], phi_d[i], theta_d[i])
        tau[i] = m12[i] * phi_dd[i] + m22[i] * theta_dd[i] + cvec[1]
    L = m11 * phi_d + m12 * theta_d
    return SmsTrajectory(times.copy(), phi, theta.copy(), phi_d,
                         theta_d.copy(), tau, L,
                         metadata={"mode": "prescribed", "L0": L0})


def simulate_pd(p, joint_ref, gains, dt, base_angle0=math.pi,
                joint_angle0=None):
    """PD joint tracking of a reference trajectory on a free-floating base.

    The joint torque is clamped to the gains' torque limit; the base is
    unactuated. Raises Diverged when any state magnitude exceeds 1e6.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if joint_angle0 is None:
        joint_angle0 = float(joint_ref.angle[0])
    t_end = float(joint_ref.times[-1])
    n = int(round(t_end / dt)) + 1
    ref_rate = joint_ref.rate if joint_ref.rate is not None \
        else np.zeros(len(joint_ref.times))
    s = SmsState(base_angle0, joint_angle0, 0.0, 0.0, 0.0)
    times = np.empty(n)
    phi = np.empty(n)
    theta = np.empty(n)
    phi_d = np.empty(n)
    theta_d = np.empty(n)
    tau = np.empty(n)
    L = np.empty(n)
    err = np.empty(n)
    for i in range(n):
        t = i * dt
        th_ref = float(np.interp(t, joint_ref.times, joint_ref.angle))
        thd_ref = float(np.interp(t, joint_ref.times, ref_rate))
        u = gains.kp * (th_ref - s.joint_angle) + gains.kd * (thd_ref - s.joint_rate)
        u = float(np.clip(u, -gains.torque_limit, gains.torque_limit))
        times[i], phi[i], theta[i] = t, s.base_angle, s.joint_angle
        phi_d[i], theta_d[i], tau[i] = s.base_rate, s.joint_rate, u
        L[i] = angular_momentum(p, s)
        err[i] = th_ref - s.joint_angle
        if i + 1 < n:
            s = step_rk4(p, s, u, dt)
            if np.max(np.abs(s.as_array())) > DIVERGE_LIMIT:
                raise Diverged(f"state blew up at t = {s.t:.3f} s")
    return SmsTrajectory(times, phi, theta, phi_d, theta_d, tau, L,
                         metadata={"mode": "pd", "kp": gains.kp,
                                   "kd": gains.kd,
                                   "torque_limit": gains.torque_limit,
                                   "tracking_error": err})


def base_reaction_estimate(p, delta_theta):
    """Closed-form base rotation for a joint sweep in Coaxial mode."""
    if p.mode is not Mode.COAXIAL:
        raise ModeUnsupported("base reaction is path-dependent with offsets")
    ia = p.arm_inertia_cm
    return -(ia / (p.base_inertia + ia)) * delta_theta


def inertia_ratio(p):
    """Arm effective inertia over base inertia."""
    return p.arm_inertia_cm / p.base_inertia


def mass_ratio(p):
    return p.arm_mass / p.base_mass


def write_trajectory_csv(traj, stream):
    """Emit `t,phi_deg,theta_deg,phi_rate_deg_s,theta_rate_deg_s,tau_Nm,L`."""
    stream.write("t,phi_deg,theta_deg,phi_rate_deg_s,theta_rate_deg_s,tau_Nm,L\n")
    r2d = 180.0 / math.pi
    for i, t in enumerate(traj.times):
        stream.write(f"{t:.9g},{traj.base_angle[i] * r2d:.9g},"
                     f"{traj.joint_angle[i] * r2d:.9g},"
                     f"{traj.base_rate[i] * r2d:.9g},"
                     f"{traj.joint_rate[i] * r2d:.9g},"
                     f"{traj.torque[i]:.9g},{traj.momentum[i]:.9g}\n")


# Config file handling: `key = value` lines, '#' comments.

CONFIG_DEFAULTS = {
    "base_mass": 2550.0,
    "arm_mass": 140.4,
    "base_inertia": 6200.0,
    "arm_inertia_cm": 360.0,
    "hinge_offset": 0.0,
    "arm_cm_offset": 0.0,
    "mode": "Coaxial",
    "dt": 0.01,
    "kp": 2000.0,
    "kd": 20000.0,
    "torque_limit": 10.0,
    "base_angle0_deg": 180.0,
    "joint_angle0_deg": 180.0,
}


def parse_config(text):
    """Parse a key = value config into a plain dict over CONFIG_DEFAULTS."""
    cfg = dict(CONFIG_DEFAULTS)
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in cfg:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key == "mode":
            if value not in (Mode.COAXIAL.value, Mode.PLANAR_OFFSET.value):
                raise ValueError(f"config line {lineno}: bad mode {value!r}")
            cfg[key] = value
        else:
            cfg[key] = float(value)
    return cfg


def params_from_config(cfg):
    return SmsParams(
        base_mass=cfg["base_mass"],
        arm_mass=cfg["arm_mass"],
        base_inertia=cfg["base_inertia"],
        arm_inertia_cm=cfg["arm_inertia_cm"],
        hinge_offset=cfg["hinge_offset"],
        arm_cm_offset=cfg["arm_cm_offset"],
        mode=Mode(cfg["mode"]),
    )


def gains_from_config(cfg):
    return PdGains(kp=cfg["kp"], kd=cfg["kd"], torque_limit=cfg["torque_limit"])
