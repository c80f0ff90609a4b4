"""
Noisy odometry and loop-closure measurements and their information matrices.

Odometry measures the heading change and the travelled distance, each with
additive Gaussian noise, and converts them to (dx, dy) with the noisy heading
change; the result is biased and correlated. Loop closures measure the true
relative pose with independent additive noise per component.
"""

import math
from typing import List, Sequence, Tuple

import numpy as np

from .config import InfoMode, LoopClosureParams, OdomNoiseParams
from .exceptions import NumericalError
from .model import InformationMatrix, RelativeMeasurement, ScaledPose, wrap_angle, wrap_angles
from .rng import RngStream

_QUARTER = math.pi / 2.0
_SNAP_TOLERANCE = 1e-12


def _cos_sin(phi: float) -> Tuple[float, float]:
    """cos/sin that are exact for multiples of pi/2."""
    turns = phi / _QUARTER
    nearest = round(turns)
    if abs(turns - nearest) < _SNAP_TOLERANCE:
        return {0: (1.0, 0.0), 1: (0.0, 1.0), 2: (-1.0, 0.0), 3: (0.0, -1.0)}[nearest % 4]
    return math.cos(phi), math.sin(phi)


def odometry_measurement(
    prev: ScaledPose,
    curr: ScaledPose,
    p: OdomNoiseParams,
    rng: RngStream,
) -> RelativeMeasurement:
    """
    Measure the motion between two consecutive poses.

    Draws two standard normals (distance noise, then heading noise).

    Args:
        prev: Pose k - 1
        curr: Pose k
        p: Odometry noise parameters
        rng: Odometry stream of the agent

    Returns:
        Measurement in the frame of ``prev``, without information matrix
    """
    n_len, n_ang = rng.standard_normal(2)
    dtheta = wrap_angle(curr.heading - prev.heading + p.sigma_ang * n_ang)
    length = math.hypot(curr.x - prev.x, curr.y - prev.y) + p.sigma_pos * n_len
    return RelativeMeasurement(length * math.cos(dtheta), length * math.sin(dtheta), dtheta)


def odometry_measurements(
    poses: Sequence[ScaledPose],
    p: OdomNoiseParams,
    rng: RngStream,
) -> List[RelativeMeasurement]:
    """
    Measure every consecutive pair of a trajectory at once.

    Consumes the stream exactly as repeated :func:`odometry_measurement` calls.
    """
    n = len(poses) - 1
    if n <= 0:
        return []
    xyz = np.array([[q.x, q.y, q.heading] for q in poses])
    noise = rng.standard_normal((n, 2))
    delta = np.diff(xyz, axis=0)
    dtheta = wrap_angles(delta[:, 2] + p.sigma_ang * noise[:, 1])
    length = np.hypot(delta[:, 0], delta[:, 1]) + p.sigma_pos * noise[:, 0]
    dx = length * np.cos(dtheta)
    dy = length * np.sin(dtheta)
    return [RelativeMeasurement(float(a), float(b), float(c)) for a, b, c in zip(dx, dy, dtheta)]


def _relative_pose(pose_i: ScaledPose, pose_j: ScaledPose) -> Tuple[float, float, float]:
    c, s = _cos_sin(pose_j.heading)
    ex = pose_i.x - pose_j.x
    ey = pose_i.y - pose_j.y
    return c * ex + s * ey, -s * ex + c * ey, pose_i.heading - pose_j.heading


def lc_measurement(
    pose_i: ScaledPose,
    pose_j: ScaledPose,
    p: LoopClosureParams,
    rng: RngStream,
) -> RelativeMeasurement:
    """
    Measure pose_i relative to pose_j (the older node).

    Draws three standard normals (x, y, heading).
    """
    n_x, n_y, n_ang = rng.standard_normal(3)
    dx, dy, dtheta = _relative_pose(pose_i, pose_j)
    return RelativeMeasurement(
        dx + p.sigma_pos * n_x,
        dy + p.sigma_pos * n_y,
        wrap_angle(dtheta + p.sigma_ang * n_ang),
    )


def lc_measurements(
    pairs: Sequence[Tuple[ScaledPose, ScaledPose]],
    p: LoopClosureParams,
    rng: RngStream,
) -> List[RelativeMeasurement]:
    """Batch form of :func:`lc_measurement` over (pose_i, pose_j) pairs."""
    if not pairs:
        return []
    truth = np.array([_relative_pose(pose_i, pose_j) for pose_i, pose_j in pairs])
    noise = rng.standard_normal((len(pairs), 3)) * np.array([p.sigma_pos, p.sigma_pos, p.sigma_ang])
    values = truth + noise
    dtheta = wrap_angles(values[:, 2])
    return [
        RelativeMeasurement(float(dx), float(dy), float(dt))
        for dx, dy, dt in zip(values[:, 0], values[:, 1], dtheta)
    ]


def lc_information(p: LoopClosureParams) -> InformationMatrix:
    """diag(sigma_pos^-2, sigma_pos^-2, sigma_ang^-2); exact for the loop-closure model."""
    if p.sigma_pos <= 0 or p.sigma_ang <= 0:
        raise ValueError("Loop-closure information needs sigma_pos > 0 and sigma_ang > 0")
    return InformationMatrix.diagonal(p.sigma_pos, p.sigma_ang)


def odometry_covariance_exact(true_rel_heading: float, true_length: float, p: OdomNoiseParams) -> np.ndarray:
    """
    Exact covariance of (dx, dy, dtheta) under the odometry model.

    Uses the Gaussian trigonometric moments E[cos], E[cos^2], E[sin cos] and
    E[n sin n]; dtheta is taken before wrapping. Differences of exponentials
    go through expm1 so tiny sigmas keep their precision.
    """
    c, s = _cos_sin(true_rel_heading)
    ell = true_length
    a = p.sigma_ang ** 2
    q = p.sigma_pos ** 2
    cos2 = c * c - s * s
    ell2 = ell * ell
    e_half = math.exp(-a / 2.0)
    m1 = -math.expm1(-a)  # 1 - E[cos n]^2
    m2 = -math.expm1(-2.0 * a)  # 1 - E[cos 2n]
    var_x = ell2 * c * c * m1 + q * c * c - (ell2 + q) * cos2 * m2 / 2.0
    var_y = ell2 * s * s * m1 + q * s * s + (ell2 + q) * cos2 * m2 / 2.0
    cov_xy = s * c * (ell2 * math.exp(-a) * math.expm1(-a) + q * math.exp(-2.0 * a))
    cov_xt = -ell * s * a * e_half
    cov_yt = ell * c * a * e_half
    return np.array(
        [
            [var_x, cov_xy, cov_xt],
            [cov_xy, var_y, cov_yt],
            [cov_xt, cov_yt, a],
        ]
    )


def odom_information_exact(true_rel_heading: float, true_length: float, p: OdomNoiseParams) -> InformationMatrix:
    """
    Inverse of :func:`odometry_covariance_exact`.

    Raises:
        ValueError: If either sigma is zero
        NumericalError: If the covariance is not positive definite
    """
    if p.sigma_pos <= 0 or p.sigma_ang <= 0:
        raise ValueError("Odometry information needs sigma_pos > 0 and sigma_ang > 0")
    cov = odometry_covariance_exact(true_rel_heading, true_length, p)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            "Odometry covariance is singular",
            details={"heading": true_rel_heading, "length": true_length, "covariance": cov.tolist()},
        ) from exc
    inv_chol = np.linalg.inv(chol)
    info = InformationMatrix.from_array(inv_chol.T @ inv_chol)
    if not info.is_positive_definite():
        raise NumericalError("Odometry information matrix is not positive definite", details={"info": info})
    return info


def odom_information(
    mode: InfoMode,
    true_rel_heading: float,
    true_length: float,
    p: OdomNoiseParams,
) -> InformationMatrix:
    """Exact correlated information, or the deliberately wrong diagonal one."""
    if mode == InfoMode.EXACT:
        return odom_information_exact(true_rel_heading, true_length, p)
    if mode == InfoMode.DIAGONAL:
        if p.sigma_pos <= 0 or p.sigma_ang <= 0:
            raise ValueError("Odometry information needs sigma_pos > 0 and sigma_ang > 0")
        return InformationMatrix.diagonal(p.sigma_pos, p.sigma_ang)
    raise ValueError(f"Unsupported information mode: {mode}")
