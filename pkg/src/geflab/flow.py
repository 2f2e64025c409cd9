"""Gradient-flow basins of the weighted log-modulus landscape.

The descent field of U = log|F| - |z|^2/2 is -conj(F1/F) (F1 the Chern
derivative); trajectories terminate at zeros of F, and the plane decomposes
into basins of attraction.  This module labels a grid of starting points by
their capturing zero, builds the basin adjacency graph, and measures

* the mean number of neighbor basins per zero (heuristic target 8/3), and
* the mean number of distinct basins meeting at a local maximum (heuristic
  target 8).

Both identities are heuristic; the harness measures them without asserting.
Outcomes per trajectory: captured (within 1e-3 of a located zero), escaped
(left the zero-populated disk; a genuine flow outcome, not a failure), or
unresolved (budget exhausted or stagnation near a saddle manifold).  Only
the unresolved fraction counts against the 5% acceptance gate.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import points as pts
from .fields import chern_arrays

CAPTURE_RADIUS = 1e-3
MAX_FLOW_STEPS = 900
ZERO_HALO = 1.5          # zeros are located this far beyond the labeled disk
INTERIOR_MARGIN = 1.5    # stats use zeros/maxima this far inside the disk
RING_POINTS = 32

LABEL_UNRESOLVED = -1
LABEL_ESCAPED = -2


class BasinResolutionError(RuntimeError):
    """Too many trajectories failed to resolve; report rejected."""


@dataclass(frozen=True)
class BasinReport:
    """Basin-graph statistics of one realization."""

    zero_neighbor_mean: float
    max_meeting_mean: float
    grid_step: float
    unresolved_fraction: float


def _velocity(draw, z):
    f, _, f1, _ = chern_arrays(draw, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = -np.conj(f1 / f)
    return np.where(np.isfinite(v), v, 0.0)


def flow_to_zeros(draw, starts, zeros, *, capture_radius=CAPTURE_RADIUS,
                  max_steps=MAX_FLOW_STEPS, escape_radius=None):
    """Integrate the descent flow from each start; label by capturing zero.

    Returns an int array: index into `zeros`, or LABEL_ESCAPED / LABEL_UNRESOLVED.
    Adaptive 4th-order Runge-Kutta steps: the step shrinks with the local
    speed and with the distance to the nearest zero so captures are not
    overshot.
    """
    zeros = np.asarray(zeros, dtype=complex)
    if zeros.size == 0:
        return np.full(len(starts), LABEL_ESCAPED, dtype=int)
    if escape_radius is None:
        escape_radius = float(np.max(np.abs(zeros))) + 0.5
    tree = cKDTree(np.column_stack([zeros.real, zeros.imag]))
    z = np.asarray(starts, dtype=complex).copy()
    labels = np.full(z.size, LABEL_UNRESOLVED, dtype=int)
    active = np.arange(z.size)
    for _ in range(max_steps):
        if active.size == 0:
            break
        za = z[active]
        dist, nearest = tree.query(np.column_stack([za.real, za.imag]))
        captured = dist < capture_radius
        labels[active[captured]] = nearest[captured]
        escaped = (~captured) & (np.abs(za) > escape_radius)
        labels[active[escaped]] = LABEL_ESCAPED
        alive = ~(captured | escaped)
        active = active[alive]
        if active.size == 0:
            break
        za = z[active]
        dist = dist[alive]
        v1 = _velocity(draw, za)
        speed = np.abs(v1)
        stalled = speed < 1e-12
        if np.any(stalled):
            labels[active[stalled]] = LABEL_UNRESOLVED
            active = active[~stalled]
            za, v1, dist, speed = za[~stalled], v1[~stalled], dist[~stalled], speed[~stalled]
            if active.size == 0:
                break
        dt = np.minimum(0.2, 0.5 / (speed + 0.5))
        near = dist < 0.6
        dt[near] = np.minimum(dt[near], 0.5 * dist[near] / speed[near])
        k2 = _velocity(draw, za + 0.5 * dt * v1)
        k3 = _velocity(draw, za + 0.5 * dt * k2)
        k4 = _velocity(draw, za + dt * k3)
        z[active] = za + dt / 6.0 * (v1 + 2.0 * k2 + 2.0 * k3 + k4)
    return labels


def basin_analysis(draw, region_radius, grid_step, *, zeros=None, maxima=None,
                   capture_radius=CAPTURE_RADIUS, max_steps=MAX_FLOW_STEPS,
                   interior_margin=INTERIOR_MARGIN, ring_points=RING_POINTS,
                   max_unresolved=0.05):
    """Basin statistics of one draw over the disk |z| <= region_radius.

    Zeros and local maxima are located on a halo beyond the disk unless
    provided (the draw must then be truncated for the halo radius plus the
    finder buffer).  An unresolved-trajectory fraction above `max_unresolved`
    raises BasinResolutionError.
    """
    if zeros is None:
        zeros = [p.location for p in pts.find_zeros(draw, region_radius + ZERO_HALO)]
    if maxima is None:
        maxima = [p.location for p in
                  pts.find_critical_points(draw, region_radius - interior_margin)
                  if p.classification == "local_max"]
    zeros = np.asarray(zeros, dtype=complex)

    half = region_radius
    n = int(np.floor(2.0 * half / grid_step)) + 1
    xs = -half + grid_step * np.arange(n)
    grid = xs[None, :] + 1j * xs[:, None]
    in_disk = np.abs(grid) <= region_radius
    starts = grid[in_disk]

    labels_flat = flow_to_zeros(draw, starts, zeros,
                                capture_radius=capture_radius, max_steps=max_steps)
    unresolved = float(np.count_nonzero(labels_flat == LABEL_UNRESOLVED))
    unresolved_fraction = unresolved / labels_flat.size if labels_flat.size else 0.0
    if unresolved_fraction > max_unresolved:
        raise BasinResolutionError(
            f"unresolved trajectory fraction {unresolved_fraction:.3f} exceeds "
            f"{max_unresolved:.3f}")

    label_img = np.full(grid.shape, LABEL_ESCAPED, dtype=int)
    label_img[in_disk] = labels_flat

    neighbor_pairs = set()
    for a, b in ((label_img[:, :-1], label_img[:, 1:]),
                 (label_img[:-1, :], label_img[1:, :])):
        both = (a >= 0) & (b >= 0) & (a != b)
        neighbor_pairs.update(
            (min(i, j), max(i, j))
            for i, j in zip(a[both].ravel(), b[both].ravel()))
    degree = np.zeros(zeros.size, dtype=int)
    for i, j in neighbor_pairs:
        degree[i] += 1
        degree[j] += 1
    visible = np.isin(np.arange(zeros.size), labels_flat[labels_flat >= 0])
    interior = (np.abs(zeros) <= region_radius - interior_margin) & visible
    zero_neighbor_mean = float(degree[interior].mean()) if np.any(interior) else 0.0

    meeting = []
    if maxima:
        ring = np.exp(2j * np.pi * np.arange(ring_points) / ring_points)
        for m in maxima:
            ring_labels = flow_to_zeros(
                draw, m + 2.0 * grid_step * ring, zeros,
                capture_radius=capture_radius, max_steps=max_steps)
            distinct = np.unique(ring_labels[ring_labels >= 0])
            meeting.append(distinct.size)
    max_meeting_mean = float(np.mean(meeting)) if meeting else 0.0

    return BasinReport(zero_neighbor_mean, max_meeting_mean, grid_step,
                       unresolved_fraction)
