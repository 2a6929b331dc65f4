"""Two-mirror cavity engine.

A beam bounces between mirror 1 (entrance) and mirror 2, crossing a field
region of length `field_length_m` centred between two symmetric gaps.  Each
field passage splits every beam in two (angle +- theta_split at entry, the
same-signed kick again at exit, weight halved) so the ensemble doubles per
traversal; coalescing merges beams that have become indistinguishable.

The ensemble is stored as flat numpy arrays, which is what keeps thousand-
traversal runs affordable: a traversal is a handful of vectorised affine
operations plus one grid-based merge.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .rays import PARAXIAL_LIMIT, ParaxialError, RayState

MIRROR_1 = "mirror1"
MIRROR_2 = "mirror2"

GEOMETRY_TOL = 1e-9  # m, slack for the length = field + 2*gap identity


class ConfigError(ValueError):
    """Raised for geometrically or physically inconsistent configurations."""


@dataclass(frozen=True)
class CavityConfig:
    """Geometry, mirrors and split strength for one cavity run.

    ``mirror*_focal_m`` of ``None`` means a planar mirror (identity
    reflection).  ``lens_focal_m`` of ``None`` models the external detector
    lens as an ideal relay, so the trip from the exit mirror to the detector
    is pure propagation over ``detector_distance_m``.
    """

    kind: str = "confocal"
    length_m: float = 14.0
    field_length_m: float = 10.0
    gap_m: float = 2.0
    mirror1_focal_m: float | None = 12.5
    mirror2_focal_m: float | None = 12.5
    theta_split_rad: float = 4e-10
    n_traversals: int = 15
    extraction_mirror: str = MIRROR_2
    detector_distance_m: float = 2.0
    lens_offset_m: float = 0.5
    lens_focal_m: float | None = None
    split_on_backward: bool = True
    coalesce_tol_position_m: float = 1e-12
    coalesce_tol_angle_rad: float = 1e-16

    def __post_init__(self):
        if self.length_m <= 0 or self.field_length_m <= 0 or self.gap_m < 0:
            raise ConfigError("cavity lengths must be positive (gap may be zero)")
        if abs(self.field_length_m + 2 * self.gap_m - self.length_m) > GEOMETRY_TOL:
            raise ConfigError(
                f"field_length_m + 2*gap_m must equal length_m "
                f"({self.field_length_m} + 2*{self.gap_m} != {self.length_m})"
            )
        if self.theta_split_rad < 0:
            raise ConfigError("theta_split_rad must be >= 0")
        if self.n_traversals < 1:
            raise ConfigError("n_traversals must be >= 1")
        if self.extraction_mirror not in (MIRROR_1, MIRROR_2):
            raise ConfigError(f"extraction_mirror must be {MIRROR_1!r} or {MIRROR_2!r}")
        for f in (self.mirror1_focal_m, self.mirror2_focal_m, self.lens_focal_m):
            if f is not None and f == 0:
                raise ConfigError("focal lengths must be nonzero (None = planar)")
        if self.detector_distance_m < 0 or self.lens_offset_m < 0:
            raise ConfigError("detector distances must be >= 0")
        if self.lens_focal_m is not None and self.lens_offset_m > self.detector_distance_m:
            raise ConfigError("lens_offset_m exceeds detector_distance_m")
        if self.coalesce_tol_position_m <= 0 or self.coalesce_tol_angle_rad <= 0:
            raise ConfigError("coalescing tolerances must be > 0")


def build_preset(kind: str, **overrides) -> CavityConfig:
    """Named mirror arrangements sharing the 14 m / 10 m / 2 m geometry.

    confocal        both mirrors focal 12.5 m, detector behind mirror 2
    planar-concave  mirror 2 planar, extraction through mirror 1
    convex-concave  mirror 2 defocusing (focal -5.5 m), extraction through
                    mirror 1
    """
    presets = {
        "confocal": dict(
            kind="confocal",
            mirror1_focal_m=12.5,
            mirror2_focal_m=12.5,
            extraction_mirror=MIRROR_2,
        ),
        "planar-concave": dict(
            kind="planar-concave",
            mirror1_focal_m=12.5,
            mirror2_focal_m=None,
            extraction_mirror=MIRROR_1,
        ),
        "convex-concave": dict(
            kind="convex-concave",
            mirror1_focal_m=12.5,
            mirror2_focal_m=-5.5,
            extraction_mirror=MIRROR_1,
        ),
    }
    if kind not in presets:
        raise ConfigError(f"unknown preset {kind!r}; choose from {sorted(presets)}")
    params = presets[kind] | overrides
    return CavityConfig(**params)


@dataclass(frozen=True)
class WeightedBeam:
    """One ensemble member: ray state, statistical weight, and the number of
    field passages it has experienced."""

    ray: RayState
    weight: float
    generation: int = 0


class BeamEnsemble:
    """Ordered, weighted collection of beams (array-of-structs facade over
    struct-of-arrays storage)."""

    __slots__ = ("positions", "angles", "weights", "generation")

    def __init__(self, positions, angles, weights, generation: int = 0):
        positions = np.atleast_1d(np.asarray(positions, dtype=float))
        angles = np.atleast_1d(np.asarray(angles, dtype=float))
        weights = np.atleast_1d(np.asarray(weights, dtype=float))
        if not (positions.shape == angles.shape == weights.shape):
            raise ValueError("positions, angles and weights must have equal length")
        if np.any(weights < 0):
            raise ValueError("weights must be >= 0")
        amax = float(np.max(np.abs(angles))) if angles.size else 0.0
        if not (amax < PARAXIAL_LIMIT):
            raise ParaxialError(
                f"ensemble angle {amax!r} outside paraxial window (< {PARAXIAL_LIMIT})"
            )
        self.positions = positions
        self.angles = angles
        self.weights = weights
        self.generation = generation

    @classmethod
    def single(cls, ray: RayState, weight: float = 1.0) -> "BeamEnsemble":
        return cls([ray.position], [ray.angle], [weight], generation=0)

    @classmethod
    def from_beams(cls, beams: list[WeightedBeam]) -> "BeamEnsemble":
        if not beams:
            raise ValueError("ensemble needs at least one beam")
        gen = beams[0].generation
        if any(b.generation != gen for b in beams):
            raise ValueError("all beams in an ensemble share one generation")
        return cls(
            [b.ray.position for b in beams],
            [b.ray.angle for b in beams],
            [b.weight for b in beams],
            generation=gen,
        )

    def __len__(self) -> int:
        return self.positions.size

    def __iter__(self) -> Iterator[WeightedBeam]:
        for p, a, w in zip(self.positions, self.angles, self.weights):
            yield WeightedBeam(RayState(float(p), float(a)), float(w), self.generation)

    @property
    def total_weight(self) -> float:
        # fsum, not np.sum: the conservation checks care about the last digit
        import math

        return math.fsum(self.weights.tolist())

    def sorted_copy(self) -> "BeamEnsemble":
        order = np.lexsort((self.angles, self.positions))
        return BeamEnsemble(
            self.positions[order], self.angles[order], self.weights[order], self.generation
        )


def reflect_and_conserve(ray: RayState, mirror_focal_m: float | None) -> RayState:
    """Mirror reflection in unfolded coordinates: position unchanged, the
    accumulated transverse angle is kept (never reset) and a curved mirror
    adds its focusing kick -position/f."""
    if mirror_focal_m is None:
        return ray
    return RayState(ray.position, ray.angle - ray.position / mirror_focal_m)


def coalesce(
    ensemble: BeamEnsemble,
    tol_position_m: float,
    tol_angle_rad: float,
) -> BeamEnsemble:
    """Merge indistinguishable beams.

    Beams are binned on a (position, angle) grid with cell sizes equal to the
    tolerances; each occupied cell collapses to its weight-weighted mean with
    the summed weight.  The pass is repeated on a half-cell-shifted grid and
    iterated to a fixed point, so any two beams closer than half a tolerance
    in both coordinates are guaranteed to merge, and beams farther apart than
    a full tolerance in either coordinate never merge.  Output is sorted by
    (position, angle), which makes the result order deterministic.

    A zero tolerance on either coordinate disables merging entirely and
    returns a sorted copy of the input.
    """
    if tol_position_m < 0 or tol_angle_rad < 0:
        raise ValueError("coalescing tolerances must be >= 0")
    if tol_position_m == 0.0 or tol_angle_rad == 0.0:
        return ensemble.sorted_copy()
    pos, ang, w = ensemble.positions, ensemble.angles, ensemble.weights
    for _ in range(64):
        merged_any = False
        for shift in (0.0, 0.5):
            pos, ang, w, merged = _grid_merge(pos, ang, w, tol_position_m, tol_angle_rad, shift)
            merged_any = merged_any or merged
        if not merged_any:
            break
    order = np.lexsort((ang, pos))
    return BeamEnsemble(pos[order], ang[order], w[order], ensemble.generation)


def _grid_merge(pos, ang, w, tol_p, tol_a, shift):
    scaled_p = pos / tol_p + shift
    scaled_a = ang / tol_a + shift
    # floor() of a float beyond int64 range would wrap silently; refuse instead.
    limit = float(2**62)
    if np.abs(scaled_p).max(initial=0.0) >= limit or np.abs(scaled_a).max(initial=0.0) >= limit:
        raise ValueError("coalescing tolerance too small for the ensemble scale")
    cell_p = np.floor(scaled_p).astype(np.int64)
    cell_a = np.floor(scaled_a).astype(np.int64)
    order = np.lexsort((cell_a, cell_p))
    cell_p, cell_a = cell_p[order], cell_a[order]
    pos, ang, w = pos[order], ang[order], w[order]
    starts = np.concatenate([[True], (np.diff(cell_p) != 0) | (np.diff(cell_a) != 0)])
    if starts.all():
        return pos, ang, w, False
    idx = np.flatnonzero(starts)
    wsum = np.add.reduceat(w, idx)
    pos = np.add.reduceat(w * pos, idx) / wsum
    ang = np.add.reduceat(w * ang, idx) / wsum
    return pos, ang, wsum, True


def _transport_to_far_mirror(
    ensemble: BeamEnsemble, config: CavityConfig, direction: str
) -> BeamEnsemble:
    """Carry every beam gap -> field (with the split/enhance kicks) -> gap,
    ending at the far mirror just before reflection.

    Forward means mirror 1 to mirror 2; the geometry is symmetric so both
    directions use the same sequence.  When splitting is disabled for this
    leg the field region is plain propagation.
    """
    ths = config.theta_split_rad
    do_split = ths > 0 and (direction == "forward" or config.split_on_backward)

    pos = ensemble.positions + ensemble.angles * config.gap_m
    ang = ensemble.angles
    if do_split:
        n = pos.size
        pos = np.concatenate([pos, pos])
        ang = np.concatenate([ang + ths, ang - ths])
        w = np.concatenate([ensemble.weights, ensemble.weights]) * 0.5
        pos = pos + ang * config.field_length_m
        branch = np.concatenate([np.full(n, ths), np.full(n, -ths)])
        ang = ang + branch
    else:
        w = ensemble.weights.copy()
        pos = pos + ang * config.field_length_m
    pos = pos + ang * config.gap_m
    return BeamEnsemble(pos, ang, w, ensemble.generation + (1 if do_split else 0))


def _far_mirror_focal(config: CavityConfig, direction: str) -> float | None:
    return config.mirror2_focal_m if direction == "forward" else config.mirror1_focal_m


def _reflect_all(ensemble: BeamEnsemble, focal: float | None) -> BeamEnsemble:
    if focal is None:
        return ensemble
    return BeamEnsemble(
        ensemble.positions,
        ensemble.angles - ensemble.positions / focal,
        ensemble.weights,
        ensemble.generation,
    )


def traverse(ensemble: BeamEnsemble, config: CavityConfig, direction: str) -> BeamEnsemble:
    """One full traversal: transport across the cavity (splitting in the
    field region), reflect off the far mirror, then coalesce."""
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    at_mirror = _transport_to_far_mirror(ensemble, config, direction)
    reflected = _reflect_all(at_mirror, _far_mirror_focal(config, direction))
    return coalesce(reflected, config.coalesce_tol_position_m, config.coalesce_tol_angle_rad)


@dataclass(frozen=True)
class DetectorSnapshot:
    """Ensemble transported to the detector plane after a given traversal."""

    traversal: int
    ensemble: BeamEnsemble


@dataclass
class RunResult:
    config: CavityConfig
    snapshots: list[DetectorSnapshot] = field(default_factory=list)
    final: BeamEnsemble | None = None


def _to_detector(ensemble: BeamEnsemble, config: CavityConfig) -> BeamEnsemble:
    """Transmit through the exit mirror (unit transmission, no focusing) and
    carry the beams to the detector plane.

    With no external lens focal length configured the lens is an ideal relay
    and the whole trip is one propagation over detector_distance_m; otherwise
    the beams propagate lens_offset_m, get the thin-lens kick, and propagate
    the remaining distance.
    """
    pos, ang = ensemble.positions, ensemble.angles
    if config.lens_focal_m is None:
        pos = pos + ang * config.detector_distance_m
    else:
        rest = config.detector_distance_m - config.lens_offset_m
        if rest < 0:
            raise ConfigError("lens_offset_m exceeds detector_distance_m")
        pos = pos + ang * config.lens_offset_m
        ang = ang - pos / config.lens_focal_m
        pos = pos + ang * rest
    return BeamEnsemble(pos, ang, ensemble.weights.copy(), ensemble.generation)


def run(config: CavityConfig, initial: BeamEnsemble | None = None) -> RunResult:
    """Run n_traversals of the cavity, alternating direction each traversal,
    and record detector snapshots at every extraction opportunity.

    With extraction through mirror 2 a snapshot is taken each traversal at
    whichever mirror the beams just reached (the symmetric-cavity detector
    picture); with extraction through mirror 1 only traversals that end on
    mirror 1 (the even ones) are sampled.  Snapshots are taken before the
    reflection, since the transmitted light never feels the mirror curvature.
    """
    ens = initial if initial is not None else BeamEnsemble.single(RayState(0.0, 0.0))
    result = RunResult(config=config)
    for k in range(1, config.n_traversals + 1):
        direction = "forward" if k % 2 == 1 else "backward"
        at_mirror = _transport_to_far_mirror(ens, config, direction)
        if config.extraction_mirror == MIRROR_2 or direction == "backward":
            result.snapshots.append(
                DetectorSnapshot(traversal=k, ensemble=_to_detector(at_mirror, config))
            )
        reflected = _reflect_all(at_mirror, _far_mirror_focal(config, direction))
        ens = coalesce(
            reflected, config.coalesce_tol_position_m, config.coalesce_tol_angle_rad
        )
    result.final = ens
    return result


def null_field_config(config: CavityConfig) -> CavityConfig:
    """Same cavity with the field interaction switched off; the reference
    (unsplit) run every difference measurement is taken against."""
    return replace(config, theta_split_rad=0.0)
