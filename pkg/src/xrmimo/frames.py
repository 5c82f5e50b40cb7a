"""TDD frame structures and the pose-correction latency budget.

The radio interface repeats a slot of OFDM symbols with fixed roles
(pilot, uplink data, downlink data, guard).  Transmitting a payload costs
the worst-case wait until the first usable symbol, the data symbols
themselves, and the foreign symbols skipped every time the payload spans
a slot boundary.  Pose-correction latency stacks device execution,
uplink transfer, base-station processing, offloaded execution, and the
downlink transfer of the corrected pose.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .exceptions import ConfigurationError
from .scenarios import SCENARIO_UL_BITS
from .seeding import as_generator

DEFAULT_SYMBOL_DURATION_S = 71.4e-6
DEFAULT_BASESTATION_LATENCY_S = 132e-6
DEFAULT_DEADLINE_S = 0.200

# Downlink pose record: f64 timestamp + 3x f32 position + 4x f32 quaternion
# + u32 frame id = 40 bytes.
POSE_RECORD_BYTES = 40
POSE_RECORD_BITS = POSE_RECORD_BYTES * 8


class SymbolRole(str, enum.Enum):
    PILOT = "pilot"
    UPLINK_DATA = "ul"
    DOWNLINK_DATA = "dl"
    GUARD = "guard"


def _direction_role(direction) -> SymbolRole:
    if isinstance(direction, SymbolRole):
        if direction in (SymbolRole.UPLINK_DATA, SymbolRole.DOWNLINK_DATA):
            return direction
        raise ConfigurationError(f"not a data direction: {direction}")
    key = str(direction).lower()
    if key in ("ul", "uplink"):
        return SymbolRole.UPLINK_DATA
    if key in ("dl", "downlink"):
        return SymbolRole.DOWNLINK_DATA
    raise ConfigurationError(f"unknown direction {direction!r}, expected 'ul' or 'dl'")


@dataclass(frozen=True)
class FrameStructure:
    """Ordered slot layout plus the per-symbol data capacity parameters."""

    name: str
    layout: tuple
    n_subcarriers: int = 1200
    bits_per_qam_symbol: int = 6
    tau_symb: float = DEFAULT_SYMBOL_DURATION_S

    def __post_init__(self):
        layout = tuple(SymbolRole(role) for role in self.layout)
        object.__setattr__(self, "layout", layout)
        if len(layout) < 2:
            raise ConfigurationError("slot layout needs at least 2 symbols")
        if self.n_ul_symb < 1 or self.n_dl_symb < 1:
            raise ConfigurationError(
                f"layout of {self.name!r} needs at least one uplink and one downlink symbol"
            )
        if self.n_subcarriers < 1:
            raise ConfigurationError("n_subcarriers must be >= 1")
        if self.bits_per_qam_symbol not in (2, 4, 6):
            raise ConfigurationError("bits_per_qam_symbol must be one of 2, 4, 6")
        if not self.tau_symb > 0:
            raise ConfigurationError("tau_symb must be positive")

    @property
    def n_symb(self) -> int:
        return len(self.layout)

    @property
    def n_ul_symb(self) -> int:
        return sum(1 for r in self.layout if r is SymbolRole.UPLINK_DATA)

    @property
    def n_dl_symb(self) -> int:
        return sum(1 for r in self.layout if r is SymbolRole.DOWNLINK_DATA)

    def n_direction_symbols(self, direction) -> int:
        role = _direction_role(direction)
        return sum(1 for r in self.layout if r is role)

    @property
    def bits_per_data_symbol(self) -> int:
        """Payload bits carried by one data symbol across all subcarriers."""
        return self.n_subcarriers * self.bits_per_qam_symbol


def structure_a() -> FrameStructure:
    """Balanced uplink/downlink preset (4 UL + 4 DL data symbols of 10)."""
    layout = ("pilot", "ul", "ul", "ul", "ul", "pilot", "dl", "dl", "dl", "dl")
    return FrameStructure(name="A", layout=layout)


def structure_b() -> FrameStructure:
    """Uplink-heavy preset (8 UL + 1 DL data symbols of 10)."""
    layout = ("pilot", "ul", "ul", "ul", "ul", "ul", "ul", "ul", "ul", "dl")
    return FrameStructure(name="B", layout=layout)


def default_structures() -> dict:
    return {"A": structure_a(), "B": structure_b()}


def symbols_per_pose(payload_bits: int, fs: FrameStructure) -> int:
    """Number of OFDM data symbols needed for one payload."""
    if payload_bits < 1:
        raise ValueError("payload_bits must be >= 1")
    capacity = fs.bits_per_data_symbol
    if capacity <= 0:
        raise ConfigurationError("frame structure has zero data capacity per symbol")
    return -(-payload_bits // capacity)


def slots_per_pose(n_symb_pose: int, fs: FrameStructure, direction) -> int:
    """Full inter-slot overheads traversed while sending ``n_symb_pose`` symbols.

    A payload that fits inside a single slot's data region crosses no slot
    boundary and therefore pays no overhead.
    """
    if n_symb_pose < 1:
        raise ValueError("n_symb_pose must be >= 1")
    n_dir = fs.n_direction_symbols(direction)
    if n_dir < 1:
        raise ConfigurationError("direction has no symbols in the layout")
    return -(-n_symb_pose // n_dir) - 1


def max_cyclic_start_gap(layout: Sequence, role: SymbolRole) -> int:
    """Largest whole-symbol gap between consecutive starts of ``role`` symbols.

    Arrival is assumed just after a symbol boundary, so a lone symbol in a
    slot of N yields a gap of N and a contiguous block of length L yields
    N - L + 1.
    """
    starts = [i for i, r in enumerate(layout) if SymbolRole(r) is role]
    if not starts:
        raise ConfigurationError(f"layout contains no {role.value} symbols")
    n = len(layout)
    if len(starts) == 1:
        return n
    gaps = [b - a for a, b in zip(starts, starts[1:])]
    gaps.append(starts[0] + n - starts[-1])
    return max(gaps)


def worst_case_wait(fs: FrameStructure, direction) -> int:
    """Worst-case whole symbols elapsed before the next usable symbol starts."""
    return max_cyclic_start_gap(fs.layout, _direction_role(direction))


def transmission_latency(payload_bits: int, fs: FrameStructure, direction) -> float:
    """Worst-case transfer time of a payload in the given direction, seconds."""
    n_symb_pose = symbols_per_pose(payload_bits, fs)
    n_slots = slots_per_pose(n_symb_pose, fs, direction)
    n_dir = fs.n_direction_symbols(direction)
    total_symbols = worst_case_wait(fs, direction) + n_symb_pose + n_slots * (fs.n_symb - n_dir)
    return fs.tau_symb * total_symbols


class ExecKind(str, enum.Enum):
    CONSTANT = "constant"
    EMPIRICAL = "empirical"
    TRUNCATED_NORMAL = "truncated_normal"


@dataclass(frozen=True)
class ExecTimeModel:
    """Sampling model for a software execution time, always non-negative."""

    kind: ExecKind
    value: float = 0.0
    samples: tuple = ()
    mean: float = 0.0
    std: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ExecKind(self.kind))
        if self.kind is ExecKind.CONSTANT:
            if self.value < 0:
                raise ConfigurationError("constant execution time must be >= 0")
        elif self.kind is ExecKind.EMPIRICAL:
            samples = tuple(float(s) for s in self.samples)
            object.__setattr__(self, "samples", samples)
            if not samples:
                raise ConfigurationError("empirical execution model needs samples")
            if any(s < 0 for s in samples):
                raise ConfigurationError("execution time samples must be >= 0")
        else:
            if self.mean < 0 or self.std < 0:
                raise ConfigurationError("truncated normal needs mean >= 0 and std >= 0")

    @classmethod
    def constant(cls, value: float) -> "ExecTimeModel":
        return cls(kind=ExecKind.CONSTANT, value=float(value))

    @classmethod
    def empirical(cls, samples) -> "ExecTimeModel":
        return cls(kind=ExecKind.EMPIRICAL, samples=tuple(samples))

    @classmethod
    def truncated_normal(cls, mean: float, std: float) -> "ExecTimeModel":
        return cls(kind=ExecKind.TRUNCATED_NORMAL, mean=float(mean), std=float(std))

    def sample(self, rng, size=None):
        """Draw one value (size=None) or an array of values, all >= 0."""
        gen = as_generator(rng)
        n = 1 if size is None else int(size)
        if self.kind is ExecKind.CONSTANT:
            out = np.full(n, self.value)
        elif self.kind is ExecKind.EMPIRICAL:
            out = gen.choice(np.asarray(self.samples), size=n)
        else:
            out = gen.normal(self.mean, self.std, size=n)
            bad = out < 0
            while bad.any():
                out[bad] = gen.normal(self.mean, self.std, size=int(bad.sum()))
                bad = out < 0
        return float(out[0]) if size is None else out


@dataclass(frozen=True)
class ExecTimePair:
    device: ExecTimeModel
    offloaded: ExecTimeModel


def default_exec_models() -> dict:
    """Placeholder constants; not measured values.

    Scenarios 2 and 3 extract features on the device, so their device time
    is more than double scenario 1's, while their offloaded share shrinks.
    """
    return {
        1: ExecTimePair(ExecTimeModel.constant(0.015), ExecTimeModel.constant(0.025)),
        2: ExecTimePair(ExecTimeModel.constant(0.035), ExecTimeModel.constant(0.018)),
        3: ExecTimePair(ExecTimeModel.constant(0.035), ExecTimeModel.constant(0.015)),
    }


@dataclass(frozen=True)
class LatencyBreakdown:
    """The five pose-correction latency terms, their sum, and the verdict."""

    tau_device: float
    tau_ul: float
    tau_bs: float
    tau_offloaded: float
    tau_dl: float
    tau_pose: float
    meets_deadline: bool
    deadline: float = DEFAULT_DEADLINE_S

    def __post_init__(self):
        terms = (self.tau_device, self.tau_ul, self.tau_bs, self.tau_offloaded, self.tau_dl)
        if any(t < 0 for t in terms):
            raise ConfigurationError("latency terms must be >= 0")
        total = self.tau_device + self.tau_ul + self.tau_bs + self.tau_offloaded + self.tau_dl
        if total != self.tau_pose:
            raise ConfigurationError("tau_pose must equal the sum of its five terms")

    @classmethod
    def from_terms(cls, tau_device, tau_ul, tau_bs, tau_offloaded, tau_dl,
                   deadline=DEFAULT_DEADLINE_S) -> "LatencyBreakdown":
        total = tau_device + tau_ul + tau_bs + tau_offloaded + tau_dl
        return cls(
            tau_device=tau_device,
            tau_ul=tau_ul,
            tau_bs=tau_bs,
            tau_offloaded=tau_offloaded,
            tau_dl=tau_dl,
            tau_pose=total,
            meets_deadline=bool(total <= deadline),
            deadline=deadline,
        )


def pose_latency(scenario: int, fs: FrameStructure, exec_models: Mapping, rng,
                 *, ul_payload_bits: int | None = None,
                 dl_payload_bits: int = POSE_RECORD_BITS,
                 tau_bs: float = DEFAULT_BASESTATION_LATENCY_S,
                 deadline: float = DEFAULT_DEADLINE_S) -> LatencyBreakdown:
    """One sampled pose-correction latency for a scenario over a frame structure.

    ``exec_models`` maps scenario id to an ``ExecTimePair``; the uplink
    payload defaults to the scenario's packet size and the downlink payload
    to the 40-byte pose record.
    """
    if scenario not in exec_models:
        raise ConfigurationError(f"no execution-time models configured for scenario {scenario}")
    pair = exec_models[scenario]
    gen = as_generator(rng)
    tau_device = pair.device.sample(gen)
    tau_offloaded = pair.offloaded.sample(gen)
    if ul_payload_bits is None:
        if scenario not in SCENARIO_UL_BITS:
            raise ConfigurationError(f"unknown scenario {scenario} and no ul_payload_bits given")
        ul_payload_bits = SCENARIO_UL_BITS[scenario]
    tau_ul = transmission_latency(ul_payload_bits, fs, "ul")
    tau_dl = transmission_latency(dl_payload_bits, fs, "dl")
    return LatencyBreakdown.from_terms(tau_device, tau_ul, tau_bs, tau_offloaded, tau_dl,
                                       deadline=deadline)
