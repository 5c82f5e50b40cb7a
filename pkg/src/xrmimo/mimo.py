"""Multi-user Massive MIMO uplink physical layer.

Covers synthetic i.i.d. Rayleigh channel generation, a binary channel-file
format for measured-channel replay, zero-forcing equalisation, power
control towards a common post-equalisation SNR, and a Monte-Carlo
uncoded-BER sweep that transmits Gray-QAM symbols through the channel with
AWGN at the antennas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ChannelFileError, ConfigurationError, SingularChannelError
from .modem import QamConstellation
from .seeding import as_generator, generator

CHANNEL_FILE_MAGIC = b"XMCH"
CHANNEL_HEADER_BYTES = 16
CONDITION_LIMIT = 1e12


@dataclass
class ChannelMatrix:
    """Complex channel gains indexed [subcarrier, antenna, user]."""

    gains: np.ndarray

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=complex)
        if gains.ndim != 3:
            raise ConfigurationError("channel gains must be (subcarriers, antennas, users)")
        _, m, k = gains.shape
        if not m > k >= 1:
            raise ConfigurationError(f"need antennas > users >= 1, got M={m}, K={k}")
        if not np.isfinite(gains).all():
            raise ConfigurationError("channel gains must be finite")
        self.gains = gains

    @property
    def n_subcarriers(self) -> int:
        return self.gains.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.gains.shape[1]

    @property
    def n_users(self) -> int:
        return self.gains.shape[2]


def generate_channel(n_antennas: int, n_users: int, n_subcarriers: int = 1,
                     rng=0, model: str = "iid-rayleigh") -> ChannelMatrix:
    """Synthetic channel with unit-variance circularly-symmetric Gaussian gains."""
    if model != "iid-rayleigh":
        raise ConfigurationError(f"unknown channel model {model!r}")
    if not n_antennas > n_users >= 1:
        raise ConfigurationError(
            f"need antennas > users >= 1, got M={n_antennas}, K={n_users}"
        )
    if n_subcarriers < 1:
        raise ConfigurationError("n_subcarriers must be >= 1")
    gen = as_generator(rng)
    shape = (n_subcarriers, n_antennas, n_users)
    gains = (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2.0)
    return ChannelMatrix(gains)


def save_channel(channel: ChannelMatrix, path) -> None:
    """Write the binary channel format (magic, u32 M/K/F, float32 pairs)."""
    f, m, k = channel.gains.shape
    header = CHANNEL_FILE_MAGIC + np.array([m, k, f], dtype="<u4").tobytes()
    body = channel.gains.astype("<c8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)


def load_channel(path) -> ChannelMatrix:
    """Parse one channel file; raises ChannelFileError with a byte offset."""
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < len(CHANNEL_FILE_MAGIC) or buf[:4] != CHANNEL_FILE_MAGIC:
        raise ChannelFileError(f"bad magic in {path}", offset=0)
    if len(buf) < CHANNEL_HEADER_BYTES:
        raise ChannelFileError(f"truncated header in {path}", offset=len(buf))
    m, k, f = (int(v) for v in np.frombuffer(buf, dtype="<u4", count=3, offset=4))
    if k < 1 or m <= k or f < 1:
        raise ChannelFileError(
            f"invalid dimensions M={m}, K={k}, F={f} in {path}", offset=4
        )
    expected = CHANNEL_HEADER_BYTES + 8 * f * m * k
    if len(buf) != expected:
        raise ChannelFileError(
            f"payload size mismatch in {path}: expected {expected} bytes, found {len(buf)}",
            offset=min(len(buf), expected),
        )
    floats = np.frombuffer(buf, dtype="<f4", offset=CHANNEL_HEADER_BYTES)
    finite = np.isfinite(floats)
    if not finite.all():
        bad = int(np.argmax(~finite))
        raise ChannelFileError(
            f"non-finite channel entry in {path}", offset=CHANNEL_HEADER_BYTES + 4 * bad
        )
    gains = (floats[0::2] + 1j * floats[1::2]).astype(complex).reshape(f, m, k)
    return ChannelMatrix(gains)


def concat_channels(channels) -> ChannelMatrix:
    """Stack users of several channels sharing antenna and subcarrier counts."""
    channels = list(channels)
    if not channels:
        raise ChannelFileError("no channels to concatenate")
    shapes = {(c.n_subcarriers, c.n_antennas) for c in channels}
    if len(shapes) != 1:
        raise ChannelFileError(
            f"cannot concatenate channels with differing (F, M): {sorted(shapes)}"
        )
    return ChannelMatrix(np.concatenate([c.gains for c in channels], axis=2))


def load_channels(paths) -> ChannelMatrix:
    return concat_channels(load_channel(p) for p in paths)


def channel_condition(h) -> np.ndarray:
    """2-norm condition number per subcarrier (or of a single matrix)."""
    h = np.asarray(h, dtype=complex)
    sv = np.linalg.svd(h, compute_uv=False)
    smallest = sv[..., -1]
    out = np.where(smallest > 0, sv[..., 0] / np.where(smallest > 0, smallest, 1.0), np.inf)
    return out


def _check_conditioning(h: np.ndarray) -> None:
    cond = channel_condition(h)
    if np.any(~np.isfinite(cond)) or np.any(cond > CONDITION_LIMIT):
        worst = float(np.max(cond))
        raise SingularChannelError(
            f"channel condition number {worst:.3e} exceeds limit {CONDITION_LIMIT:.0e}"
        )


def zf_equalizer(h) -> np.ndarray:
    """Zero-forcing equaliser W = (H^H H)^-1 H^H for (..., M, K) channels."""
    h = np.asarray(h, dtype=complex)
    _check_conditioning(h)
    hermitian = np.conjugate(np.swapaxes(h, -1, -2))
    gram = hermitian @ h
    return np.linalg.solve(gram, hermitian)


def zf_noise_gain(h) -> np.ndarray:
    """Per-user noise amplification [(H^H H)^-1]_kk, shape (..., K)."""
    h = np.asarray(h, dtype=complex)
    _check_conditioning(h)
    hermitian = np.conjugate(np.swapaxes(h, -1, -2))
    gram = hermitian @ h
    inv = np.linalg.inv(gram)
    return np.real(np.diagonal(inv, axis1=-2, axis2=-1)).copy()


def post_eq_snr(h, noise_var: float, powers) -> np.ndarray:
    """Per-user post-equalisation SNR p_k / (sigma^2 [(H^H H)^-1]_kk)."""
    if not noise_var > 0:
        raise ConfigurationError("noise_var must be positive")
    p = np.asarray(powers, dtype=float)
    if np.any(p <= 0):
        raise ConfigurationError("transmit powers must be positive")
    return p / (noise_var * zf_noise_gain(h))


@dataclass(frozen=True)
class PowerControlSolution:
    """Per-user powers that equalise the post-equalisation SNR at the target."""

    powers: np.ndarray
    target_snr: float


def power_control(h, noise_var: float, target_snr: float) -> PowerControlSolution:
    """Powers p_k = gamma sigma^2 [(H^H H)^-1]_kk achieving a common SNR gamma."""
    if not target_snr > 0:
        raise ConfigurationError("target_snr must be positive")
    if not noise_var > 0:
        raise ConfigurationError("noise_var must be positive")
    powers = target_snr * noise_var * zf_noise_gain(h)
    return PowerControlSolution(powers=powers, target_snr=float(target_snr))


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    ber: float
    n_bits: int
    n_errors: int


@dataclass(frozen=True)
class BerCurve:
    points: tuple
    n_singular_subcarriers: int = 0

    def __iter__(self):
        return iter(self.points)


def ber_curve(channel: ChannelMatrix, snr_points_db, bits_per_point: int, seed,
              *, noise_var: float = 1.0, constellation: QamConstellation | None = None,
              max_chunk_symbols: int | None = None) -> BerCurve:
    """Monte-Carlo uncoded BER versus power-controlled post-equalisation SNR.

    Per SNR point: power control fixes every user's post-equalisation SNR at
    the target, random QAM symbols cross the channel with complex AWGN at
    the antennas, the zero-forcing output is hard-demodulated, and bit
    errors are pooled across users and subcarriers.  Ill-conditioned
    subcarriers are skipped and counted.  Deterministic given ``seed``.
    """
    snr_points_db = [float(s) for s in snr_points_db]
    if not snr_points_db:
        raise ConfigurationError("snr_points_db must be non-empty")
    if bits_per_point < 1:
        raise ConfigurationError("bits_per_point must be >= 1")
    const = constellation or QamConstellation(64)

    h = channel.gains
    cond = channel_condition(h)
    usable = np.isfinite(cond) & (cond <= CONDITION_LIMIT)
    n_singular = int(h.shape[0] - usable.sum())
    if not usable.any():
        raise SingularChannelError("all subcarriers are too ill-conditioned to equalise")
    h = h[usable]
    n_sub, n_ant, n_users = h.shape
    w = zf_equalizer(h)
    noise_gain = zf_noise_gain(h)

    bits_per_use = n_sub * n_users * const.bits_per_symbol
    n_uses = -(-bits_per_point // bits_per_use)
    if max_chunk_symbols is None:
        max_chunk_symbols = max(1, 2_000_000 // (n_sub * n_ant))

    points = []
    for idx, snr_db in enumerate(snr_points_db):
        rng = generator(seed, idx)
        gamma = 10.0 ** (snr_db / 10.0)
        amplitude = np.sqrt(gamma * noise_var * noise_gain)[:, :, None]
        n_errors = 0
        n_bits = 0
        remaining = n_uses
        while remaining > 0:
            n_sym = min(max_chunk_symbols, remaining)
            remaining -= n_sym
            bits = rng.integers(0, 2, size=(n_sub, n_users, n_sym, const.bits_per_symbol),
                                dtype=np.uint8)
            symbols = const.modulate(bits.reshape(-1)).reshape(n_sub, n_users, n_sym)
            tx = amplitude * symbols
            noise = np.sqrt(noise_var / 2.0) * (
                rng.standard_normal((n_sub, n_ant, n_sym))
                + 1j * rng.standard_normal((n_sub, n_ant, n_sym))
            )
            rx = h @ tx + noise
            equalised = (w @ rx) / amplitude
            bits_hat = const.demodulate(equalised.reshape(-1))
            n_errors += int(np.count_nonzero(bits_hat != bits.reshape(-1)))
            n_bits += bits.size
        points.append(BerPoint(snr_db=snr_db, ber=n_errors / n_bits,
                               n_bits=n_bits, n_errors=n_errors))
    return BerCurve(points=tuple(points), n_singular_subcarriers=n_singular)
