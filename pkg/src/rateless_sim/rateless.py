"""Per-user rateless-code state and all queue evolutions.

The decoder queue r holds the mutual information still needed to decode the
current message; the encoder queue q is driven purely by ACK events; w and z
are the bookkeeping queues whose stability enforces the average block-size
and average power targets.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace


@dataclass
class UserState:
    q: float = 0.0                 # encoder backlog, bits
    r: float = 0.0                 # decoder residual, bits
    m: float = 0.0                 # current message size, bits
    n: int = 0                     # code index (ACKs so far)
    packets_in_flight: int = 0     # scheduled slots spent on the current code
    w: float = 0.0                 # block-size virtual queue, slots (signed)
    b_slope: float = 0.01          # U'(0), utility per bit
    d_cap: float = 800.0           # arrival cap, bits/slot

    @property
    def y(self) -> float:
        """Derived diagnostic q + r - m (not used by any control rule)."""
        return self.q + self.r - self.m


@dataclass
class VirtualState:
    z: float = 0.0                 # power virtual queue, power*slots

    def __post_init__(self):
        if self.z < 0.0:
            raise ValueError("z must be non-negative")


@dataclass(frozen=True)
class AckOutcome:
    acked_user: int | None = None
    recorded_block_size: int | None = None
    delivered_bits: float = 0.0

    def __post_init__(self):
        if (self.acked_user is None) != (self.recorded_block_size is None):
            raise ValueError("block size present iff a user acked")


NO_ACK = AckOutcome()


def decoder_step(u: UserState, scheduled: bool, info_bits: float,
                 user_id: int = 0) -> tuple[UserState, AckOutcome]:
    """One slot of decoder-queue evolution.

    When scheduled, info_bits = I(h, P) * K is credited against the residual;
    an ACK fires once the residual is covered, the final slot counting toward
    the block size.  The caller resets m and r for the next code afterwards
    (the next message size is a control decision, not a queue law).
    """
    if not scheduled:
        return u, NO_ACK
    if info_bits < 0.0:
        raise ValueError(f"info_bits must be non-negative, got {info_bits}")
    if u.r > info_bits:
        return replace(u, r=u.r - info_bits,
                       packets_in_flight=u.packets_in_flight + 1), NO_ACK
    block = u.packets_in_flight + 1
    out = AckOutcome(acked_user=user_id, recorded_block_size=block,
                     delivered_bits=u.m)
    return replace(u, n=u.n + 1, packets_in_flight=0), out


def encoder_step(u: UserState, ack: AckOutcome, x: float,
                 user_id: int = 0) -> UserState:
    """q' = (q - m * 1{acked})^+ + x with the admitted arrivals x."""
    if not 0.0 <= x <= u.d_cap:
        raise ValueError(f"x must be in [0, {u.d_cap}], got {x}")
    q = u.q
    if ack.acked_user == user_id:
        q -= ack.delivered_bits
        if q < 0.0:
            q = 0.0
    return replace(u, q=q + x)


def z_step(v: VirtualState, p: float, p_av: float) -> VirtualState:
    """z' = (z - P_av)^+ + P."""
    if p < 0.0:
        raise ValueError(f"power must be non-negative, got {p}")
    z = v.z - p_av
    if z < 0.0:
        z = 0.0
    return VirtualState(z=z + p)


def w_step(u: UserState, block_size: int, l_av: float) -> UserState:
    """w' = w + L - L_av; call exactly once per ACK of this user."""
    if block_size < 1:
        raise ValueError(f"block_size must be >= 1, got {block_size}")
    return replace(u, w=u.w + block_size - l_av)


def reset_code(u: UserState, m_next: float, eps_overhead: float = 0.0) -> UserState:
    """Start the next code: set its size and the decoder residual."""
    if m_next < 0.0:
        raise ValueError("message size must be non-negative")
    return replace(u, m=m_next, r=(1.0 + eps_overhead) * m_next)
