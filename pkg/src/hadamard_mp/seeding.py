"""Deterministic per-trial seed derivation.

The mixer is the SplitMix64 finalizer, a bijection on 64-bit words. For a
fixed master seed the map ``(trial, role) -> seed`` is

    mix(mix(master) + 2 * trial + role)   (mod 2**64)

which is injective for ``trial < 2**63`` because both the offset and ``mix``
are injective. Pure integer arithmetic, so outputs are platform independent.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

ROLES = {"X": 0, "Y": 1}


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_trial_seed(master_seed: int, trial_index: int, role: str) -> int:
    """Return the 64-bit stream seed for matrix ``role`` of trial ``trial_index``."""
    if role not in ROLES:
        raise ValueError(f"role must be one of {sorted(ROLES)}, got {role!r}")
    if not 0 <= trial_index < (1 << 63):
        raise ValueError("trial_index out of range")
    base = mix64(master_seed + 0x9E3779B97F4A7C15)
    return mix64(base + 2 * trial_index + ROLES[role])
