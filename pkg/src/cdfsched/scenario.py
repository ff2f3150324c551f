"""Network configuration for the cell of interest.

Everything downstream works with effective SNRs ``rho``; raw gains, powers
and noise levels are only accepted here and converted by :func:`normalize`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence


class ScenarioError(ValueError):
    """Raised when a configuration violates one or more invariants.

    ``errors`` holds every violation found, not just the first.
    """

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class UserChannelProfile:
    user_id: int
    rho_serving: float
    rho_interferers: tuple[float, ...] = ()

    @property
    def num_interferers(self) -> int:
        return len(self.rho_interferers)


@dataclass(frozen=True)
class RawChannelProfile:
    gain_serving: float
    power_serving: float
    noise_power: float
    gains_interferers: tuple[float, ...] = ()
    powers_interferers: tuple[float, ...] = ()


@dataclass(frozen=True)
class Scenario:
    num_antennas: int
    users: tuple[UserChannelProfile, ...] = field(default_factory=tuple)

    @property
    def num_users(self) -> int:
        return len(self.users)

    @classmethod
    def from_rhos(cls, num_antennas: int, profiles) -> "Scenario":
        """Build and validate a scenario from ``(rho_serving, [rho_b, ...])`` pairs."""
        users = tuple(
            UserChannelProfile(k, float(r0), tuple(float(r) for r in rb))
            for k, (r0, rb) in enumerate(profiles)
        )
        return validate(cls(int(num_antennas), users))

    def clone_user(self, k: int, num_users: int) -> "Scenario":
        """Cell of ``num_users`` statistically identical copies of user ``k``."""
        u = self.users[k]
        users = tuple(
            UserChannelProfile(i, u.rho_serving, u.rho_interferers)
            for i in range(num_users)
        )
        return Scenario(self.num_antennas, users)


def normalize(raw: RawChannelProfile, M: int, user_id: int = 0) -> UserChannelProfile:
    """Convert large-scale gains and powers into effective SNRs.

    rho = G * p / (M * sigma^2), applied to the serving link and to every
    interferer in the given order.
    """
    errors = []
    if not (isinstance(M, int) and M >= 1):
        errors.append(f"num_antennas must be an integer >= 1, got {M!r}")
    for name in ("gain_serving", "power_serving", "noise_power"):
        v = getattr(raw, name)
        if not (v > 0 and math.isfinite(v)):
            errors.append(f"{name} must be positive, got {v!r}")
    if len(raw.gains_interferers) != len(raw.powers_interferers):
        errors.append(
            "gains_interferers and powers_interferers differ in length "
            f"({len(raw.gains_interferers)} vs {len(raw.powers_interferers)})"
        )
    for name in ("gains_interferers", "powers_interferers"):
        for b, v in enumerate(getattr(raw, name)):
            if not (v > 0 and math.isfinite(v)):
                errors.append(f"{name}[{b}] must be positive, got {v!r}")
    if errors:
        raise ScenarioError(errors)

    scale = M * raw.noise_power
    return UserChannelProfile(
        user_id=user_id,
        rho_serving=raw.gain_serving * raw.power_serving / scale,
        rho_interferers=tuple(
            g * p / scale for g, p in zip(raw.gains_interferers, raw.powers_interferers)
        ),
    )


def validate(s: Scenario) -> Scenario:
    """Return ``s`` unchanged if every invariant holds, else raise ScenarioError."""
    errors = []
    M = s.num_antennas
    if not (isinstance(M, int) and not isinstance(M, bool) and M >= 1):
        errors.append(f"num_antennas must be an integer >= 1, got {M!r}")
    if len(s.users) == 0:
        errors.append("no users")
    ids = [u.user_id for u in s.users]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        errors.append(f"duplicate user ids: {dup}")
    elif ids and sorted(ids) != list(range(len(ids))):
        errors.append(f"user ids must be contiguous 0..{len(ids) - 1}, got {sorted(ids)}")
    for u in s.users:
        if not (u.rho_serving > 0 and math.isfinite(u.rho_serving)):
            errors.append(f"user {u.user_id}: rho_serving must be positive, got {u.rho_serving!r}")
        for b, r in enumerate(u.rho_interferers):
            if not (r > 0 and math.isfinite(r)):
                errors.append(
                    f"user {u.user_id}: rho_interferers[{b}] must be positive, got {r!r}"
                )
    if errors:
        raise ScenarioError(errors)
    return s


# --- JSON configuration --------------------------------------------------

_TOP_KEYS = {"num_antennas", "users"}
_LINEAR_KEYS = {"rho_serving", "rho_interferers"}
_RAW_KEYS = {
    "gain_serving_db",
    "gains_interferers_db",
    "power_serving_db",
    "powers_interferers_db",
    "noise_power_db",
}
_RAW_REQUIRED = {"gain_serving_db", "power_serving_db", "noise_power_db"}


def db_to_linear(v: float) -> float:
    return 10.0 ** (v / 10.0)


def _parse_user(k: int, entry: Any, M: int, errors: list[str]) -> UserChannelProfile | None:
    if not isinstance(entry, dict):
        errors.append(f"users[{k}]: expected an object")
        return None
    keys = set(entry)
    if "raw" in keys:
        extra = keys - {"raw"}
        if extra:
            errors.append(f"users[{k}]: unknown keys {sorted(extra)} next to 'raw'")
        raw = entry["raw"]
        if not isinstance(raw, dict):
            errors.append(f"users[{k}].raw: expected an object")
            return None
        unknown = set(raw) - _RAW_KEYS
        if unknown:
            errors.append(f"users[{k}].raw: unknown keys {sorted(unknown)}")
        missing = _RAW_REQUIRED - set(raw)
        if missing:
            errors.append(f"users[{k}].raw: missing keys {sorted(missing)}")
        if unknown or missing or extra:
            return None
        try:
            profile = RawChannelProfile(
                gain_serving=db_to_linear(float(raw["gain_serving_db"])),
                power_serving=db_to_linear(float(raw["power_serving_db"])),
                noise_power=db_to_linear(float(raw["noise_power_db"])),
                gains_interferers=tuple(
                    db_to_linear(float(v)) for v in raw.get("gains_interferers_db", [])
                ),
                powers_interferers=tuple(
                    db_to_linear(float(v)) for v in raw.get("powers_interferers_db", [])
                ),
            )
        except (TypeError, ValueError):
            errors.append(f"users[{k}].raw: values must be numbers")
            return None
        try:
            return normalize(profile, M if isinstance(M, int) and M >= 1 else 1, user_id=k)
        except ScenarioError as exc:
            errors.extend(f"users[{k}].raw: {e}" for e in exc.errors)
            return None

    unknown = keys - _LINEAR_KEYS
    if unknown:
        errors.append(f"users[{k}]: unknown keys {sorted(unknown)}")
        return None
    if "rho_serving" not in keys:
        errors.append(f"users[{k}]: missing 'rho_serving' (or a 'raw' block)")
        return None
    try:
        r0 = float(entry["rho_serving"])
        rb = tuple(float(v) for v in entry.get("rho_interferers", []))
    except (TypeError, ValueError):
        errors.append(f"users[{k}]: rho values must be numbers")
        return None
    bad = [f"rho_serving must be positive, got {r0!r}"] if not (r0 > 0 and math.isfinite(r0)) else []
    bad += [
        f"rho_interferers[{b}] must be positive, got {r!r}"
        for b, r in enumerate(rb)
        if not (r > 0 and math.isfinite(r))
    ]
    errors.extend(f"users[{k}]: {e}" for e in bad)
    return UserChannelProfile(k, r0, rb)


def scenario_from_dict(cfg: Any) -> Scenario:
    """Parse a configuration mapping, collecting every problem before raising."""
    if not isinstance(cfg, dict):
        raise ScenarioError(["configuration must be a JSON object"])
    errors: list[str] = []
    unknown = set(cfg) - _TOP_KEYS
    if unknown:
        errors.append(f"unknown top-level keys {sorted(unknown)}")
    for key in sorted(_TOP_KEYS - set(cfg)):
        errors.append(f"missing top-level key '{key}'")
    M = cfg.get("num_antennas")
    if M is not None and not (isinstance(M, int) and not isinstance(M, bool) and M >= 1):
        errors.append(f"num_antennas must be an integer >= 1, got {M!r}")
    raw_users = cfg.get("users", [])
    if not isinstance(raw_users, list):
        errors.append("users must be a list")
        raw_users = []
    users = [_parse_user(k, u, M, errors) for k, u in enumerate(raw_users)]
    if errors:
        raise ScenarioError(errors)
    return validate(Scenario(M, tuple(users)))


def load_scenario(path: str | Path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError([f"{path}: invalid JSON ({exc})"]) from exc
    return scenario_from_dict(cfg)


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "num_antennas": s.num_antennas,
        "users": [
            {"rho_serving": u.rho_serving, "rho_interferers": list(u.rho_interferers)}
            for u in s.users
        ],
    }
