"""Pipeline configuration: defaults, file loading, overrides, fingerprint."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .skew import SkewParams

__all__ = ["PipelineConfig", "ConfigError"]


class ConfigError(ValueError):
    """Bad configuration key, value, or file."""


@dataclass(frozen=True)
class PipelineConfig:
    """Every tunable of the pipeline; defaults are the documented ones."""

    conf_line_pass1: float = 0.3
    conf_line_pass2: float = 0.5
    conf_word: float = 0.4
    height_factor: float = 1.7
    overlap_frac: float = 0.5
    high_conf: float = 0.5
    trim_fraction: float = 0.02
    min_correction_deg: float = 1.0
    dskew_height: int = 128
    lskew_theta_window_deg: float = 45.0
    lskew_threshold_frac: float = 0.25
    canny_low: float = 50.0
    canny_high: float = 150.0
    pht_min_len_frac: float = 0.15
    pht_max_gap: int = 10
    pht_vote_threshold: int = 30
    pht_seed: int = 0x5EED
    ta: float = 0.5

    def validate(self) -> None:
        def in_unit(name: str) -> None:
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} out of [0, 1]: {v!r}")

        for name in ("conf_line_pass1", "conf_line_pass2", "conf_word", "high_conf"):
            in_unit(name)
        if self.height_factor <= 1.0:
            raise ConfigError(f"height_factor must be > 1: {self.height_factor!r}")
        if not 0.0 < self.overlap_frac <= 1.0:
            raise ConfigError(f"overlap_frac out of (0, 1]: {self.overlap_frac!r}")
        if not 0.0 <= self.trim_fraction <= 0.25:
            raise ConfigError(f"trim_fraction out of [0, 0.25]: {self.trim_fraction!r}")
        if self.min_correction_deg < 0:
            raise ConfigError(f"min_correction_deg must be >= 0: {self.min_correction_deg!r}")
        if self.dskew_height < 8:
            raise ConfigError(f"dskew_height must be >= 8: {self.dskew_height}")
        if not 0.0 < self.lskew_theta_window_deg <= 45.0:
            raise ConfigError(
                f"lskew_theta_window_deg out of (0, 45]: {self.lskew_theta_window_deg!r}"
            )
        if not 0.0 < self.lskew_threshold_frac <= 1.0:
            raise ConfigError(
                f"lskew_threshold_frac out of (0, 1]: {self.lskew_threshold_frac!r}"
            )
        if not 0.0 <= self.canny_low <= self.canny_high:
            raise ConfigError(
                f"need 0 <= canny_low <= canny_high: {self.canny_low!r}, {self.canny_high!r}"
            )
        if not 0.0 < self.pht_min_len_frac <= 1.0:
            raise ConfigError(f"pht_min_len_frac out of (0, 1]: {self.pht_min_len_frac!r}")
        if self.pht_max_gap < 0:
            raise ConfigError(f"pht_max_gap must be >= 0: {self.pht_max_gap}")
        if self.pht_vote_threshold < 1:
            raise ConfigError(f"pht_vote_threshold must be >= 1: {self.pht_vote_threshold}")
        if self.pht_seed < 0:
            raise ConfigError(f"pht_seed must be >= 0: {self.pht_seed}")
        if not 0.0 < self.ta <= 1.0:
            raise ConfigError(f"ta out of (0, 1]: {self.ta!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def fingerprint(self) -> str:
        """Hex digest of the full configuration, stable across runs."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("ascii")).hexdigest()

    def skew_params(self) -> SkewParams:
        return SkewParams(
            theta_window_deg=self.lskew_theta_window_deg,
            lskew_threshold_frac=self.lskew_threshold_frac,
            canny_low=self.canny_low,
            canny_high=self.canny_high,
            dskew_height=self.dskew_height,
            pht_min_len_frac=self.pht_min_len_frac,
            pht_max_gap=self.pht_max_gap,
            pht_vote_threshold=self.pht_vote_threshold,
            pht_seed=self.pht_seed,
        )

    def with_overrides(self, overrides: dict[str, str]) -> "PipelineConfig":
        """Apply string key=value overrides (CLI), coercing to field types."""
        return dataclasses.replace(self, **_coerce(overrides))

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        """Load from JSON or flat key=value text ('#' starts a comment)."""
        text = Path(path).read_text()
        if text.lstrip().startswith("{"):
            try:
                raw = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON: {exc}") from None
            if not isinstance(raw, dict):
                raise ConfigError(f"{path}: top-level JSON must be an object")
            pairs = {str(k): v for k, v in raw.items()}
        else:
            pairs = {}
            for lineno, raw_line in enumerate(text.splitlines(), start=1):
                line = raw_line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value")
                k, v = line.split("=", 1)
                pairs[k.strip()] = v.strip()
        return cls(**_coerce(pairs))


def _coerce(pairs: dict) -> dict:
    types = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}
    out = {}
    for key, val in pairs.items():
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        want_int = types[key] == "int" or types[key] is int
        try:
            out[key] = int(val, 0) if want_int and isinstance(val, str) else (
                int(val) if want_int else float(val)
            )
        except (TypeError, ValueError):
            raise ConfigError(f"bad value for {key}: {val!r}") from None
    return out
