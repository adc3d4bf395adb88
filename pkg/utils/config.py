from dataclasses import dataclass, field, replace
from pathlib import Path

from constant.defaults import DEFAULT_MAXDEG, DEFAULT_N, DEFAULT_SEED, DEFAULT_TRIALS, DEFAULT_TRUNCATION
from constant.signs import SIGN_NAMES
from utils.logger import get_logger

logger = get_logger("Config")

INT_KEYS = ("n", "maxdeg", "trials", "seed", "truncate")


@dataclass(frozen=True)
class RunConfig:
    n: int = DEFAULT_N
    maxdeg: int = DEFAULT_MAXDEG
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    truncate: int = DEFAULT_TRUNCATION
    signs: dict[str, int] = field(default_factory=dict)
    out: str | None = None

    def __post_init__(self) -> None:
        for key in ("n", "maxdeg", "trials", "truncate"):
            value = getattr(self, key)
            if value < 1:
                raise ValueError(f"{key} must be positive, got {value}")
        for name, value in self.signs.items():
            if name not in SIGN_NAMES:
                raise ValueError(f"unknown sign '{name}', expected one of {', '.join(SIGN_NAMES)}")
            if value not in (1, -1):
                raise ValueError(f"sign-{name} must be 1 or -1, got {value}")

    def merged(self, overrides: dict) -> "RunConfig":
        """A copy with the non-None overrides applied; sign overrides are merged key by key."""
        values = {k: v for k, v in overrides.items() if v is not None and k != "signs"}
        signs = {**self.signs, **overrides.get("signs", {})}
        return replace(self, signs=signs, **values)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "maxdeg": self.maxdeg,
            "trials": self.trials,
            "seed": self.seed,
            "truncate": self.truncate,
            "signs": dict(sorted(self.signs.items())),
        }


def parse_config(text: str, source: str = "<config>") -> dict:
    """Raw overrides from key=value lines; '#' starts a comment."""
    values: dict = {"signs": {}}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected key=value, got '{line}'")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key in INT_KEYS:
                values[key] = int(value)
            elif key.startswith("sign-"):
                values["signs"][key.removeprefix("sign-")] = int(value)
            elif key == "out":
                values["out"] = value
            else:
                raise ValueError(f"unknown key '{key}'")
        except ValueError as e:
            raise ValueError(f"{source}:{lineno}: {e}") from e
    return values


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        logger.error("Config file not found: %s", path)
        raise ValueError(f"config file {path} does not exist")
    overrides = parse_config(path.read_text(encoding="utf-8"), str(path))
    logger.debug("Loaded %s keys from %s", len(overrides) - 1 + len(overrides["signs"]), path)
    return RunConfig().merged(overrides)
