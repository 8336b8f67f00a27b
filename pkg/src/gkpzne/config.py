"""Run configuration: YAML file with flag overrides."""

from dataclasses import dataclass, field, fields

import numpy as np
import yaml

from .errors import GkpZneError


class ConfigError(GkpZneError, ValueError):
    pass


@dataclass
class SweepConfig:
    # shared
    seed: int = 7
    out: str = "runs/out"
    epsilon: float = 1e-12
    dim: int | None = None            # cutoff override; None -> default rule
    jobs: int = 1
    resume: bool = False
    bootstrap: int = 1000
    schedule_n0: float = 30.0
    schedule_dn: float = 1.0
    schedule_count: int = 30
    # sweep
    loss_depths: list = field(default_factory=lambda: [0.2])
    state: str = "plus"
    observable: str = "X"
    # threshold
    x_min: float = 0.05
    x_max: float = 0.7
    x_count: int = 25
    x_spacing: str = "log"
    compare_nbars: list = field(default_factory=lambda: [4.0, 10.0])
    # two-qubit
    two_qubit_depths: list = field(default_factory=lambda: [0.2, 0.4])
    # random coherence
    coherence_depths: list = field(default_factory=lambda: [0.2, 0.4])
    trials: int = 50
    # parity
    parity_input: str = "coherence.csv"
    parity_mode: str = "absolute"
    parity_ideal: float = 0.0
    # wigner
    wigner_nbar: float = 4.0
    wigner_eta: float = 0.82
    wigner_extent: float = 5.0
    wigner_points: int = 161

    def validate(self):
        if any(x < 0 for x in self.loss_depths):
            raise ConfigError("loss depths must be >= 0")
        if any(x < 0 for x in self.two_qubit_depths + self.coherence_depths):
            raise ConfigError("loss depths must be >= 0")
        if self.schedule_dn <= 0 or self.schedule_count < 1:
            raise ConfigError("schedule requires dn > 0 and count >= 1")
        if self.schedule_n0 - (self.schedule_count - 1) * self.schedule_dn < 0.5:
            raise ConfigError("schedule underflows nbar = 0.5")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be >= 0")
        if self.state not in ("plus", "minus", "zero", "one", "mixed"):
            raise ConfigError(f"unknown state label {self.state!r}")
        if self.observable not in ("I", "X", "Y", "Z"):
            raise ConfigError(f"unknown observable {self.observable!r}")
        if self.x_spacing not in ("log", "linear"):
            raise ConfigError("x_spacing must be 'log' or 'linear'")
        if not 0 < self.wigner_eta <= 1:
            raise ConfigError("wigner eta must be in (0, 1]")
        if self.parity_mode not in ("absolute", "distance"):
            raise ConfigError("parity mode must be 'absolute' or 'distance'")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        return self

    def schedule_points(self):
        from .extrapolate import build_schedule

        return build_schedule(self.schedule_n0, self.schedule_dn, self.schedule_count)

    def threshold_grid(self):
        if self.x_spacing == "log":
            return list(np.geomspace(self.x_min, self.x_max, self.x_count))
        return list(np.linspace(self.x_min, self.x_max, self.x_count))


_SECTION_KEYS = {
    "sweep": {"loss_depths": "loss_depths", "state": "state", "observable": "observable"},
    "threshold": {
        "x_min": "x_min", "x_max": "x_max", "x_count": "x_count",
        "spacing": "x_spacing", "compare_nbars": "compare_nbars",
    },
    "two_qubit": {"loss_depths": "two_qubit_depths"},
    "random_coherence": {"loss_depths": "coherence_depths", "trials": "trials"},
    "parity": {"input": "parity_input", "mode": "parity_mode", "ideal": "parity_ideal"},
    "wigner": {
        "nbar": "wigner_nbar", "eta": "wigner_eta",
        "extent": "wigner_extent", "points": "wigner_points",
    },
}
_TOP_KEYS = {"seed", "out", "epsilon", "dim", "jobs", "bootstrap"}


def load_config(path: str | None) -> SweepConfig:
    cfg = SweepConfig()
    if path is None:
        return cfg.validate()
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    known = {f.name for f in fields(SweepConfig)}
    for key, val in data.items():
        if key == "schedule":
            if not isinstance(val, dict):
                raise ConfigError("schedule must be a mapping {n0, dn, count}")
            for k, attr in (("n0", "schedule_n0"), ("dn", "schedule_dn"),
                            ("count", "schedule_count")):
                if k in val:
                    setattr(cfg, attr, val[k])
        elif key in _SECTION_KEYS:
            if not isinstance(val, dict):
                raise ConfigError(f"section {key!r} must be a mapping")
            table = _SECTION_KEYS[key]
            for k, v in val.items():
                if k not in table:
                    raise ConfigError(f"unknown key {key}.{k}")
                setattr(cfg, table[k], v)
        elif key in _TOP_KEYS or key in known:
            setattr(cfg, key, val)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return cfg.validate()


def default_config_yaml() -> str:
    cfg = SweepConfig()
    doc = {
        "seed": cfg.seed,
        "out": cfg.out,
        "epsilon": cfg.epsilon,
        "dim": cfg.dim,
        "jobs": cfg.jobs,
        "bootstrap": cfg.bootstrap,
        "schedule": {"n0": cfg.schedule_n0, "dn": cfg.schedule_dn, "count": cfg.schedule_count},
        "sweep": {"loss_depths": cfg.loss_depths, "state": cfg.state,
                  "observable": cfg.observable},
        "threshold": {"x_min": cfg.x_min, "x_max": cfg.x_max, "x_count": cfg.x_count,
                      "spacing": cfg.x_spacing, "compare_nbars": cfg.compare_nbars},
        "two_qubit": {"loss_depths": cfg.two_qubit_depths},
        "random_coherence": {"loss_depths": cfg.coherence_depths, "trials": cfg.trials},
        "parity": {"input": cfg.parity_input, "mode": cfg.parity_mode,
                   "ideal": cfg.parity_ideal},
        "wigner": {"nbar": cfg.wigner_nbar, "eta": cfg.wigner_eta,
                   "extent": cfg.wigner_extent, "points": cfg.wigner_points},
    }
    return yaml.safe_dump(doc, sort_keys=False)
