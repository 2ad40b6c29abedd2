"""Scenario configuration: strict JSON schema and the built-in figure presets.

A config document has exactly these top-level keys::

    scenario, tx, rx, ris, pathloss, noise, power, ris_hw, sweep, trials, seed, output

Powers are given in dBm, amplitude caps as a squared gain in dB. Fields
marked as lists below may also be a single scalar; lists span the series
drawn in one run (their cross product).

``pathloss``
    ``eta_direct``, ``eta_forward``, ``eta_backward``, ``beta_db`` and
    ``fading`` (list of ``"los"``/``"rayleigh"``); optional ``gains``, three
    fixed power gains (direct, forward, backward) overriding the geometry.
``noise``
    ``sigma1_dbm`` (receiver), ``sigma2_dbm`` (surface).
``power``
    ``p_t_dbm``; exactly one of ``p_ris_dbm`` (total budget, list) or
    ``p_out_dbm`` (amplification budget, list); ``p_c_dbm``, ``p_dc_dbm``,
    ``efficiency``.
``ris_hw``
    ``n_rx`` (list), ``m_elems`` (list), ``a_max_sq_db`` (list) and
    ``passive`` (bool, add passive baseline series).
``sweep``
    A list of values or ``{"start", "stop", "num", "spacing"}`` with
    spacing ``"linear"`` or ``"log"``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from activeris.channel import FadingKind, FadingModel
from activeris.errors import ConfigError, RisError
from activeris.params import Geometry, PowerModel, SystemParams, db_to_linear, dbm_to_watts


class Scenario(str, enum.Enum):
    AMPLITUDE_SWEEP = "amplitude-sweep"
    CONVERGENCE = "convergence"
    RATE_VS_TXPOWER = "rate-vs-txpower"
    RATE_VS_ELEMENTS = "rate-vs-elements"
    RATE_VS_LOCATION = "rate-vs-location"


TOP_KEYS = ("scenario", "tx", "rx", "ris", "pathloss", "noise", "power", "ris_hw",
            "sweep", "trials", "seed", "output")
_SECTION_KEYS = {
    "pathloss": ({"eta_direct", "eta_forward", "eta_backward", "beta_db", "fading"}, {"gains"}),
    "noise": ({"sigma1_dbm", "sigma2_dbm"}, set()),
    "power": ({"p_t_dbm"}, {"p_ris_dbm", "p_out_dbm", "p_c_dbm", "p_dc_dbm", "efficiency"}),
    "ris_hw": ({"n_rx", "m_elems"}, {"a_max_sq_db", "passive"}),
}
U64_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario description.

    ``params``, ``pm`` and ``fading`` describe the first series; the
    ``*_values`` tuples hold every value of each series axis. Budgets are in
    watts and ``a_max_values`` are amplitude caps (not squared).
    """

    scenario: Scenario
    params: SystemParams
    pm: Optional[PowerModel]
    geom: Geometry
    fading: FadingModel
    trials: int
    seed: int
    sweep: Tuple[float, ...]
    output_path: Optional[str]
    fading_kinds: Tuple[FadingKind, ...]
    n_rx_values: Tuple[int, ...]
    m_values: Tuple[int, ...]
    a_max_values: Tuple[float, ...]
    p_ris_values: Optional[Tuple[float, ...]] = None
    p_out_values: Optional[Tuple[float, ...]] = None
    p_c: float = 1e-4
    p_dc: float = 0.0
    efficiency: float = 1.0
    include_passive: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials!r}")
        if not 0 <= self.seed <= U64_MAX:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not self.sweep:
            raise ConfigError("sweep must not be empty")
        if (self.p_ris_values is None) == (self.p_out_values is None) \
                and self.scenario is not Scenario.AMPLITUDE_SWEEP:
            raise ConfigError("give exactly one of power.p_ris_dbm and power.p_out_dbm")

    def power_model(self, m: int, p_ris: Optional[float] = None,
                    p_out: Optional[float] = None) -> PowerModel:
        """Power model for ``m`` elements under a total or an amplification budget."""
        if p_out is not None:
            return PowerModel.for_output_budget(p_out, m, self.p_c, self.p_dc, self.efficiency)
        return PowerModel(p_ris, self.p_c, self.p_dc, self.efficiency)

    def with_overrides(self, seed: Optional[int] = None, trials: Optional[int] = None,
                       output_path: Optional[str] = None) -> "ScenarioConfig":
        return replace(self,
                       seed=self.seed if seed is None else int(seed),
                       trials=self.trials if trials is None else int(trials),
                       output_path=self.output_path if output_path is None else output_path)


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _number(section: str, key: str, v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{section}.{key} must be a finite number, got {v!r}")
    return float(v)


def _numbers(section: str, key: str, v) -> Tuple[float, ...]:
    vals = tuple(_number(section, key, x) for x in _as_list(v))
    if not vals:
        raise ConfigError(f"{section}.{key} must not be empty")
    return vals


def _ints(section: str, key: str, v) -> Tuple[int, ...]:
    vals = _numbers(section, key, v)
    if any(x != int(x) or x < 1 for x in vals):
        raise ConfigError(f"{section}.{key} must hold integers >= 1, got {v!r}")
    return tuple(int(x) for x in vals)


def _point(key: str, v) -> Tuple[float, float]:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ConfigError(f"{key} must be a 2-element [x, y] list, got {v!r}")
    return (_number(key, "x", v[0]), _number(key, "y", v[1]))


def _section(doc: Dict[str, Any], name: str) -> Dict[str, Any]:
    sec = doc[name]
    if not isinstance(sec, dict):
        raise ConfigError(f"{name} must be an object")
    required, optional = _SECTION_KEYS[name]
    missing = required - sec.keys()
    if missing:
        raise ConfigError(f"{name} is missing {sorted(missing)}")
    unknown = sec.keys() - required - optional
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {sorted(unknown)}")
    return sec


def _sweep(v) -> Tuple[float, ...]:
    if isinstance(v, dict):
        unknown = v.keys() - {"start", "stop", "num", "spacing"}
        if unknown:
            raise ConfigError(f"unknown keys in sweep: {sorted(unknown)}")
        try:
            start = _number("sweep", "start", v["start"])
            stop = _number("sweep", "stop", v["stop"])
            num = _ints("sweep", "num", v["num"])[0]
        except KeyError as exc:
            raise ConfigError(f"sweep is missing {exc.args[0]!r}") from None
        spacing = v.get("spacing", "linear")
        if spacing == "linear":
            return tuple(float(x) for x in np.linspace(start, stop, num))
        if spacing == "log":
            if start <= 0 or stop <= 0:
                raise ConfigError("log sweep bounds must be > 0")
            return tuple(float(x) for x in np.geomspace(start, stop, num))
        raise ConfigError(f"sweep.spacing must be 'linear' or 'log', got {spacing!r}")
    return _numbers("sweep", "values", v)


def config_from_dict(doc: Dict[str, Any]) -> ScenarioConfig:
    """Validate a parsed config document.

    Raises
    ------
    ConfigError
        On unknown or missing keys, wrong types or out-of-domain values.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = doc.keys() - set(TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    missing = set(TOP_KEYS) - doc.keys() - {"output"}
    if missing:
        raise ConfigError(f"missing top-level keys: {sorted(missing)}")

    try:
        scenario = Scenario(doc["scenario"])
    except ValueError:
        raise ConfigError(f"unknown scenario {doc['scenario']!r}; "
                          f"expected one of {[s.value for s in Scenario]}") from None

    pl = _section(doc, "pathloss")
    noise = _section(doc, "noise")
    power = _section(doc, "power")
    hw = _section(doc, "ris_hw")

    try:
        kinds = tuple(FadingKind(k) for k in _as_list(pl["fading"]))
    except ValueError:
        raise ConfigError(f"pathloss.fading must be 'los' or 'rayleigh', got {pl['fading']!r}") \
            from None
    if not kinds:
        raise ConfigError("pathloss.fading must not be empty")
    gains = pl.get("gains")
    if gains is not None:
        gains = _numbers("pathloss", "gains", gains)

    trials = doc["trials"]
    seed = doc["seed"]
    if isinstance(trials, bool) or not isinstance(trials, int):
        raise ConfigError(f"trials must be an integer, got {trials!r}")
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output must be a path string or null")

    p_ris = power.get("p_ris_dbm")
    p_out = power.get("p_out_dbm")
    a_max_db = _numbers("ris_hw", "a_max_sq_db", hw.get("a_max_sq_db", 0.0))
    passive = hw.get("passive", False)
    if not isinstance(passive, bool):
        raise ConfigError("ris_hw.passive must be true or false")

    try:
        beta = float(db_to_linear(_number("pathloss", "beta_db", pl["beta_db"])))
        geom = Geometry(_point("tx", doc["tx"]), _point("rx", doc["rx"]), _point("ris", doc["ris"]),
                        _number("pathloss", "eta_direct", pl["eta_direct"]),
                        _number("pathloss", "eta_forward", pl["eta_forward"]),
                        _number("pathloss", "eta_backward", pl["eta_backward"]),
                        beta, beta, beta)
        n_rx = _ints("ris_hw", "n_rx", hw["n_rx"])
        m_elems = _ints("ris_hw", "m_elems", hw["m_elems"])
        a_max = tuple(math.sqrt(float(db_to_linear(v))) for v in a_max_db)
        params = SystemParams(float(dbm_to_watts(_number("power", "p_t_dbm", power["p_t_dbm"]))),
                              float(dbm_to_watts(_number("noise", "sigma1_dbm", noise["sigma1_dbm"]))),
                              float(dbm_to_watts(_number("noise", "sigma2_dbm", noise["sigma2_dbm"]))),
                              n_rx[0], m_elems[0], a_max[0])
        fading = FadingModel(kinds[0], gains=gains)
        p_c = float(dbm_to_watts(_number("power", "p_c_dbm", power.get("p_c_dbm", -10.0))))
        p_dc = (float(dbm_to_watts(_number("power", "p_dc_dbm", power["p_dc_dbm"])))
                if power.get("p_dc_dbm") is not None else 0.0)
        eff = _number("power", "efficiency", power.get("efficiency", 1.0))
        p_ris_w = (tuple(float(dbm_to_watts(v)) for v in _numbers("power", "p_ris_dbm", p_ris))
                   if p_ris is not None else None)
        p_out_w = (tuple(float(dbm_to_watts(v)) for v in _numbers("power", "p_out_dbm", p_out))
                   if p_out is not None else None)
        pm = None
        if p_ris_w is not None:
            pm = PowerModel(p_ris_w[0], p_c, p_dc, eff)
        elif p_out_w is not None:
            pm = PowerModel.for_output_budget(p_out_w[0], m_elems[0], p_c, p_dc, eff)
        return ScenarioConfig(
            scenario=scenario, params=params, pm=pm, geom=geom, fading=fading,
            trials=trials, seed=seed, sweep=_sweep(doc["sweep"]), output_path=output,
            fading_kinds=kinds, n_rx_values=n_rx, m_values=m_elems, a_max_values=a_max,
            p_ris_values=p_ris_w, p_out_values=p_out_w, p_c=p_c, p_dc=p_dc, efficiency=eff,
            include_passive=passive)
    except ConfigError:
        raise
    except RisError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ScenarioConfig:
    """Read and validate a JSON config file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(doc)


FIGURES = ("fig3", "fig4", "fig5", "fig6", "fig7")

_BASE = {
    "tx": [0.0, 0.0],
    "rx": [200.0, 0.0],
    "ris": [180.0, 10.0],
    "noise": {"sigma1_dbm": -80.0, "sigma2_dbm": -80.0},
    "seed": 2024,
}
# The simulated curves are reproduced with the forward link decaying with
# exponent 2.0 and the backward link with 2.8.
_PATHLOSS = {"eta_direct": 3.5, "eta_forward": 2.0, "eta_backward": 2.8, "beta_db": 30.0}
_HW_POWER = {"p_c_dbm": -10.0, "p_dc_dbm": -5.0, "efficiency": 0.8}


def figure_config_dict(figure: str) -> Dict[str, Any]:
    """Config document reproducing one of the figures ``fig3`` ... ``fig7``."""
    if figure not in FIGURES:
        raise ConfigError(f"unknown figure {figure!r}; expected one of {list(FIGURES)}")
    doc = dict(_BASE, output=f"{figure}.csv", trials=1000)
    if figure == "fig3":
        doc.update(
            scenario="amplitude-sweep",
            pathloss=dict(_PATHLOSS, fading="los", gains=[0.2, 0.5, 0.8]),
            # p_t / sigma1^2 = 10 dB
            power={"p_t_dbm": -70.0},
            ris_hw={"n_rx": 1, "m_elems": 1, "a_max_sq_db": 60.0},
            sweep={"start": 1e-2, "stop": 1e3, "num": 10000, "spacing": "log"},
            trials=1,
        )
    elif figure == "fig4":
        doc.update(
            scenario="convergence",
            pathloss=dict(_PATHLOSS, fading="rayleigh"),
            power=dict(_HW_POWER, p_t_dbm=23.0, p_out_dbm=10.0),
            ris_hw={"n_rx": [4, 8], "m_elems": [16, 32], "a_max_sq_db": 40.0},
            sweep=list(range(0, 51)),
        )
    elif figure == "fig5":
        doc.update(
            scenario="rate-vs-txpower",
            pathloss=dict(_PATHLOSS, fading="rayleigh"),
            power=dict(_HW_POWER, p_t_dbm=23.0, p_out_dbm=[20.0, 10.0, 0.0]),
            ris_hw={"n_rx": 4, "m_elems": 16, "a_max_sq_db": [40.0, 50.0], "passive": True},
            sweep={"start": 0.0, "stop": 30.0, "num": 7, "spacing": "linear"},
        )
    elif figure == "fig6":
        doc.update(
            scenario="rate-vs-elements",
            pathloss=dict(_PATHLOSS, fading=["los", "rayleigh"]),
            power=dict(_HW_POWER, p_t_dbm=23.0, p_ris_dbm=10.0),
            ris_hw={"n_rx": 1, "m_elems": 1, "a_max_sq_db": [40.0, 50.0], "passive": True},
            sweep=list(range(1, 25)) + list(range(30, 101, 10)),
        )
    else:
        doc.update(
            scenario="rate-vs-location",
            pathloss=dict(_PATHLOSS, fading="los"),
            power=dict(_HW_POWER, p_t_dbm=23.0, p_ris_dbm=[10.0, 20.0]),
            ris_hw={"n_rx": 1, "m_elems": 1, "a_max_sq_db": 40.0, "passive": True},
            sweep={"start": 20.0, "stop": 180.0, "num": 17, "spacing": "linear"},
            trials=1,
        )
    return doc


def default_paper_config(figure: str) -> ScenarioConfig:
    return config_from_dict(figure_config_dict(figure))
