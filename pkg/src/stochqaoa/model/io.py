import logging
from pathlib import Path
from typing import Any, Dict, List

import yaml

from stochqaoa.errors import InstanceParseError
from stochqaoa.model.instance import (FirstStageVar, InstanceSpec, Prices,
                                      ScenarioDistribution)

_logger = logging.getLogger(__name__)


def _parse_dist(raw: Any, path: str) -> Dict[int, float]:
    # either a mapping {value: prob} or a list of "value:prob" strings
    if isinstance(raw, dict):
        items = raw.items()
    elif isinstance(raw, list):
        items = []
        for entry in raw:
            if isinstance(entry, str) and ":" in entry:
                items.append(tuple(entry.split(":", 1)))
            elif isinstance(entry, (list, tuple)) and len(entry) == 2:
                items.append(tuple(entry))
            else:
                raise InstanceParseError(f"{path}: cannot parse entry {entry!r}, "
                                         f"expected 'value:prob'")
    else:
        raise InstanceParseError(f"{path}: expected a mapping or a list, "
                                 f"got {type(raw).__name__}")
    dist = {}
    for value, prob in items:
        try:
            key = int(value)
            dist[key] = float(prob)
        except (TypeError, ValueError) as e:
            raise InstanceParseError(f"{path}: bad pair {value!r}:{prob!r}") from e
    return dist


def _require(data: Dict, key: str, path: str) -> Any:
    if key not in data:
        raise InstanceParseError(f"{path}: missing key '{key}'")
    return data[key]


def instance_from_dict(data: Any, name: str = "instance") -> InstanceSpec:
    """Builds an InstanceSpec from the parsed content of an instance file.

    The instance is not validated here: use `instance.ensure_valid` for that.

    Args:
        data: dictionary with keys `horizon`, `prices` ({ev, buy, sell}),
            `timesteps` (list of {j_bits, j_offset, recourse_bits, p_bits,
            p_offset, dist}) and optionally a default `recourse_bits`.
        name: label attached to the instance.
    Returns:
        the instance.
    """
    if not isinstance(data, dict):
        raise InstanceParseError("instance file must contain a mapping")
    try:
        horizon = int(_require(data, "horizon", "horizon"))
        raw_prices = _require(data, "prices", "prices")
        if not isinstance(raw_prices, dict):
            raise InstanceParseError("prices: expected a mapping {ev, buy, sell}")
        prices = Prices(ev_price=float(_require(raw_prices, "ev", "prices")),
                        intraday_buy=float(_require(raw_prices, "buy", "prices")),
                        intraday_sell=float(_require(raw_prices, "sell", "prices")))
        timesteps = _require(data, "timesteps", "timesteps")
        if not isinstance(timesteps, list):
            raise InstanceParseError("timesteps: expected a list")

        j_vars: List[FirstStageVar] = []
        p_dists: List[ScenarioDistribution] = []
        recourse_widths = set()
        default_recourse = data.get("recourse_bits")
        for t, step in enumerate(timesteps):
            path = f"timesteps[{t}]"
            if not isinstance(step, dict):
                raise InstanceParseError(f"{path}: expected a mapping")
            j_vars.append(FirstStageVar(bit_width=int(_require(step, "j_bits", path)),
                                        offset=int(step.get("j_offset", 0))))
            dist = _parse_dist(_require(step, "dist", path), f"{path}.dist")
            p_dists.append(ScenarioDistribution.from_mapping(
                dist, offset=int(step.get("p_offset", 0)),
                bit_width=int(step.get("p_bits", 0))))
            width = step.get("recourse_bits", default_recourse)
            if width is None:
                raise InstanceParseError(f"{path}: missing key 'recourse_bits'")
            recourse_widths.add(int(width))
    except (TypeError, ValueError) as e:
        if isinstance(e, InstanceParseError):
            raise
        raise InstanceParseError(f"malformed instance: {e}") from e

    if len(recourse_widths) > 1:
        raise InstanceParseError(f"timesteps: recourse_bits must agree across "
                                 f"timesteps, got {sorted(recourse_widths)}")
    if not recourse_widths:
        if default_recourse is None:
            raise InstanceParseError("timesteps: no timestep defined")
        recourse_widths.add(int(default_recourse))

    return InstanceSpec(horizon=horizon, prices=prices, j_vars=tuple(j_vars),
                        p_dists=tuple(p_dists),
                        recourse_bit_width=recourse_widths.pop(), name=name)


def instance_to_dict(instance: InstanceSpec) -> Dict[str, Any]:
    """Inverse of `instance_from_dict`."""
    timesteps = []
    for var, dist in zip(instance.j_vars, instance.p_dists):
        step = {"j_bits": var.bit_width, "j_offset": var.offset,
                "recourse_bits": instance.recourse_bit_width}
        if dist.bit_width > 0:
            step["p_bits"] = dist.bit_width
        step["p_offset"] = dist.offset
        step["dist"] = {v: p for v, p in dist.support}
        timesteps.append(step)
    return {
        "horizon": instance.horizon,
        "prices": {"ev": instance.prices.ev_price,
                   "buy": instance.prices.intraday_buy,
                   "sell": instance.prices.intraday_sell},
        "timesteps": timesteps,
    }


def load_instance(path: str | Path) -> InstanceSpec:
    """Reads an instance from a YAML file.

    Args:
        path: path of the instance file.
    Returns:
        the (not yet validated) instance, named after the file stem.
    """
    path = Path(path)
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise InstanceParseError(f"{path}: {e.strerror}") from e
    except yaml.YAMLError as e:
        raise InstanceParseError(f"{path}: {e}") from e
    _logger.debug("loaded instance file %s", path)
    return instance_from_dict(data, name=path.stem)


def save_instance(instance: InstanceSpec, path: str | Path) -> None:
    with open(path, "w") as f:
        yaml.safe_dump(instance_to_dict(instance), f, sort_keys=False)
