"""Named environment registry: make() plus the list of registered ids."""

from __future__ import annotations

from .env import Environment, EnvParams
from .errors import UnknownEnvironment
from .layouts import Layout

_XLAND_SIZES = {
    Layout.R1: (9, 13, 17),
    Layout.R2: (9, 13, 17),
    Layout.R4: (9, 13, 17),
    Layout.R6: (13, 17, 19),
    Layout.R9: (16, 19, 25),
}

_PORT_SIZES = (5, 6, 8, 16)


def _build_registry() -> dict[str, EnvParams]:
    envs: dict[str, EnvParams] = {}
    for layout, sizes in _XLAND_SIZES.items():
        for s in sizes:
            name = f"XLand-MiniGrid-R{int(layout)}-{s}x{s}"
            envs[name] = EnvParams(layout=layout, height=s, width=s)
    for s in _PORT_SIZES:
        envs[f"MiniGrid-Empty-{s}x{s}"] = EnvParams(height=s, width=s, scenario="empty")
        envs[f"MiniGrid-EmptyRandom-{s}x{s}"] = EnvParams(height=s, width=s, scenario="empty_random")
        envs[f"MiniGrid-DoorKey-{s}x{s}"] = EnvParams(height=s, width=s, scenario="door_key")
    envs["MiniGrid-FourRooms"] = EnvParams(layout=Layout.R4, height=19, width=19, scenario="four_rooms")
    envs["MiniGrid-Unlock"] = EnvParams(height=6, width=11, scenario="unlock")
    envs["MiniGrid-UnlockPickUp"] = EnvParams(height=6, width=11, scenario="unlock_pickup")
    return envs


REGISTRY = _build_registry()


def registered_environments() -> list[str]:
    return sorted(REGISTRY)


def make(name: str) -> tuple[Environment, EnvParams]:
    """Environment plus its default parameters for a registered id."""
    try:
        params = REGISTRY[name]
    except KeyError:
        raise UnknownEnvironment(
            f"no environment named {name!r}; see registered_environments()"
        ) from None
    return Environment(), params
