"""Serialization: game descriptions as JSON, trajectories as JSON lines."""
from __future__ import annotations

import json
from pathlib import Path

from .dynamics import Trajectory
from .model import (
    Game,
    Resource,
    UtilityRule,
    ValidationError,
    WelfareRule,
    make_welfare_rule,
)


def game_to_dict(g: Game) -> dict:
    return {
        "resources": [
            {
                "id": r.rid,
                "welfare": {
                    "family": r.welfare.label,
                    "values": list(r.welfare.values),
                    "tail_slope": r.welfare.tail_slope,
                },
                "utility": {
                    "values": list(r.utility.values),
                    "tail_value": r.utility.tail_value,
                },
                "value": r.value,
            }
            for r in g.resources
        ],
        "players": [
            {"actions": [sorted(a) for a in acts]} for acts in g.actions
        ],
    }


def _welfare_from_dict(d: dict) -> WelfareRule:
    if "values" in d and d["values"]:
        return WelfareRule(tuple(d["values"]), d.get("tail_slope", 0.0), d.get("family", "explicit"))
    params = dict(d.get("params", {}))
    j_max = int(params.pop("j_max", 64))
    return make_welfare_rule(d["family"], j_max, **params)


def game_from_dict(d: dict) -> Game:
    try:
        resources = tuple(
            Resource(
                rd["id"],
                _welfare_from_dict(rd["welfare"]),
                UtilityRule(tuple(rd["utility"]["values"]), rd["utility"].get("tail_value")),
                rd.get("value", 1.0),
            )
            for rd in d["resources"]
        )
        actions = tuple(
            tuple(frozenset(a) for a in pd["actions"]) for pd in d["players"]
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed game description: {exc}") from exc
    return Game(resources, actions)


def save_game(g: Game, path: str | Path) -> None:
    with Path(path).open("w") as fh:
        json.dump(game_to_dict(g), fh, indent=1)
        fh.write("\n")


def load_game(path: str | Path) -> Game:
    with Path(path).open() as fh:
        return game_from_dict(json.load(fh))


def trajectory_to_jsonl(g: Game, traj: Trajectory, path: str | Path) -> None:
    """One record per step: {tau, player, action, welfare, potential}."""
    with Path(path).open("w") as fh:
        for step in traj.steps:
            rec = {
                "tau": step.tau,
                "player": step.player,
                "action": sorted(g.actions[step.player][step.action]),
                "welfare": step.welfare,
                "potential": step.potential,
            }
            fh.write(json.dumps(rec) + "\n")
