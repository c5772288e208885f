"""JSON Lines dataset files.

Line 1 is a header record carrying the schema tag, version, and the
generator config as a flat object. Every following line is one scene.
Coordinates are serialized as decimal floats (repr round trip), so a
write/read cycle is bitwise lossless.
"""

import json
from dataclasses import dataclass

import numpy as np

from ..config import COMMANDS, MAP_CLASSES, SceneGenConfig, config_to_dict, scene_config_from_dict
from ..errors import ParseError, VersionError
from .types import AgentTrack, Polyline, VectorScene

SCHEMA_NAME = "invdriver-scene"
SCHEMA_VERSION = 1


@dataclass
class Dataset:
    config: SceneGenConfig
    scenes: list

    def __len__(self):
        return len(self.scenes)


def _scene_record(scene: VectorScene):
    return {
        "seed": scene.seed,
        "command": scene.command,
        "map": [{"class": el.class_id, "pts": np.asarray(el.points).tolist()}
                for el in scene.map_elements],
        "agents": [{"lw": [ag.length, ag.width],
                    "hist": np.asarray(ag.history).tolist(),
                    "fut": np.asarray(ag.future).tolist()}
                   for ag in scene.agents],
        "ego_fut": np.asarray(scene.ego_future).tolist(),
    }


def write_dataset(scenes, path, cfg: SceneGenConfig):
    header = {"schema": SCHEMA_NAME, "version": SCHEMA_VERSION,
              "config": config_to_dict(cfg)}
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for scene in scenes:
            fh.write(json.dumps(_scene_record(scene)) + "\n")


def _parse_scene(obj, line_no):
    try:
        command = obj["command"]
        if command not in COMMANDS:
            raise ParseError(f"unknown command {command!r}", line=line_no)
        map_elements = []
        for el in obj["map"]:
            if el["class"] not in MAP_CLASSES:
                raise ParseError(f"unknown map class {el['class']!r}", line=line_no)
            map_elements.append(Polyline(np.asarray(el["pts"], dtype=np.float64),
                                         el["class"]))
        agents = []
        for ag in obj["agents"]:
            agents.append(AgentTrack(
                length=float(ag["lw"][0]), width=float(ag["lw"][1]),
                history=np.asarray(ag["hist"], dtype=np.float64),
                future=np.asarray(ag["fut"], dtype=np.float64)))
        return VectorScene(
            map_elements=map_elements, agents=agents,
            ego_future=np.asarray(obj["ego_fut"], dtype=np.float64),
            command=command, seed=int(obj["seed"]))
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed scene record ({exc})", line=line_no) from exc


def read_dataset(path) -> Dataset:
    with open(path) as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty dataset file", line=1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid header ({exc.msg})", line=1) from exc
    if not isinstance(header, dict) or header.get("schema") != SCHEMA_NAME:
        raise ParseError(f"not a {SCHEMA_NAME} file", line=1)
    if header.get("version") != SCHEMA_VERSION:
        raise VersionError(
            f"unsupported schema version {header.get('version')!r} "
            f"(expected {SCHEMA_VERSION})")
    cfg = scene_config_from_dict(header.get("config", {}))
    scenes = []
    for i, line in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid scene record ({exc.msg})", line=i) from exc
        scenes.append(_parse_scene(obj, i))
    return Dataset(config=cfg, scenes=scenes)
