"""Sensor-frame line protocol: one JSON object per line.

Every line names its instrument and a payload tag; replay files add an
integer "ts" field holding the sample-frame timestamp.  The parser returns
structured errors instead of raising through the stream loop, so one bad
line never kills a session.

Shapes:
  {"inst":"touch","t":"key","i":3,"on":true}
  {"inst":"drums","t":"pad","i":2,"p":0.7}
  {"inst":"drums","t":"strip","pos":0.5}
  {"inst":"head","t":"orient","yaw":30,"pitch":-10,"roll":0}
  {"inst":"harp","t":"grid","x":0.4,"y":0.8,"id":"left_hand"}
  {"inst":"touch","t":"btn","i":0,"on":true}
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..instruments import (
    Button,
    GridPoint,
    Orientation,
    PadPressure,
    SensorFrame,
    Strip,
    TouchKey,
)


class SensorLineError(ValueError):
    """One bad line: carries the reason and the offending text."""

    def __init__(self, reason: str, line: str):
        super().__init__(f"{reason}: {line.strip()!r}")
        self.reason = reason
        self.line = line


@dataclass(frozen=True)
class ParsedLine:
    frame: SensorFrame
    ts: int | None = None


def _num(obj: dict, key: str, line: str) -> float:
    v = obj.get(key)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise SensorLineError(f"field {key!r} must be a number", line)
    return float(v)


def _int(obj: dict, key: str, line: str) -> int:
    v = obj.get(key)
    if not isinstance(v, int) or isinstance(v, bool):
        raise SensorLineError(f"field {key!r} must be an integer", line)
    return v


def _bool(obj: dict, key: str, line: str) -> bool:
    v = obj.get(key)
    if not isinstance(v, bool):
        raise SensorLineError(f"field {key!r} must be a boolean", line)
    return v


def parse_line(line: str, known_instruments: set[str] | None = None) -> ParsedLine:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SensorLineError(f"not valid JSON ({exc.msg})", line) from exc
    if not isinstance(obj, dict):
        raise SensorLineError("line must be a JSON object", line)

    inst = obj.get("inst")
    if not isinstance(inst, str) or not inst:
        raise SensorLineError("missing instrument id field 'inst'", line)
    if known_instruments is not None and inst not in known_instruments:
        raise SensorLineError(f"unknown instrument id {inst!r}", line)

    tag = obj.get("t")
    if tag == "key":
        payload = TouchKey(_int(obj, "i", line), _bool(obj, "on", line))
    elif tag == "pad":
        payload = PadPressure(_int(obj, "i", line), _num(obj, "p", line))
    elif tag == "strip":
        payload = Strip(_num(obj, "pos", line))
    elif tag == "orient":
        payload = Orientation(_num(obj, "yaw", line), _num(obj, "pitch", line),
                              _num(obj, "roll", line))
    elif tag == "grid":
        body = obj.get("id", "p0")
        if not isinstance(body, str):
            raise SensorLineError("field 'id' must be a string", line)
        payload = GridPoint(_num(obj, "x", line), _num(obj, "y", line), body)
    elif tag == "btn":
        payload = Button(_int(obj, "i", line), _bool(obj, "on", line))
    else:
        raise SensorLineError(f"unknown payload tag {tag!r}", line)

    ts = None
    if "ts" in obj:
        ts = obj["ts"]
        if not isinstance(ts, int) or isinstance(ts, bool) or ts < 0:
            raise SensorLineError("field 'ts' must be a non-negative integer", line)
    return ParsedLine(SensorFrame(inst, payload), ts)


def frame_to_line(frame: SensorFrame, ts: int | None = None) -> str:
    p = frame.payload
    obj: dict = {"inst": frame.instrument}
    if isinstance(p, TouchKey):
        obj.update(t="key", i=p.index, on=p.on)
    elif isinstance(p, PadPressure):
        obj.update(t="pad", i=p.pad, p=p.pressure)
    elif isinstance(p, Strip):
        obj.update(t="strip", pos=p.position)
    elif isinstance(p, Orientation):
        obj.update(t="orient", yaw=p.yaw, pitch=p.pitch, roll=p.roll)
    elif isinstance(p, GridPoint):
        obj.update(t="grid", x=p.x, y=p.y, id=p.body_point)
    elif isinstance(p, Button):
        obj.update(t="btn", i=p.id, on=p.pressed)
    else:
        raise ValueError(f"cannot serialize payload {type(p).__name__}")
    if ts is not None:
        obj["ts"] = ts
    return json.dumps(obj)
