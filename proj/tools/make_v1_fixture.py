#!/usr/bin/env python3
"""Down-converts a schema_version 2 session.json into the version 1 layout.

Version 1 stored only the event log:
  {"schema_version": 1, "session_id": "...",
   "events": [{"seq": 0, "type": "session_created", "actor": "system", "data": {...}}]}
"""

import json
import sys


def main():
    src, dst = sys.argv[1], sys.argv[2]
    doc = json.load(open(src))
    events = []
    for e in doc["event_log"]:
        data = dict(e["payload"])
        if e["kind"] == "session_created":
            data.pop("id", None)
        ev = {"seq": e["index"], "type": e["kind"], "actor": e["actor"], "data": data}
        if "wall_clock" in e:
            ev["timestamp"] = e["wall_clock"]
        events.append(ev)
    with open(dst, "w") as fh:
        json.dump({"schema_version": 1, "session_id": doc["id"], "events": events}, fh, indent=1)
        fh.write("\n")


if __name__ == "__main__":
    main()
