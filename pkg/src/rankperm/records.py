"""Line-delimited JSON records for outcomes and whole runs.

Exact rationals are always written as "p/q" strings (plain "p" for
integers), never as decimals.  Floats use Python's shortest round-trip repr.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, is_dataclass
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import __version__
from .bounds import BoundReport, EqualityVerdict
from .matrix import CompositionVector, Matrix, Permutation
from .search import SCOPE_NOTE, SearchConfig, SearchOutcome

OUTCOME_FIELDS = ("ts", "cmd", "config", "verdict", "value", "bound", "gap", "seed",
                  "n", "k", "kind", "scope_note")


def jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (bool, type(None), str, int)):
        return x
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, Matrix):
        return {"mode": x.mode, "rows": [[str(v) if x.is_exact else float(v) for v in row]
                                         for row in x.tolist()]}
    if isinstance(x, Permutation):
        return x.one_line()
    if isinstance(x, CompositionVector):
        return list(x.parts)
    if isinstance(x, SearchConfig):
        return x.as_dict()
    if isinstance(x, BoundReport):
        return {
            "n": x.n, "k": x.k, "r": x.r, "s": x.s,
            "composition": list(x.composition.parts), "kind": x.kind,
            "formulation": x.formulation,
            "stochastic_bound": jsonable(x.stochastic_bound),
            "scale": jsonable(x.scale), "total": jsonable(x.total),
        }
    if isinstance(x, EqualityVerdict):
        return {"holds": x.holds, "case": x.case, "case_number": x.case_number,
                "witnesses": jsonable(x.witnesses)}
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if is_dataclass(x):
        return jsonable(asdict(x))
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(record: dict) -> str:
    return json.dumps(jsonable(record), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def deterministic_ts() -> str | None:
    """Timestamp for outcome streams: SOURCE_DATE_EPOCH when set, else null,
    so that repeated runs stay byte-identical."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is None:
        return None
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()


def outcome_record(outcome: SearchOutcome, cmd: str) -> dict:
    config = outcome.config
    return {
        "ts": deterministic_ts(),
        "cmd": cmd,
        "config": config.as_dict() if config else None,
        "verdict": outcome.verdict,
        "value": outcome.value,
        "bound": outcome.bound.total,
        "gap": outcome.gap,
        "seed": outcome.seed,
        "n": outcome.bound.n,
        "k": outcome.bound.k,
        "kind": outcome.bound.kind,
        "scope_note": SCOPE_NOTE,
    }


def digest_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def run_record(cmd: str, config: dict, outputs, inputs_digest: dict | None = None) -> dict:
    """Self-contained description of one CLI invocation."""
    return {
        "ts": datetime.now(timezone.utc).isoformat(),
        "cmd": cmd,
        "config": config,
        "inputs_digest": inputs_digest or {},
        "outputs": outputs,
        "version": __version__,
    }


def append_record(path, record: dict) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(dumps(record) + "\n")


def read_records(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
