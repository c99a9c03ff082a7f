"""Result tables written as CSV with a provenance header."""

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import pandas as pd

logger = logging.getLogger(__name__)

CODE_VERSION = "1.0.0"
FLOAT_FORMAT = "%.10g"


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical JSON form of a configuration."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class ResultTable:
    frame: pd.DataFrame
    provenance: Dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_rows(cls, rows: List[dict], columns: List[str], config: dict, seed: int,
                  kind: str) -> "ResultTable":
        return cls.from_frame(pd.DataFrame(rows, columns=columns), config, seed, kind)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, config: dict, seed: int, kind: str,
                   extra: Optional[Dict[str, object]] = None) -> "ResultTable":
        provenance = {
            "kind": kind,
            "config_hash": config_hash(config),
            "seed": str(seed),
            "version": CODE_VERSION,
        }
        for key, value in (extra or {}).items():
            provenance[key] = str(value)
        return cls(frame=frame.reset_index(drop=True), provenance=provenance)

    @property
    def columns(self) -> List[str]:
        return list(self.frame.columns)

    def __len__(self) -> int:
        return len(self.frame)

    def to_csv_text(self) -> str:
        header = "".join(f"# {key}: {value}\n" for key, value in self.provenance.items())
        return header + self.frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")

    def write_csv(self, path: str) -> None:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(self.to_csv_text())
        logger.info(f"Wrote {len(self.frame)} rows to {path}")

    @classmethod
    def read_csv(cls, path: str) -> "ResultTable":
        provenance = {}
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                if not line.startswith("# "):
                    break
                key, _, value = line[2:].rstrip("\n").partition(": ")
                provenance[key] = value
        return cls(frame=pd.read_csv(path, comment="#"), provenance=provenance)
