"""LLM-as-sensor utilities: prompt, response parsing, observation reduction and datasets."""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import yaml
from pydantic import BaseModel, Field, model_validator

from config.settings import DATASET_COLUMNS, USER_COMMENTS_T
from social_learning.belief_core import ObservationModel
from social_learning.cascade_sim import sample_observation
from social_learning.exceptions import (
    InsufficientData,
    MalformedRow,
    MissingColumn,
    MissingField,
    NoJsonFound,
    NonBooleanValue,
)
from templates.prompt_template import SENSOR_PROMPT_PREFIX, SENSOR_PROMPT_SUFFIX

logger = logging.getLogger(__name__)

# Severity order: respectful < insulting < dehumanizing < humiliating < violence < genocide
FLAG_ORDER = (
    "is_respectful",
    "is_insulting",
    "is_dehumanizing",
    "is_humiliating",
    "promotes_violence",
    "promotes_genocide",
)
N_FLAGS = len(FLAG_ORDER)
N_INTENSITIES = 5

# Order in which the prompt lists the keys
PROMPT_KEY_ORDER = (
    "is_insulting",
    "is_dehumanizing",
    "is_humiliating",
    "promotes_violence",
    "promotes_genocide",
    "is_respectful",
)

_TRUE_WORDS = {"true", "yes"}
_FALSE_WORDS = {"false", "no"}


@dataclass(frozen=True)
class SensorReport:
    """Parsed sensor output; ``flags`` follow FLAG_ORDER."""

    flags: Tuple[bool, ...]
    reduced: int
    raw_response: str = ""

    def to_json(self) -> str:
        """Serialize the flags in the prompt's JSON shape."""
        mapping = dict(zip(FLAG_ORDER, self.flags))
        return json.dumps({key: mapping[key] for key in PROMPT_KEY_ORDER})


class CommentRecord(BaseModel):
    text: str = Field(min_length=1)
    is_hate: bool
    intensity: Optional[int] = Field(default=None, ge=1, le=N_INTENSITIES)

    @model_validator(mode="after")
    def _intensity_matches_label(self):
        if self.is_hate and self.intensity is None:
            raise ValueError("hateful comments need an intensity")
        if not self.is_hate and self.intensity is not None:
            raise ValueError("intensity is only defined for hateful comments")
        return self

    @property
    def user_class(self) -> int:
        """0 for non-hateful comments, otherwise the intensity."""
        return self.intensity if self.is_hate else 0


@dataclass
class SyntheticUser:
    user_type: int
    comments: List[CommentRecord] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Prompt and response
# ---------------------------------------------------------------------------

def build_prompt(comment: str) -> str:
    """Wrap ``comment`` in the sensor prompt template."""
    if not comment:
        raise ValueError("Cannot build a sensor prompt for an empty comment")
    return SENSOR_PROMPT_PREFIX + comment + SENSOR_PROMPT_SUFFIX


def extract_json_block(raw: str) -> str:
    """First balanced ``{...}`` block of ``raw``, ignoring braces inside quotes."""
    start = raw.find("{")
    if start < 0:
        raise NoJsonFound(f"No JSON object in sensor response: {raw[:80]!r}")

    depth = 0
    quote = None
    escaped = False
    for index in range(start, len(raw)):
        char = raw[index]
        if quote:
            if escaped:
                escaped = False
            elif char == "\\":
                escaped = True
            elif char == quote:
                quote = None
            continue
        if char in ("'", '"'):
            quote = char
        elif char == "{":
            depth += 1
        elif char == "}":
            depth -= 1
            if depth == 0:
                return raw[start:index + 1]
    raise NoJsonFound(f"Unbalanced JSON object in sensor response: {raw[:80]!r}")


def _load_mapping(block: str) -> Dict[str, object]:
    try:
        data = json.loads(block)
    except json.JSONDecodeError:
        # Single quotes and Python-style True/False are valid YAML flow mappings
        try:
            data = yaml.safe_load(block)
        except yaml.YAMLError as e:
            raise NoJsonFound(f"Sensor response block is not a mapping: {e}")
    if not isinstance(data, dict):
        raise NoJsonFound(f"Sensor response block is not a mapping: {block[:80]!r}")
    return {str(key).strip().lower(): value for key, value in data.items()}


def _as_bool(name: str, value: object) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        word = value.strip().lower()
        if word in _TRUE_WORDS:
            return True
        if word in _FALSE_WORDS:
            return False
    raise NonBooleanValue(name, value)


def parse_response(raw: str) -> SensorReport:
    """
    Parse a sensor response into flags and the reduced observation.

    Text after the first JSON block (the model's explanation) is dropped.

    Raises:
        NoJsonFound, MissingField, NonBooleanValue
    """
    mapping = _load_mapping(extract_json_block(raw))
    flags = []
    for name in FLAG_ORDER:
        if name not in mapping:
            raise MissingField(name)
        flags.append(_as_bool(name, mapping[name]))
    return SensorReport(flags=tuple(flags), reduced=reduce_observation(flags), raw_response=raw)


def reduce_observation(flags: Sequence) -> int:
    """Index of the most severe flag set; 0 when no flag is set."""
    set_indices = [i for i, flag in enumerate(flags) if bool(flag)]
    return max(set_indices) if set_indices else 0


def synthetic_flags(y: int) -> Tuple[int, ...]:
    """Smallest flag vector reducing to ``y``."""
    if not 0 <= y < N_FLAGS:
        raise ValueError(f"Observation {y} outside 0..{N_FLAGS - 1}")
    return tuple(1 if i == y else 0 for i in range(N_FLAGS))


def sense_synthetic(true_state: int, obs_model: ObservationModel,
                    rng: np.random.Generator) -> int:
    """Observation drawn from the composed sensor channel P(y | x)."""
    return sample_observation(true_state, obs_model, rng)


class SyntheticSensor:
    """Sensor stand-in that ignores the text and samples from P(y | x) for a fixed state."""

    def __init__(self, true_state: int, obs_model: ObservationModel, rng: np.random.Generator):
        self.true_state = true_state
        self.obs_model = obs_model
        self.rng = rng

    def sense(self, comment: str) -> SensorReport:
        y = sense_synthetic(self.true_state, self.obs_model, self.rng)
        return SensorReport(flags=tuple(bool(bit) for bit in synthetic_flags(y)), reduced=y)


def synthetic_training_data(obs_model: ObservationModel, n_per_state: int,
                            rng: np.random.Generator) -> List[np.ndarray]:
    """Binary flag vectors per state, drawn through the synthetic sensor."""
    return [
        np.array([synthetic_flags(sense_synthetic(state, obs_model, rng))
                  for _ in range(n_per_state)], dtype=float)
        for state in range(obs_model.n_states)
    ]


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------

def default_cut_points(scores: Sequence[float]) -> np.ndarray:
    """Four inner edges splitting (0, max score] into equal fifths."""
    positive = [s for s in scores if s > 0]
    top = max(positive) if positive else 1.0
    return top * np.arange(1, N_INTENSITIES) / N_INTENSITIES


def score_to_intensity(score: float, cut_points: Sequence[float]) -> int:
    """Bin a continuous score into 1..5; a score on an edge goes to the lower bin."""
    return int(np.searchsorted(np.asarray(cut_points, dtype=float), score, side="left")) + 1


def _parse_label(value: object, line: int) -> bool:
    if isinstance(value, str):
        word = value.strip().lower()
        if word in _TRUE_WORDS:
            return True
        if word in _FALSE_WORDS:
            return False
    number = pd.to_numeric(value, errors="coerce")
    if pd.isna(number):
        raise MalformedRow(line, f"unreadable hate label {value!r}")
    return bool(number > 0)


def load_dataset(path: str, columns: Optional[Dict[str, str]] = None,
                 cut_points: Optional[Sequence[float]] = None) -> List[CommentRecord]:
    """
    Read an annotated comment CSV.

    A row is hateful when its label is true or positive. Intensity comes from
    an ``intensity`` column when present, otherwise from binning the score.

    Args:
        path: CSV path
        columns: Mapping of text/label/score roles to column names
        cut_points: Four increasing score edges; defaults to equal fifths

    Returns:
        Validated comment records in file order
    """
    columns = {**DATASET_COLUMNS, **(columns or {})}
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    has_intensity = "intensity" in frame.columns
    required = [columns["text"], columns["label"]]
    if not has_intensity:
        required.append(columns["score"])
    for name in required:
        if name not in frame.columns:
            raise MissingColumn(name)

    scores = []
    if not has_intensity:
        scores = pd.to_numeric(frame[columns["score"]], errors="coerce")
        if cut_points is None:
            cut_points = default_cut_points(scores.dropna().tolist())

    records = []
    for index, row in frame.iterrows():
        line = int(index) + 2
        text = row[columns["text"]]
        if not text or not text.strip():
            raise MalformedRow(line, "missing text")
        is_hate = _parse_label(row[columns["label"]], line)
        intensity = None
        if is_hate:
            if has_intensity:
                intensity = pd.to_numeric(row["intensity"], errors="coerce")
                if pd.isna(intensity):
                    raise MalformedRow(line, f"unreadable intensity {row['intensity']!r}")
                intensity = int(intensity)
            else:
                if pd.isna(scores[index]):
                    raise MalformedRow(line, f"unreadable score {row[columns['score']]!r}")
                intensity = score_to_intensity(float(scores[index]), cut_points)
        try:
            records.append(CommentRecord(text=text, is_hate=is_hate, intensity=intensity))
        except ValueError as e:
            raise MalformedRow(line, str(e))

    logger.info(f"Loaded {len(records)} comments from {path}")
    return records


def save_dataset(records: Sequence[CommentRecord], path: str) -> None:
    """Write records with an explicit intensity column."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame = pd.DataFrame({
        DATASET_COLUMNS["text"]: [r.text for r in records],
        DATASET_COLUMNS["label"]: [int(r.is_hate) for r in records],
        "intensity": ["" if r.intensity is None else str(r.intensity) for r in records],
    })
    frame.to_csv(path, index=False)


def make_synthetic_user(user_type: int, dataset: Sequence[CommentRecord],
                        rng: np.random.Generator, T: int = USER_COMMENTS_T) -> SyntheticUser:
    """Sample ``T`` comments of one class without replacement.

    ``user_type`` 0 is a non-hateful user, 1..5 a hate speech peddler of
    that intensity.
    """
    if not 0 <= user_type <= N_INTENSITIES:
        raise ValueError(f"user_type must lie in 0..{N_INTENSITIES}, got {user_type}")
    pool = [record for record in dataset if record.user_class == user_type]
    if len(pool) < T:
        raise InsufficientData(user_type, len(pool), T)
    chosen = rng.choice(len(pool), size=T, replace=False)
    return SyntheticUser(user_type=user_type, comments=[pool[i] for i in chosen])
