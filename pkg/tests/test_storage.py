import json

import numpy as np
import pandas as pd
import pytest

from social_learning.exceptions import ConfigError
from utils.database import TranscriptCache, comment_key
from utils.matrix_io import read_matrix_csv, write_matrix_csv
from utils.results import ResultTable, config_hash


# Transcript cache

def test_cache_first_entry_wins(tmp_path):
    path = str(tmp_path / "cache.jsonl")
    cache = TranscriptCache(path)
    cache.put("comment", "first")
    cache.put("comment", "second")
    assert cache.get("comment") == "first"
    assert len(cache) == 1
    assert "comment" in cache
    assert "other" not in cache


def test_cache_reloads_and_skips_bad_lines(tmp_path):
    path = tmp_path / "cache.jsonl"
    good = {"key": comment_key("a"), "response": "resp", "timestamp": "2024-01-01T00:00:00"}
    path.write_text(json.dumps(good) + "\nnot json\n\n", encoding="utf-8")
    cache = TranscriptCache(str(path))
    assert len(cache) == 1
    assert cache.get("a") == "resp"


def test_cache_entries_carry_timestamp(tmp_path):
    path = tmp_path / "cache.jsonl"
    TranscriptCache(str(path)).put("x", "y")
    entry = json.loads(path.read_text(encoding="utf-8").splitlines()[0])
    assert set(entry) == {"key", "response", "timestamp"}
    assert entry["key"] == comment_key("x")


# Matrix files

def test_read_plain_matrix(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("0.8,0.2\n0.3,0.7\n", encoding="utf-8")
    np.testing.assert_allclose(read_matrix_csv(str(path)), [[0.8, 0.2], [0.3, 0.7]])


def test_labelled_matrix_round_trip(tmp_path):
    path = str(tmp_path / "sub" / "m.csv")
    matrix = np.array([[0.1, 0.9], [1.0 / 3.0, 2.0 / 3.0]])
    write_matrix_csv(matrix, path)
    np.testing.assert_array_equal(read_matrix_csv(path), matrix)


def test_matrix_errors(tmp_path):
    with pytest.raises(ConfigError):
        read_matrix_csv(str(tmp_path / "missing.csv"))
    path = tmp_path / "bad.csv"
    path.write_text("0.2,0.3,0.5\n0.1,abc,0.4\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_matrix_csv(str(path))


# Result tables

def test_config_hash_ignores_key_order():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_result_table_round_trip(tmp_path):
    frame = pd.DataFrame({"gamma": [0.0, 0.5], "pct_not_flagged": [100.0, 51.25]})
    table = ResultTable.from_frame(frame, {"kind": "threshold"}, 7, "threshold",
                                   extra={"switching_points": "0.95"})
    path = str(tmp_path / "out.csv")
    table.write_csv(path)

    text = open(path, encoding="utf-8").read()
    assert text.startswith("# kind: threshold\n# config_hash: ")
    loaded = ResultTable.read_csv(path)
    assert loaded.provenance == table.provenance
    assert loaded.provenance["seed"] == "7"
    pd.testing.assert_frame_equal(loaded.frame, frame)
    assert loaded.columns == ["gamma", "pct_not_flagged"]


def test_result_text_is_reproducible():
    rows = [{"x": 0.1, "y": 1}, {"x": 0.2, "y": 2}]
    first = ResultTable.from_rows(rows, ["x", "y"], {"seed": 1}, 1, "herding").to_csv_text()
    second = ResultTable.from_rows(rows, ["x", "y"], {"seed": 1}, 1, "herding").to_csv_text()
    assert first == second
