import itertools
import os

import numpy as np
import pytest

from conftest import GOLDEN_DIR, SAMPLE_DATASET, VALID_RESPONSE
from social_learning.belief_core import ObservationModel
from social_learning.exceptions import (
    InsufficientData,
    MalformedRow,
    MissingColumn,
    MissingField,
    NoJsonFound,
    NonBooleanValue,
)
from utils.sensing import (
    FLAG_ORDER,
    CommentRecord,
    SensorReport,
    SyntheticSensor,
    build_prompt,
    extract_json_block,
    load_dataset,
    make_synthetic_user,
    parse_response,
    reduce_observation,
    save_dataset,
    score_to_intensity,
    sense_synthetic,
    synthetic_flags,
)


# Prompt

def test_prompt_matches_golden_bytes():
    with open(os.path.join(GOLDEN_DIR, "sensor_prompt_hello.txt"), "rb") as f:
        expected = f.read()
    assert build_prompt("hello").encode("utf-8") == expected


def test_prompt_keeps_braces_literal():
    assert "Text: {x} {0}[/INST]" in build_prompt("{x} {0}")


def test_prompt_rejects_empty_comment():
    with pytest.raises(ValueError):
        build_prompt("")


# Response parsing

def test_parse_example_response():
    report = parse_response(VALID_RESPONSE)
    assert report.flags == (False, True, False, False, False, False)
    assert report.reduced == 1
    assert report.raw_response == VALID_RESPONSE


def test_parse_ignores_trailing_explanation():
    raw = "Sure! " + VALID_RESPONSE + "\nThe comment {mildly} insults the reader."
    assert parse_response(raw).reduced == 1


def test_parse_python_style_mapping():
    raw = ("{'is_insulting': True, 'is_dehumanizing': False, 'is_humiliating': False, "
           "'promotes_violence': True, 'promotes_genocide': False, 'is_respectful': False}")
    assert parse_response(raw).reduced == 4


def test_parse_string_booleans_and_key_case():
    raw = ('{"IS_INSULTING": "TRUE", "is_dehumanizing": "false", "is_humiliating": "no", '
           '"promotes_violence": "False", "promotes_genocide": "yes", "is_respectful": "false"}')
    report = parse_response(raw)
    assert report.flags == (False, True, False, False, False, True)
    assert report.reduced == 5


def test_parse_without_json_block():
    with pytest.raises(NoJsonFound):
        parse_response("I cannot classify this comment.")


def test_parse_missing_field():
    raw = ('{"is_insulting": true, "is_dehumanizing": false, "is_humiliating": false, '
           '"promotes_violence": false, "promotes_genocide": false}')
    with pytest.raises(MissingField) as excinfo:
        parse_response(raw)
    assert excinfo.value.name == "is_respectful"


def test_parse_non_boolean_value():
    raw = VALID_RESPONSE.replace('"is_insulting": true', '"is_insulting": "maybe"')
    with pytest.raises(NonBooleanValue) as excinfo:
        parse_response(raw)
    assert excinfo.value.name == "is_insulting"


def test_extract_json_block_ignores_quoted_braces():
    raw = 'prefix {"a": "}", "b": {"c": 1}} suffix'
    assert extract_json_block(raw) == '{"a": "}", "b": {"c": 1}}'


# Reduction

@pytest.mark.parametrize("flags, expected", [
    ((0, 0, 0, 0, 0, 0), 0),
    ((1, 0, 0, 0, 0, 0), 0),
    ((0, 1, 0, 0, 0, 0), 1),
    ((0, 1, 0, 1, 0, 0), 3),
    ((0, 0, 0, 0, 0, 1), 5),
])
def test_reduce_observation_examples(flags, expected):
    assert reduce_observation(flags) == expected


def test_reduction_is_monotone():
    for flags in itertools.product([0, 1], repeat=6):
        for i in range(6):
            raised = list(flags)
            raised[i] = 1
            assert reduce_observation(raised) >= reduce_observation(flags)


def test_report_json_round_trip():
    for flags in itertools.product([False, True], repeat=6):
        report = SensorReport(flags=flags, reduced=reduce_observation(flags))
        parsed = parse_response(report.to_json())
        assert parsed.flags == flags
        assert parsed.reduced == report.reduced


def test_synthetic_flags_reduce_to_observation():
    for y in range(len(FLAG_ORDER)):
        assert reduce_observation(synthetic_flags(y)) == y
    with pytest.raises(ValueError):
        synthetic_flags(6)


# Synthetic sensor

def test_sense_synthetic_deterministic_row(rng):
    model = ObservationModel([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    assert {sense_synthetic(0, model, rng) for _ in range(50)} == {2}


def test_sense_synthetic_toxic_rate(toxic_model):
    rng = np.random.default_rng(17)
    draws = [sense_synthetic(1, toxic_model, rng) for _ in range(100_000)]
    assert np.mean(draws) == pytest.approx(0.7, abs=0.01)


def test_synthetic_sensor_reports(six_state_model, rng):
    sensor = SyntheticSensor(2, six_state_model, rng)
    report = sensor.sense("any text")
    assert sum(report.flags) == 1
    assert report.flags[report.reduced]


# Datasets

def write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_load_small_dataset(tmp_path):
    path = write_csv(tmp_path / "d.csv",
                     "text,hatespeech,hate_speech_score\n"
                     "nice,0,-1.0\n"
                     "rude,1,2.0\n"
                     "awful,1,5.0\n")
    records = load_dataset(path)
    assert [r.user_class for r in records] == [0, 2, 5]


def test_load_dataset_reports_line_of_missing_text(tmp_path):
    path = write_csv(tmp_path / "d.csv",
                     "text,hatespeech,hate_speech_score\n"
                     "nice,0,-1.0\n"
                     ",1,2.0\n")
    with pytest.raises(MalformedRow) as excinfo:
        load_dataset(path)
    assert excinfo.value.line == 3


def test_load_dataset_missing_column(tmp_path):
    path = write_csv(tmp_path / "d.csv", "text,hate_speech_score\nnice,-1.0\n")
    with pytest.raises(MissingColumn) as excinfo:
        load_dataset(path)
    assert excinfo.value.name == "hatespeech"


def test_score_on_edge_goes_to_lower_bin():
    edges = [1.0, 2.0, 3.0, 4.0]
    assert score_to_intensity(2.0, edges) == 2
    assert score_to_intensity(2.0001, edges) == 3
    assert score_to_intensity(0.3, edges) == 1
    assert score_to_intensity(4.9, edges) == 5


def test_dataset_round_trip(tmp_path):
    records = [
        CommentRecord(text="fine", is_hate=False),
        CommentRecord(text="bad, with a comma", is_hate=True, intensity=4),
    ]
    path = str(tmp_path / "out" / "d.csv")
    save_dataset(records, path)
    assert load_dataset(path) == records


def test_comment_record_validation():
    with pytest.raises(ValueError):
        CommentRecord(text="x", is_hate=True)
    with pytest.raises(ValueError):
        CommentRecord(text="x", is_hate=False, intensity=2)


def test_sample_dataset_classes():
    records = load_dataset(SAMPLE_DATASET)
    counts = {c: sum(1 for r in records if r.user_class == c) for c in range(6)}
    assert counts == {0: 4, 1: 4, 2: 4, 3: 4, 4: 4, 5: 5}


def test_make_synthetic_user(rng):
    records = load_dataset(SAMPLE_DATASET)
    user = make_synthetic_user(3, records, rng, T=4)
    assert user.user_type == 3
    assert len(user.comments) == 4
    assert len({c.text for c in user.comments}) == 4
    assert all(c.user_class == 3 for c in user.comments)


def test_make_synthetic_user_insufficient_data(rng):
    records = [CommentRecord(text=f"c{i}", is_hate=True, intensity=3) for i in range(50)]
    with pytest.raises(InsufficientData):
        make_synthetic_user(3, records, rng, T=100)
