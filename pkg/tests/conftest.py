"""Shared fixtures: small models, a scripted chat-completions client and recorded sleeps."""

import os
import threading
import time
from types import SimpleNamespace

import httpx
import numpy as np
import openai
import pytest

from social_learning.belief_core import (
    CostModel,
    ObservationModel,
    diagonal_observation_model,
    hate_speech_cost,
    misclassification_cost,
    toxic_observation_model,
    type_one_error_cost,
)
from social_learning.stopping_control import StoppingCostParams

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")
SAMPLE_DATASET = os.path.join(os.path.dirname(__file__), "..", "data", "sample_comments.csv")

VALID_RESPONSE = (
    '{"is_insulting": true, "is_dehumanizing": false, "is_humiliating": false, '
    '"promotes_violence": false, "promotes_genocide": false, "is_respectful": false}'
)


@pytest.fixture
def two_state_model() -> ObservationModel:
    return ObservationModel([[0.8, 0.2], [0.3, 0.7]])


@pytest.fixture
def zero_one_cost() -> CostModel:
    return misclassification_cost(2)


@pytest.fixture
def toxic_model() -> ObservationModel:
    return toxic_observation_model()


@pytest.fixture
def toxic_cost() -> CostModel:
    return type_one_error_cost(1.0)


@pytest.fixture
def toxic_params() -> StoppingCostParams:
    return StoppingCostParams(rho=0.5, d=0.1, delta=1.0, target_state=0)


@pytest.fixture
def six_state_model() -> ObservationModel:
    return diagonal_observation_model(6, 0.4)


@pytest.fixture
def six_state_cost() -> CostModel:
    return hate_speech_cost(6)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


def rate_limit_error() -> openai.RateLimitError:
    request = httpx.Request("POST", "https://sensor.test/v1/chat/completions")
    return openai.RateLimitError("rate limited", response=httpx.Response(429, request=request),
                                 body=None)


def connection_error() -> openai.APIConnectionError:
    return openai.APIConnectionError(
        request=httpx.Request("POST", "https://sensor.test/v1/chat/completions"))


def bad_request_error() -> openai.BadRequestError:
    request = httpx.Request("POST", "https://sensor.test/v1/chat/completions")
    return openai.BadRequestError("bad request", response=httpx.Response(400, request=request),
                                  body=None)


class FakeChatClient:
    """Chat-completions stand-in replaying scripted replies.

    Each script item is either a string (returned as the completion text) or
    an exception instance (raised). The last item repeats once the script is
    exhausted.
    """

    def __init__(self, script, delay: float = 0.0):
        self.script = list(script)
        self.delay = delay
        self.calls = []
        self.in_flight = 0
        self.max_in_flight = 0
        self._lock = threading.Lock()
        self.chat = SimpleNamespace(completions=SimpleNamespace(create=self._create))

    def _create(self, **kwargs):
        with self._lock:
            index = min(len(self.calls), len(self.script) - 1)
            self.calls.append(kwargs)
            self.in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self.in_flight)
        try:
            if self.delay:
                time.sleep(self.delay)
            item = self.script[index]
            if isinstance(item, Exception):
                raise item
            return SimpleNamespace(choices=[SimpleNamespace(message=SimpleNamespace(content=item))])
        finally:
            with self._lock:
                self.in_flight -= 1


@pytest.fixture
def sleeps():
    """List recording every backoff delay instead of sleeping."""
    return []
