"""Chat-completions client used as the LLM sensor."""

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence

import openai
from openai import OpenAI
from pydantic import BaseModel, Field
from tenacity import (
    RetryError,
    Retrying,
    before_sleep_log,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from config.settings import (
    SENSOR_API_KEY,
    SENSOR_BACKOFF_BASE,
    SENSOR_BACKOFF_MAX,
    SENSOR_ENDPOINT,
    SENSOR_MAX_CONCURRENT,
    SENSOR_MAX_RETRIES,
    SENSOR_MODEL,
    SENSOR_SAMPLING,
    SENSOR_TIMEOUT,
)
from social_learning.exceptions import (
    CacheMiss,
    MissingField,
    NoJsonFound,
    NonBooleanValue,
    ParseFailedAfterRetries,
    RateLimited,
    TransportError,
)
from utils.database import TranscriptCache
from utils.sensing import SensorReport, build_prompt, parse_response

logger = logging.getLogger(__name__)

# Failures worth another request
RETRYABLE_ERRORS = (openai.RateLimitError, openai.APIConnectionError, openai.InternalServerError)
PARSE_ERRORS = (NoJsonFound, MissingField, NonBooleanValue)


class SensorConfig(BaseModel):
    endpoint: str = SENSOR_ENDPOINT
    model: str = SENSOR_MODEL
    max_tokens: int = Field(default=SENSOR_SAMPLING["max_tokens"], gt=0)
    temperature: float = Field(default=SENSOR_SAMPLING["temperature"], ge=0.0)
    top_p: float = Field(default=SENSOR_SAMPLING["top_p"], gt=0.0, le=1.0)
    top_k: int = Field(default=SENSOR_SAMPLING["top_k"], gt=0)
    repetition_penalty: float = Field(default=SENSOR_SAMPLING["repetition_penalty"], gt=0.0)
    timeout: float = Field(default=SENSOR_TIMEOUT, gt=0.0)
    max_concurrent: int = Field(default=SENSOR_MAX_CONCURRENT, gt=0)
    max_retries: int = Field(default=SENSOR_MAX_RETRIES, ge=0)
    backoff_base: float = Field(default=SENSOR_BACKOFF_BASE, ge=0.0)
    backoff_max: float = Field(default=SENSOR_BACKOFF_MAX, ge=0.0)


class SensorClient:
    """Remote LLM sensor with bounded concurrency and exponential-backoff retries."""

    def __init__(self, config: Optional[SensorConfig] = None, client=None,
                 sleep: Callable[[float], None] = time.sleep):
        self.config = config or SensorConfig()
        if client is None:
            if not SENSOR_API_KEY:
                raise TransportError("SENSOR_API_KEY is not set")
            # Retries are handled here, not inside the SDK
            client = OpenAI(api_key=SENSOR_API_KEY, base_url=self.config.endpoint,
                            timeout=self.config.timeout, max_retries=0)
        self.client = client
        self.sleep = sleep
        self._slots = threading.BoundedSemaphore(self.config.max_concurrent)

    @property
    def attempts(self) -> int:
        return self.config.max_retries + 1

    def _retrying(self, retry_on) -> Retrying:
        return Retrying(
            stop=stop_after_attempt(self.attempts),
            wait=wait_exponential(multiplier=self.config.backoff_base, exp_base=2,
                                  max=self.config.backoff_max),
            retry=retry_if_exception_type(retry_on),
            sleep=self.sleep,
            before_sleep=before_sleep_log(logger, logging.WARNING),
        )

    def _request(self, prompt: str) -> str:
        with self._slots:
            response = self.client.chat.completions.create(
                model=self.config.model,
                messages=[{"role": "user", "content": prompt}],
                max_tokens=self.config.max_tokens,
                temperature=self.config.temperature,
                top_p=self.config.top_p,
                extra_body={
                    "top_k": self.config.top_k,
                    "repetition_penalty": self.config.repetition_penalty,
                },
            )
        return response.choices[0].message.content or ""

    def complete(self, prompt: str) -> str:
        """
        Send one prompt and return the raw completion text.

        Raises:
            RateLimited: if every attempt was rate limited
            TransportError: on connection failures after retries or non-retryable statuses
        """
        try:
            return self._retrying(RETRYABLE_ERRORS)(self._request, prompt)
        except RetryError as e:
            last_error = e.last_attempt.exception()
            if isinstance(last_error, openai.RateLimitError):
                raise RateLimited(f"Rate limited after {self.attempts} attempts")
            raise TransportError(f"Sensor request failed after retries: {last_error}")
        except openai.APIStatusError as e:
            raise TransportError(f"Sensor endpoint returned status {e.status_code}: {e}")

    def _sense_once(self, prompt: str) -> SensorReport:
        return parse_response(self.complete(prompt))

    def sense(self, comment: str) -> SensorReport:
        """Prompt, query and parse; malformed responses are re-queried."""
        prompt = build_prompt(comment)
        try:
            return self._retrying(PARSE_ERRORS)(self._sense_once, prompt)
        except RetryError as e:
            raise ParseFailedAfterRetries(self.attempts, e.last_attempt.exception())

    def sense_many(self, comments: Sequence[str]) -> List[SensorReport]:
        """Sense comments concurrently; results keep the input order."""
        with ThreadPoolExecutor(max_workers=self.config.max_concurrent) as pool:
            return list(pool.map(self.sense, comments))


class CachedSensor:
    """
    Cache-first sensor.

    Without a remote client every miss raises CacheMiss, so cached runs are
    fully offline. With one, misses are sensed remotely and appended.
    """

    def __init__(self, cache: TranscriptCache, remote: Optional[SensorClient] = None):
        self.cache = cache
        self.remote = remote

    def sense(self, comment: str) -> SensorReport:
        raw = self.cache.get(comment)
        if raw is not None:
            logger.debug("Transcript cache hit")
            return parse_response(raw)
        if self.remote is None:
            raise CacheMiss(f"No cached transcript for comment {comment[:40]!r}")
        report = self.remote.sense(comment)
        self.cache.put(comment, report.raw_response)
        return report


def sense_remote(comment: str, config: Optional[SensorConfig] = None,
                 client=None) -> SensorReport:
    """One-shot remote sensing of a single comment."""
    return SensorClient(config, client=client).sense(comment)
