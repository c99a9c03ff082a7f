"""
Configuration settings.
Published defaults for the social learning experiments and the LLM sensor.
"""

import os
from dotenv import load_dotenv

load_dotenv()

# LLM sensor (any OpenAI-compatible chat completions endpoint)
SENSOR_API_KEY = os.getenv('SENSOR_API_KEY')
SENSOR_ENDPOINT = os.getenv('SENSOR_ENDPOINT', "https://api.together.xyz/v1")
SENSOR_MODEL = os.getenv('SENSOR_MODEL', "mistralai/Mixtral-8x7B-Instruct-v0.1")
SENSOR_TIMEOUT = 30.0
SENSOR_MAX_CONCURRENT = 4
SENSOR_MAX_RETRIES = 5
SENSOR_BACKOFF_BASE = 1.0
SENSOR_BACKOFF_MAX = 30.0

SENSOR_SAMPLING = {
    "max_tokens": 100,
    "temperature": 0.7,
    "top_p": 0.7,
    "top_k": 50,
    "repetition_penalty": 50,
}

# Monte Carlo experiments
N_MC_RUNS = 100
USER_COMMENTS_T = 100
HORIZON = 100
PRIOR_GRID_STEP = 0.05
STOPPING_HORIZON_CAP = 200

# Stopping problem used for the threshold experiment
STOPPING_DEFAULTS = {
    "rho": 0.5,
    "d": 0.1,
    "delta": 1.0,
    "target_state": 0,  # "not hateful"
}

# SPSA gain schedule a_n = a / (n + A)^alpha, c_n = c / n^gamma
SPSA_GAINS = {
    "a": 0.1,
    "A": 10.0,
    "c": 0.05,
    "alpha": 0.602,
    "gamma": 0.101,
}

# Per-state RBMs on sensor flags
RBM_DEFAULTS = {
    "n_visible": 6,
    "n_hidden": 4,
    "epochs": 100,
    "learning_rate": 0.1,
    "cd_steps": 1,
    "gibbs_samples": 1000,
    "gibbs_iterations": 1000,
}

# Dataset columns (measuring hate speech corpus layout)
DATASET_COLUMNS = {
    "text": "text",
    "label": "hatespeech",
    "score": "hate_speech_score",
}

TRANSCRIPT_CACHE_PATH = os.getenv('TRANSCRIPT_CACHE_PATH', "data/sensor_transcripts.jsonl")
LOG_LEVEL = os.getenv('LOG_LEVEL', "INFO")
