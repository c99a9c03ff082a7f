"""Prompt construction node."""

import logging
from typing import Dict, Any
from agents.state import SocialLearningState
from utils.sensing import build_prompt

logger = logging.getLogger(__name__)


def prompt_node(state: SocialLearningState) -> Dict[str, Any]:
    """Wrap the comment in the sensor prompt."""
    try:
        prompt = build_prompt(state.get("comment", ""))
        return {
            **state,
            "prompt": prompt,
            "current_step": "prompt_completed"
        }
    except Exception as e:
        error_msg = f"Error in prompt node: {str(e)}"
        logger.error(error_msg)
        return {
            **state,
            "error": error_msg,
            "current_step": "prompt_error"
        }
