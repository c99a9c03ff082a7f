"""LLM sensor node: comment in, reduced observation out."""

import logging
from typing import Dict, Any
from agents.state import SocialLearningState

logger = logging.getLogger(__name__)


def sensor_node(state: SocialLearningState, sensor) -> Dict[str, Any]:
    """
    Query the sensor and reduce its flags to an observation.

    Args:
        state: Current state of the workflow
        sensor: Object with ``sense(comment) -> SensorReport``

    Returns:
        Updated state with the sensor report and observation
    """
    if state.get("error"):
        return state

    try:
        report = sensor.sense(state["comment"])
        logger.debug(f"Step {state.get('step')}: observation {report.reduced}")
        return {
            **state,
            "sensor_report": {
                "flags": list(report.flags),
                "reduced": report.reduced,
                "raw_response": report.raw_response,
            },
            "observation": report.reduced,
            "current_step": "sensor_completed"
        }
    except Exception as e:
        error_msg = f"Error in sensor node: {str(e)}"
        logger.error(error_msg)
        return {
            **state,
            "error": error_msg,
            "current_step": "sensor_error"
        }
