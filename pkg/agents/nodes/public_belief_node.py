"""Public belief node: the social learning filter applied to the agent's action."""

import logging
from typing import Dict, Any
from agents.state import SocialLearningState
from social_learning.belief_core import Belief, CostModel, ObservationModel, social_filter_update
from social_learning.cascade_sim import detect_cascade

logger = logging.getLogger(__name__)


def public_belief_node(state: SocialLearningState, obs_model: ObservationModel, cost: CostModel) -> Dict[str, Any]:
    """Update the public belief from the observed action only."""
    if state.get("error"):
        return state

    try:
        public_belief = Belief(state["public_belief"])
        in_cascade = detect_cascade(public_belief, obs_model, cost)
        updated = social_filter_update(public_belief, obs_model, cost, state["action"])
        messages = list(state.get("messages") or [])
        if in_cascade:
            messages.append(f"Step {state.get('step')}: public belief frozen, agent herds")
        return {
            **state,
            "public_belief_after": updated.to_list(),
            "in_cascade": in_cascade,
            "messages": messages,
            "current_step": "public_belief_completed"
        }
    except Exception as e:
        error_msg = f"Error in public belief node: {str(e)}"
        logger.error(error_msg)
        return {
            **state,
            "error": error_msg,
            "current_step": "public_belief_error"
        }
