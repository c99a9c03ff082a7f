"""Private posterior and myopic action node."""

import logging
from typing import Dict, Any
from agents.state import SocialLearningState
from social_learning.belief_core import Belief, CostModel, ObservationModel, bayes_update, myopic_action

logger = logging.getLogger(__name__)


def decision_node(state: SocialLearningState, obs_model: ObservationModel, cost: CostModel) -> Dict[str, Any]:
    """Combine the public belief with the private observation and act myopically."""
    if state.get("error"):
        return state

    try:
        public_belief = Belief(state["public_belief"])
        posterior = bayes_update(public_belief, obs_model, state["observation"])
        action = myopic_action(posterior, cost)
        return {
            **state,
            "private_belief": posterior.to_list(),
            "action": action,
            "current_step": "decision_completed"
        }
    except Exception as e:
        error_msg = f"Error in decision node: {str(e)}"
        logger.error(error_msg)
        return {
            **state,
            "error": error_msg,
            "current_step": "decision_error"
        }
