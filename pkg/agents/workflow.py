"""LangGraph workflow for one language-driven decision-making agent."""

import logging
from typing import List, Optional

import pandas as pd
from langgraph.graph import StateGraph, START, END

from agents.state import SocialLearningState
from agents.nodes.prompt_node import prompt_node
from agents.nodes.sensor_node import sensor_node
from agents.nodes.decision_node import decision_node
from agents.nodes.public_belief_node import public_belief_node
from social_learning.belief_core import Belief, CostModel, ObservationModel, validate_model
from social_learning.exceptions import SocialLearningError
from utils.sensing import SyntheticUser

logger = logging.getLogger(__name__)

PROTOCOL_COLUMNS = ["k", "observation", "action", "in_cascade", "public_p0_before", "public_p0_after"]


def create_workflow(sensor, obs_model: ObservationModel, cost: CostModel):
    """
    Create and compile the workflow: prompt -> sense -> decide -> public belief.

    Args:
        sensor: Object with ``sense(comment) -> SensorReport``
        obs_model: Likelihood of reduced observations
        cost: Cost table used for the myopic action

    Returns:
        Compiled LangGraph application
    """
    validate_model(obs_model, cost)

    def sense(state: SocialLearningState):
        return sensor_node(state, sensor)

    def decide(state: SocialLearningState):
        return decision_node(state, obs_model, cost)

    def publish(state: SocialLearningState):
        return public_belief_node(state, obs_model, cost)

    # Create graph
    workflow = StateGraph(SocialLearningState)

    # Add nodes
    workflow.add_node("prompt", prompt_node)
    workflow.add_node("sensor", sense)
    workflow.add_node("decision", decide)
    workflow.add_node("public_belief", publish)

    # Define edges (sequential flow)
    workflow.add_edge(START, "prompt")
    workflow.add_edge("prompt", "sensor")
    workflow.add_edge("sensor", "decision")
    workflow.add_edge("decision", "public_belief")
    workflow.add_edge("public_belief", END)

    # Compile workflow
    app = workflow.compile()

    logger.info("LangGraph workflow created and compiled")

    return app


def run_llm_protocol(user: SyntheticUser, sensor, obs_model: ObservationModel, cost: CostModel,
                     initial_belief: Belief, horizon: Optional[int] = None) -> pd.DataFrame:
    """
    Run one agent per comment of ``user``, threading the public belief.

    Returns:
        One row per agent with the observation, action and public belief mass on state 0

    Raises:
        SocialLearningError: if an agent's workflow ended in an error state
    """
    app = create_workflow(sensor, obs_model, cost)
    comments = user.comments if horizon is None else user.comments[:horizon]
    belief: List[float] = initial_belief.to_list()
    rows = []

    for k, record in enumerate(comments, start=1):
        result = app.invoke({
            "comment": record.text,
            "step": k,
            "public_belief": belief,
            "current_step": "start",
            "error": "",
            "messages": [],
        })
        if result.get("error"):
            raise SocialLearningError(f"Agent {k} failed at {result['current_step']}: {result['error']}")
        rows.append({
            "k": k,
            "observation": result["observation"],
            "action": result["action"],
            "in_cascade": result["in_cascade"],
            "public_p0_before": belief[0],
            "public_p0_after": result["public_belief_after"][0],
        })
        belief = result["public_belief_after"]

    logger.info(f"LLM protocol for user type {user.user_type}: {len(rows)} agents")
    return pd.DataFrame(rows, columns=PROTOCOL_COLUMNS)
