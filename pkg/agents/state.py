"""State definition for the language-driven decision-making agent workflow."""

from typing import TypedDict, List, Dict, Any

class SocialLearningState(TypedDict):
    """State that flows through the LangGraph workflow for one agent."""

    # Input data
    comment: str
    step: int
    public_belief: List[float]

    # Node outputs
    prompt: str
    sensor_report: Dict[str, Any]
    observation: int
    private_belief: List[float]
    action: int
    public_belief_after: List[float]
    in_cascade: bool

    # Workflow metadata
    current_step: str
    error: str
    messages: List[str]
