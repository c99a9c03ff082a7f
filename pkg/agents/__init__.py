"""Language-driven decision-making agent package."""
