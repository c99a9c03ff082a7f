"""Workflow nodes for the language-driven decision-making agent."""
