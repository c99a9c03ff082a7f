"""Belief filtering, herding simulation, stopping control and RBM likelihoods."""
