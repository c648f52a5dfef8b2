"""Scenario models: flux laws, agent speed laws, averaging setup and initial data."""
