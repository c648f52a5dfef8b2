"""Uniform 2D grid geometry and cell-averaged density fields."""
