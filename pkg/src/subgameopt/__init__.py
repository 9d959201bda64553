"""Subgame-perfect first-order methods for nonsmooth convex minimization."""
