"""Rational approximation solver for bounded 2D Stokes flow."""
