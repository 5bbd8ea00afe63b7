"""Spectral decimation, Julia sets and spectral gaps for symmetric finitely ramified fractals."""
