"""Entanglement certification from CHSH values of 2⊗2 block projections."""
