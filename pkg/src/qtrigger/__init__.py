"""Tunnelling-gated exocytosis: rate models, spectra, kinks, SNARE cycle and bouton Monte Carlo."""

__version__ = "0.1.0"
