"""Simulation and real-space RG toolkit for a frustrated two-leg Ising ladder.

The ladder couples an antiferromagnetic top row to a ferromagnetic bottom row
through ferromagnetic rungs and a uniform longitudinal field of the same
magnitude K, with a weaker counter-field U/2 on the bottom row and optional
transverse-field / XX catalyst terms.  Subpackages cover exact
diagonalization (`model`, `spectra`), the two block-RG schemes (`rg_dimer`,
`rg_chain`), the dual dimer picture (`dimer`), and a sweep-oriented command
line front end (`cli`).
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
